#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcurve/curves.hpp"
#include "pcurve/domain.hpp"
#include "pcurve/dynamics.hpp"
#include "pcurve/error.hpp"
#include "pcurve/helix.hpp"
#include "pcurve/io.hpp"
#include "pcurve/square.hpp"
#include "pcurve/validate.hpp"

namespace pcurve::cli {

namespace fs = std::filesystem;

namespace {

struct SolveJob {
  std::string name = "trace";
  std::string x0;
  std::string zeta0;
  std::string tangent;
  std::optional<double> length;
};

struct SolveArgs {
  std::string domain;
  SolveJob job;
  std::string curve;
  std::string sweep;
  double rtol = SolverConfig{}.rel_tol;
  double atol = SolverConfig{}.abs_tol;
  double max_step = SolverConfig{}.max_step;
  double length = SolverConfig{}.max_length;
  std::string out = ".";
  unsigned threads = 0;
};

struct ValidateArgs {
  std::string domain;
  std::string trace;
  std::string out = "report.json";
  std::uint64_t seed = ValidationOptions{}.seed;
  std::int64_t samples = ValidationOptions{}.samples;
  int nodes = ValidationOptions{}.nodes;
  int residual_points = ValidationOptions{}.residual_points;
  double residual_tol = ValidationOptions{}.residual_tol;
  double barycenter_tol = ValidationOptions{}.barycenter_tol;
  double tie_tol = ValidationOptions{}.tie_tol;
  std::optional<double> trim;
};

struct HelixArgs {
  std::string a;
  std::string b;
  double r = 1.0;
  bool grid = false;
  std::string out = "helix.csv";
  std::string traces;
  int periods = 2;
  int nodes_per_period = 64;
};

struct SquareArgs {
  std::string trace;
  std::string x0 = "1,0";
  double length = 50.0;
  double rtol = SolverConfig{}.rel_tol;
  double atol = SolverConfig{}.abs_tol;
  int zero_index = 1;
  std::optional<double> t;
  int samples = 200;
  std::string out = "square.csv";
};

struct SectionsArgs {
  std::string domain;
  std::string trace;
  int count = 16;
  int points = 64;
  std::string out = "sections.json";
};

std::vector<double> parse_list(const std::string& text) {
  const Vector v = parse_vector(text);
  return std::vector<double>(v.begin(), v.end());
}

CurveState initial_state(const SolveJob& job) {
  if (job.x0.empty()) throw Error(ErrorCode::ParseError, "missing --x0");
  CurveState st;
  st.position = parse_vector(job.x0);
  if (!job.zeta0.empty() && !job.tangent.empty()) {
    throw Error(ErrorCode::ParseError, "give either --zeta0 or --tangent, not both");
  }
  if (!job.zeta0.empty()) {
    st.angles = SphericalAngles::normalized(parse_vector(job.zeta0));
  } else if (!job.tangent.empty()) {
    const Vector t = parse_vector(job.tangent);
    if (!(t.norm() > 0.0)) throw Error(ErrorCode::ParseError, "zero tangent");
    st.angles = angles_from_tangent(t.normalized());
  } else {
    throw Error(ErrorCode::ParseError, "missing --zeta0 or --tangent");
  }
  if (st.angles.dim() != st.position.size()) {
    throw Error(ErrorCode::DimensionMismatch, "x0 and initial direction differ in dimension");
  }
  return st;
}

// "arc:R", "square-parabola", "disk-parabola", "helix:a:b[:periods]",
// "segment:x1,..:y1,..".
CurveTrace analytic_curve(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty()) throw Error(ErrorCode::ParseError, "empty curve spec");
  const std::string& kind = parts[0];
  auto num = [&](std::size_t i) {
    if (i >= parts.size()) throw Error(ErrorCode::ParseError, "curve '" + spec + "' needs more fields");
    return parse_vector(parts[i])[0];
  };
  if (kind == "arc") return quarter_arc_trace(num(1));
  if (kind == "square-parabola") return square_parabola_trace();
  if (kind == "disk-parabola") return disk_parabola_trace();
  if (kind == "helix") {
    const int periods = parts.size() > 3 ? static_cast<int>(num(3)) : 2;
    return helix_trace(HelixParams{num(1), num(2), 1.0}, periods, 64);
  }
  if (kind == "segment") {
    if (parts.size() != 3) throw Error(ErrorCode::ParseError, "segment needs two points");
    return segment_trace(parse_vector(parts[1]), parse_vector(parts[2]));
  }
  throw Error(ErrorCode::ParseError, "unknown curve '" + kind + "'");
}

void write_trace_files(const fs::path& dir, const std::string& name, const CurveTrace& trace,
                       nlohmann::json sidecar) {
  fs::create_directories(dir);
  save_trace_csv(dir / (name + ".csv"), trace);
  write_json_file(dir / (name + ".json"), sidecar);
}

int solve_one(const Domain& dom, const std::string& domain_text, const SolveJob& job,
              const SolveArgs& args, std::ostream& out, std::mutex& io) {
  SolverConfig cfg;
  cfg.rel_tol = args.rtol;
  cfg.abs_tol = args.atol;
  cfg.max_step = args.max_step;
  cfg.max_length = job.length.value_or(args.length);
  const CurveState init = initial_state(job);
  CurveTrace trace = integrate(dom, init, cfg);
  nlohmann::json side = trace_sidecar(trace, cfg);
  side["name"] = job.name;
  side["domain"] = nlohmann::json::parse(domain_text);
  side["initial"] = {{"x0", std::vector<double>(init.position.begin(), init.position.end())},
                     {"zeta0", std::vector<double>(init.angles.angles.begin(), init.angles.angles.end())}};
  write_trace_files(args.out, job.name, trace, side);
  std::lock_guard lock(io);
  out << job.name << ": " << trace.size() << " rows, s = " << trace.end() << ", stop "
      << trace.meta.stop_reason << "\n";
  return trace.meta.clean_stop() ? kOk : kInadmissible;
}

std::vector<SolveJob> read_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("sweep file: ") + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "sweep file must hold an array");
  auto list = [](const nlohmann::json& v) {
    std::ostringstream s;
    s.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i].get<double>();
    return s.str();
  };
  std::vector<SolveJob> jobs;
  try {
    for (const auto& e : j) {
      SolveJob job;
      job.name = e.value("name", "run" + std::to_string(jobs.size()));
      job.x0 = list(e.at("x0"));
      if (e.contains("zeta0")) job.zeta0 = list(e["zeta0"]);
      if (e.contains("tangent")) job.tangent = list(e["tangent"]);
      if (e.contains("length")) job.length = e["length"].get<double>();
      jobs.push_back(job);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("sweep entry: ") + e.what());
  }
  return jobs;
}

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  std::mutex io;
  if (!args.curve.empty()) {
    const CurveTrace trace = analytic_curve(args.curve);
    nlohmann::json side = trace_sidecar(trace, SolverConfig{});
    side["name"] = args.job.name;
    side["curve"] = args.curve;
    write_trace_files(args.out, args.job.name, trace, side);
    out << args.job.name << ": " << trace.size() << " rows, s = " << trace.end() << "\n";
    return kOk;
  }
  if (args.domain.empty()) throw Error(ErrorCode::ParseError, "missing --domain");
  const Domain dom = load_domain_file(args.domain);
  const std::string domain_text = domain_to_json_text(dom);
  if (args.sweep.empty()) return solve_one(dom, domain_text, args.job, args, out, io);

  const std::vector<SolveJob> jobs = read_sweep(args.sweep);
  std::vector<int> codes(jobs.size(), kOk);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        codes[i] = solve_one(dom, domain_text, jobs[i], args, out, io);
      } catch (const Error& e) {
        std::lock_guard lock(io);
        err << jobs[i].name << ": " << e.what() << "\n";
        codes[i] = e.code() == ErrorCode::InadmissibleStart ? kInadmissible : kSpecError;
      }
    }
  };
  unsigned n = args.threads ? args.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  // Input errors dominate inadmissible stops.
  int code = kOk;
  for (int c : codes) {
    if (c == kSpecError) return kSpecError;
    code = std::max(code, c);
  }
  return code;
}

int cmd_validate(const ValidateArgs& args, std::ostream& out) {
  const Domain dom = load_domain_file(args.domain);
  const CurveTrace trace = load_trace_csv(args.trace);
  ValidationOptions opts;
  opts.seed = args.seed;
  opts.samples = args.samples;
  opts.nodes = args.nodes;
  opts.residual_points = args.residual_points;
  opts.residual_tol = args.residual_tol;
  opts.barycenter_tol = args.barycenter_tol;
  opts.tie_tol = args.tie_tol;
  opts.truncation = default_truncation(dom, trace);
  if (args.trim) {
    opts.trim_length = *args.trim;
  } else if (const auto* cyl = std::get_if<Cylinder>(&dom.shape())) {
    opts.trim_length = cyl->radius;
  }
  const ValidationReport report = run_validation(dom, trace, opts);
  nlohmann::json j = report_to_json(report);
  for (auto& cell : j["barycenters"]) {
    const Vector p = trace.position_at(cell["s"].get<double>());
    cell["node_position"] = std::vector<double>(p.begin(), p.end());
  }
  j["passed"] = report.passed(opts);
  j["thresholds"] = {{"residual", opts.residual_tol}, {"barycenter", opts.barycenter_tol}};
  const fs::path path(args.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_json_file(path, j);
  out << "max residual " << report.max_residual() << ", max barycenter distance "
      << report.max_barycenter_distance() << ", admissible " << (report.admissible.ok ? "yes" : "no")
      << (report.admissible.ok ? "" : " (" + report.admissible.reason + ")") << ", energy "
      << report.energy.mean << " +- " << report.energy.std_error << "\n";
  out << (report.passed(opts) ? "PASS" : "FAIL") << "\n";
  return report.passed(opts) ? kOk : kValidationFailed;
}

int cmd_sections(const SectionsArgs& args, std::ostream& out) {
  if (args.count < 1) throw Error(ErrorCode::InvalidArgument, "--count must be positive");
  const Domain dom = load_domain_file(args.domain);
  const CurveTrace trace = load_trace_csv(args.trace);
  nlohmann::json list = nlohmann::json::array();
  for (int j = 0; j < args.count; ++j) {
    const double s = trace.start() + (j + 0.5) * trace.length() / args.count;
    nlohmann::json pts = nlohmann::json::array();
    for (const Vector& p : section_outline(dom, trace, s, args.points)) {
      pts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    list.push_back({{"s", s}, {"outline", pts}});
  }
  const fs::path path(args.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_json_file(path, {{"format_version", kFormatVersion}, {"sections", list}});
  out << args.count << " sections written to " << path.string() << "\n";
  return kOk;
}

int cmd_helix(const HelixArgs& args, std::ostream& out) {
  const std::vector<double> as = parse_list(args.a);
  std::vector<std::pair<double, double>> pairs;
  if (args.b.empty()) {
    for (double a : as) {
      const PitchResult p = principal_pitch_search(a, args.r);
      pairs.emplace_back(a, p.found ? p.b : std::nan(""));
    }
  } else {
    const std::vector<double> bs = parse_list(args.b);
    if (args.grid) {
      for (double a : as) {
        for (double b : bs) pairs.emplace_back(a, b);
      }
    } else {
      if (as.size() != bs.size()) {
        throw Error(ErrorCode::ParseError, "--a and --b need equal lengths unless --grid is given");
      }
      for (std::size_t i = 0; i < as.size(); ++i) pairs.emplace_back(as[i], bs[i]);
    }
  }
  std::vector<HelixRow> rows;
  for (const auto& [a, b] : pairs) {
    HelixRow row{a, b, std::nan(""), false};
    if (std::isfinite(b) && b > 0.0) {
      const HelixParams p{a, b, args.r};
      row.residual = std::abs(mean_offset_projection_region(p).u1);
      row.admissible = helix_jacobian_positive(p);
    }
    rows.push_back(row);
  }
  const fs::path path(args.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_helix_csv(f, rows);
  if (!args.traces.empty()) {
    fs::create_directories(args.traces);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!std::isfinite(rows[i].b) || rows[i].b <= 0.0) continue;
      save_trace_csv(fs::path(args.traces) / ("helix_" + std::to_string(i) + ".csv"),
                     helix_trace({rows[i].a, rows[i].b, args.r}, args.periods, args.nodes_per_period));
    }
  }
  for (const HelixRow& r : rows) {
    out << "a=" << r.a << " b=" << r.b << " residual=" << r.residual
        << (r.admissible ? " admissible" : " not admissible") << "\n";
  }
  return kOk;
}

int cmd_square(const SquareArgs& args, std::ostream& out) {
  CurveTrace trace;
  if (!args.trace.empty()) {
    trace = load_trace_csv(args.trace);
  } else {
    SolverConfig cfg;
    cfg.rel_tol = args.rtol;
    cfg.abs_tol = args.atol;
    cfg.max_length = args.length;
    CurveState init;
    init.position = parse_vector(args.x0);
    init.angles = SphericalAngles(Vector::Constant(1, std::numbers::pi / 2.0));
    trace = integrate(make_quadrant(), init, cfg);
  }
  double t = 0.0;
  if (args.t) {
    t = *args.t;
  } else {
    const std::vector<double> zeros = diagonal_direction_zeros(trace);
    if (args.zero_index < 1 || args.zero_index > static_cast<int>(zeros.size())) {
      throw Error(ErrorCode::IncompatibleTruncation,
                  "trace has " + std::to_string(zeros.size()) + " diagonal crossings, asked for #" +
                      std::to_string(args.zero_index));
    }
    t = zeros[static_cast<std::size_t>(args.zero_index - 1)];
  }
  const SquareCurve sq = compose_square(trace, t, args.samples);
  const fs::path path(args.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_square_csv(f, sq);
  out << "t = " << sq.t << ", c = " << sq.c << ", joint gap " << sq.max_gap << ", tangent jump "
      << sq.max_tangent_jump << "\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Principal curves of uniform distributions"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "integrate the principal curve ODE, or emit a reference curve");
  s->add_option("--domain", solve.domain, "domain JSON file");
  s->add_option("--x0", solve.job.x0, "initial point, comma separated");
  s->add_option("--zeta0", solve.job.zeta0, "initial angles, comma separated");
  s->add_option("--tangent", solve.job.tangent, "initial tangent instead of angles");
  s->add_option("--length", solve.length, "arclength budget")->capture_default_str();
  s->add_option("--rtol", solve.rtol)->capture_default_str();
  s->add_option("--atol", solve.atol)->capture_default_str();
  s->add_option("--max-step", solve.max_step)->capture_default_str();
  s->add_option("--out", solve.out, "output directory")->capture_default_str();
  s->add_option("--name", solve.job.name, "file stem")->capture_default_str();
  s->add_option("--sweep", solve.sweep, "JSON array of {name, x0, zeta0|tangent, length}");
  s->add_option("--threads", solve.threads, "sweep workers (0: all cores)");
  s->add_option("--curve", solve.curve,
                "reference curve: arc:R, square-parabola, disk-parabola, helix:a:b[:periods], "
                "segment:P:Q");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "check self-consistency of a trace");
  v->add_option("--domain", val.domain)->required();
  v->add_option("--trace", val.trace, "trace CSV")->required();
  v->add_option("--out", val.out, "report JSON")->capture_default_str();
  v->add_option("--seed", val.seed)->capture_default_str();
  v->add_option("--samples", val.samples)->capture_default_str();
  v->add_option("--nodes", val.nodes)->capture_default_str();
  v->add_option("--residual-points", val.residual_points)->capture_default_str();
  v->add_option("--residual-tol", val.residual_tol)->capture_default_str();
  v->add_option("--barycenter-tol", val.barycenter_tol)->capture_default_str();
  v->add_option("--tie-tol", val.tie_tol)->capture_default_str();
  v->add_option("--trim", val.trim, "drop Voronoi cells this close to the ends (cylinder: r)");

  HelixArgs hx;
  auto* h = app.add_subcommand("helix", "helix offsets and principal pitch search");
  h->add_option("--a", hx.a, "radii, comma separated")->required();
  h->add_option("--b", hx.b, "pitches; omitted: search for the principal pitch");
  h->add_option("--r", hx.r, "cylinder radius")->capture_default_str();
  h->add_flag("--grid", hx.grid, "all (a, b) combinations instead of pairs");
  h->add_option("--out", hx.out, "table CSV")->capture_default_str();
  h->add_option("--traces", hx.traces, "directory for helix traces");
  h->add_option("--periods", hx.periods)->capture_default_str();

  SectionsArgs sc;
  auto* c = app.add_subcommand("sections", "world-coordinate outlines of cross-sections along a trace");
  c->add_option("--domain", sc.domain)->required();
  c->add_option("--trace", sc.trace, "trace CSV")->required();
  c->add_option("--count", sc.count, "cell-centred arclengths")->capture_default_str();
  c->add_option("--points", sc.points, "points on an elliptic outline")->capture_default_str();
  c->add_option("--out", sc.out)->capture_default_str();

  SquareArgs sq;
  auto* q = app.add_subcommand("square-compose", "closed principal curve of the square");
  q->add_option("--trace", sq.trace, "quadrant trace CSV (default: solve from --x0)");
  q->add_option("--x0", sq.x0)->capture_default_str();
  q->add_option("--length", sq.length)->capture_default_str();
  q->add_option("--rtol", sq.rtol)->capture_default_str();
  q->add_option("--atol", sq.atol)->capture_default_str();
  q->add_option("--zero-index", sq.zero_index, "which diagonal crossing closes the triangle")
      ->capture_default_str();
  q->add_option("--t", sq.t, "explicit truncation arclength");
  q->add_option("--samples", sq.samples, "points per piece")->capture_default_str();
  q->add_option("--out", sq.out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kSpecError;
  }

  try {
    if (s->parsed()) return cmd_solve(solve, out, err);
    if (v->parsed()) return cmd_validate(val, out);
    if (h->parsed()) return cmd_helix(hx, out);
    if (q->parsed()) return cmd_square(sq, out);
    if (c->parsed()) return cmd_sections(sc, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InadmissibleStart ? kInadmissible : kSpecError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSpecError;
  }
  return kSpecError;
}

}  // namespace pcurve::cli
