#include "pcurve/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pcurve/error.hpp"

namespace pcurve {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view tok) {
  while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\r')) tok.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(tok) + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

// Skips the version comment, checking it when present.
std::string read_header(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("format_version=");
      if (pos != std::string::npos) {
        const int v = std::atoi(line.c_str() + pos + 15);
        if (v != kFormatVersion) {
          throw Error(ErrorCode::ParseError, "unsupported format_version " + std::to_string(v));
        }
      }
      continue;
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }
  throw Error(ErrorCode::ParseError, "missing CSV header");
}

}  // namespace

void write_trace_csv(std::ostream& out, const CurveTrace& trace) {
  const int d = trace.dim();
  out << "# format_version=" << kFormatVersion << "\n";
  out << "s";
  for (int i = 1; i <= d; ++i) out << ",x" << i;
  for (int i = 1; i < d; ++i) out << ",zeta" << i;
  for (int i = 1; i < d; ++i) out << ",kappa" << i;
  out << "\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const CurveState& st = trace.states[k];
    out << fmt(st.s);
    for (int i = 0; i < d; ++i) out << ',' << fmt(st.position[i]);
    for (int i = 0; i < d - 1; ++i) out << ',' << fmt(st.angles.angles[i]);
    for (int i = 0; i < d - 1; ++i) out << ',' << fmt(trace.kappas[k].kappa[i]);
    out << "\n";
  }
}

CurveTrace read_trace_csv(std::istream& in) {
  const std::vector<std::string> head = split(read_header(in));
  const int cols = static_cast<int>(head.size());
  if (cols < 4 || (cols + 1) % 3 != 0 || head[0] != "s") {
    throw Error(ErrorCode::ParseError, "unexpected trace header");
  }
  const int d = (cols + 1) / 3;
  for (int i = 1; i <= d; ++i) {
    if (head[i] != "x" + std::to_string(i)) throw Error(ErrorCode::ParseError, "bad column " + head[i]);
  }
  CurveTrace trace;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    const auto tok = split(line);
    if (static_cast<int>(tok.size()) != cols) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + " has wrong width");
    }
    CurveState st;
    st.s = parse_double(tok[0]);
    st.position = Vector(d);
    Vector z(d - 1);
    Curvatures kap{Vector(d - 1)};
    for (int i = 0; i < d; ++i) st.position[i] = parse_double(tok[1 + i]);
    for (int i = 0; i < d - 1; ++i) z[i] = parse_double(tok[1 + d + i]);
    for (int i = 0; i < d - 1; ++i) kap.kappa[i] = parse_double(tok[2 * d + i]);
    st.angles = SphericalAngles(z);
    trace.append(st, kap);
  }
  if (trace.empty()) throw Error(ErrorCode::ParseError, "trace has no rows");
  trace.meta.stop_s = trace.end();
  trace.meta.accepted = static_cast<long>(trace.size()) - 1;
  return trace;
}

void save_trace_csv(const std::filesystem::path& path, const CurveTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_trace_csv(out, trace);
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

CurveTrace load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return read_trace_csv(in);
}

nlohmann::json trace_sidecar(const CurveTrace& trace, const SolverConfig& cfg) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["config"] = {{"rel_tol", cfg.rel_tol},
                 {"abs_tol", cfg.abs_tol},
                 {"initial_step", cfg.initial_step},
                 {"max_step", cfg.max_step},
                 {"min_step", cfg.min_step},
                 {"max_length", cfg.max_length},
                 {"singularity_threshold", cfg.singularity_threshold},
                 {"stop_on_boundary", cfg.stop_on_boundary},
                 {"max_steps", cfg.max_steps}};
  nlohmann::json restarts = nlohmann::json::array();
  for (const Restart& r : trace.restarts) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.rotation.rows(); ++i) {
      std::vector<double> row(r.rotation.cols());
      for (Eigen::Index c = 0; c < r.rotation.cols(); ++c) row[c] = r.rotation(i, c);
      rows.push_back(row);
    }
    restarts.push_back({{"s", r.s}, {"rotation", rows}});
  }
  j["restarts"] = restarts;
  j["stop"] = {{"reason", trace.meta.stop_reason},
               {"message", trace.meta.stop_message},
               {"s", trace.meta.stop_s},
               {"clean", trace.meta.clean_stop()}};
  j["stats"] = {{"accepted", trace.meta.accepted},
                {"rejected", trace.meta.rejected},
                {"rhs_evals", trace.meta.rhs_evals},
                {"rows", trace.size()}};
  return j;
}

nlohmann::json report_to_json(const ValidationReport& report) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  nlohmann::json res = nlohmann::json::array();
  for (const auto& [s, v] : report.residuals) res.push_back({s, v});
  j["residuals"] = res;
  nlohmann::json bary = nlohmann::json::array();
  for (const BarycenterCell& c : report.barycenters) {
    nlohmann::json cell = {{"node", c.node},     {"s", c.s},
                           {"distance", c.distance}, {"count", c.count},
                           {"stderr", c.std_error}};
    if (c.count > 0) cell["barycenter"] = std::vector<double>(c.barycenter.begin(), c.barycenter.end());
    bary.push_back(cell);
  }
  j["barycenters"] = bary;
  j["energy"] = {{"mean", report.energy.mean},
                 {"stderr", report.energy.std_error},
                 {"n", report.energy.n}};
  j["ambiguity"] = report.ambiguity;
  j["admissible"] = {{"ok", report.admissible.ok},
                     {"reason", report.admissible.reason},
                     {"s", report.admissible.s},
                     {"max_jacobian_load", report.admissible.max_jacobian_load}};
  j["max_residual"] = report.max_residual();
  j["max_barycenter_distance"] = report.max_barycenter_distance();
  return j;
}

void write_helix_csv(std::ostream& out, const std::vector<HelixRow>& rows) {
  out << "# format_version=" << kFormatVersion << "\n";
  out << "a,b,residual,admissible\n";
  for (const HelixRow& r : rows) {
    out << fmt(r.a) << ',' << fmt(r.b) << ',' << fmt(r.residual) << ',' << (r.admissible ? 1 : 0)
        << "\n";
  }
}

std::vector<HelixRow> read_helix_csv(std::istream& in) {
  if (read_header(in) != "a,b,residual,admissible") {
    throw Error(ErrorCode::ParseError, "unexpected helix header");
  }
  std::vector<HelixRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tok = split(line);
    if (tok.size() != 4) throw Error(ErrorCode::ParseError, "helix row needs 4 fields");
    rows.push_back({parse_double(tok[0]), parse_double(tok[1]), parse_double(tok[2]),
                    parse_double(tok[3]) != 0.0});
  }
  return rows;
}

void write_polyline_csv(std::ostream& out, const std::vector<Vector>& points) {
  out << "# format_version=" << kFormatVersion << "\n";
  const int d = points.empty() ? 0 : static_cast<int>(points.front().size());
  out << "t";
  for (int i = 1; i <= d; ++i) out << ",x" << i;
  out << "\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    out << k;
    for (int i = 0; i < d; ++i) out << ',' << fmt(points[k][i]);
    out << "\n";
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

Vector parse_vector(const std::string& text) {
  const auto tok = split(text);
  if (tok.empty()) throw Error(ErrorCode::ParseError, "empty vector");
  Vector v(static_cast<Eigen::Index>(tok.size()));
  for (std::size_t i = 0; i < tok.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(tok[i]);
  return v;
}

}  // namespace pcurve
