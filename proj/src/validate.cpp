#include "pcurve/validate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "pcurve/error.hpp"
#include "pcurve/moments.hpp"

namespace pcurve {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SegmentMin {
  double s;
  double dist;
  std::size_t seg;
  bool at_left;
  bool at_right;
};

// Newton polish of an interior stationary point of |x - Gamma(s)|^2 on
// (a, b): g(s) = <Gamma(s) - x, T(s)>, g'(s) = 1 + <Gamma(s) - x, T'(s)>.
// Returns the input when the iteration leaves the open segment.
double polish(const CurveTrace& trace, const Vector& x, double s0, double a, double b) {
  double s = s0;
  for (int it = 0; it < 4; ++it) {
    const Vector r = trace.position_at(s) - x;
    const double g = r.dot(trace.tangent_at(s));
    const double dg = 1.0 + r.dot(trace.accel_at(s));
    if (!(dg > 0.0)) return s0;
    const double next = s - g / dg;
    if (!(next > a && next < b)) return s0;
    if (std::abs(next - s) < 1e-15 * (1.0 + std::abs(s))) return next;
    s = next;
  }
  return s;
}

// Per-segment minimizers of |x - Gamma(s)| over every segment that can come
// within `slack` of the best node distance. Distances alone do not need the
// Newton polish of the arclength.
std::vector<SegmentMin> segment_minima(const CurveTrace& trace, const Vector& x, double slack,
                                       std::vector<char>* considered = nullptr,
                                       bool refine_s = true) {
  const std::size_t n = trace.size();
  std::vector<double> node(n);
  double best = kInf;
  for (std::size_t k = 0; k < n; ++k) {
    node[k] = (x - trace.states[k].position).norm();
    best = std::min(best, node[k]);
  }
  std::vector<SegmentMin> out;
  if (n == 1) {
    out.push_back({trace.states[0].s, node[0], 0, true, true});
    return out;
  }
  if (considered != nullptr) considered->assign(n - 1, 0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = trace.states[k].s;
    const double b = trace.states[k + 1].s;
    // Points of the segment are within h/2 of an end node.
    if (std::min(node[k], node[k + 1]) - 0.5 * (b - a) > best + slack) continue;
    if (considered != nullptr) (*considered)[k] = 1;
    auto f = [&](double s) { return (x - trace.position_at(s)).squaredNorm(); };
    auto [sm, fm] = boost::math::tools::brent_find_minima(f, a, b, 40);
    if (refine_s) {
      const double sp = polish(trace, x, sm, a, b);
      const double fp = f(sp);
      if (fp <= fm) {
        sm = sp;
        fm = fp;
      }
    }
    SegmentMin m{sm, std::sqrt(std::max(fm, 0.0)), k, false, false};
    // End nodes win ties, the right one first (sup convention).
    if (node[k + 1] <= m.dist) m = {b, node[k + 1], k, false, true};
    if (node[k] < m.dist) m = {a, node[k], k, true, false};
    out.push_back(m);
    // The curve end is a candidate of its own when the distance does not
    // grow towards it, so total ties resolve to it.
    if (k + 2 == n && !m.at_right) {
      const double slope = (trace.states[k + 1].position - x).dot(trace.tangent(k + 1));
      if (slope <= 1e-12 * (1.0 + x.norm())) out.push_back({b, node[k + 1], k, false, true});
    }
  }
  return out;
}

// Genuine local minima among the per-segment ones: interior minima, curve
// ends, and nodes where both neighbouring segments bottom out. Minima closer
// than `merge` in arclength are one minimum.
std::vector<std::pair<double, double>> local_minima(const std::vector<SegmentMin>& mins,
                                                    const std::vector<char>& considered,
                                                    std::size_t n_nodes, double merge) {
  std::vector<std::pair<double, double>> local;
  for (std::size_t i = 0; i < mins.size(); ++i) {
    const SegmentMin& m = mins[i];
    const std::size_t k = m.seg;
    bool keep = !m.at_left && !m.at_right;
    if (m.at_left) {
      keep = k == 0 || !considered[k - 1] ||
             (i > 0 && mins[i - 1].seg == k - 1 && mins[i - 1].at_right);
    }
    if (m.at_right) {
      keep = k + 2 == n_nodes || !considered[k + 1] ||
             (i + 1 < mins.size() && mins[i + 1].seg == k + 1 && mins[i + 1].at_left);
    }
    if (keep) local.emplace_back(m.s, m.dist);
  }
  std::sort(local.begin(), local.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& c : local) {
    if (!merged.empty() && c.first - merged.back().first < merge) {
      if (c.second <= merged.back().second) merged.back() = c;
    } else {
      merged.push_back(c);
    }
  }
  return merged;
}

// Deterministic sharded Monte-Carlo map; partial results are reduced in
// shard order by the caller.
template <class Partial, class Fn>
std::vector<Partial> run_shards(const Domain& dom, std::int64_t n_samples, std::uint64_t seed,
                                const MonteCarloOptions& opts, Fn fn) {
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  const std::int64_t shard = std::max<std::int64_t>(1, opts.shard_size);
  const std::int64_t n_shards = (n_samples + shard - 1) / shard;
  std::vector<Partial> parts(static_cast<std::size_t>(n_shards));
  std::atomic<std::int64_t> next{0};
  unsigned threads = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, n_shards));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n_shards) return;
      try {
        const std::int64_t count = std::min(shard, n_samples - i * shard);
        const Matrix pts = sample_uniform(dom, count, shard_seed(seed, static_cast<std::uint64_t>(i)),
                                          opts.truncation);
        parts[static_cast<std::size_t>(i)] = fn(pts);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_shards;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return parts;
}

MonteCarloOptions with_truncation(const Domain& dom, const CurveTrace& trace,
                                  MonteCarloOptions opts) {
  if (!opts.truncation && !dom.bounded()) opts.truncation = default_truncation(dom, trace);
  return opts;
}

struct PlanarSample {
  double s;
  Vector position;
  Frame frame;
  Vector kappa;
  CrossSection section;
};

// Parameter ranges t where q + t v lies in the section of plane i.
std::vector<std::pair<double, double>> line_in_section(const PlanarSample& p, const Vector& q,
                                                       const Vector& v) {
  const Matrix n = p.frame.normals();
  const Vector alpha = n.transpose() * (q - p.position);
  const Vector beta = n.transpose() * v;
  std::vector<std::pair<double, double>> out;
  if (const auto* e = std::get_if<SectionEllipse>(&p.section)) {
    const Eigen::Vector2d a = Eigen::Vector2d(alpha) - e->center;
    const Eigen::Vector2d b(beta);
    const double qa = b.dot(e->shape * b);
    const double qb = 2.0 * a.dot(e->shape * b);
    const double qc = a.dot(e->shape * a) - 1.0;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (qa > 0.0 && disc > 0.0) {
      const double r = std::sqrt(disc);
      out.emplace_back((-qb - r) / (2.0 * qa), (-qb + r) / (2.0 * qa));
    }
    return out;
  }
  if (const auto* poly = std::get_if<SectionPolygon>(&p.section)) {
    std::vector<double> cuts;
    const auto& vs = poly->vertices;
    const Point2 a(alpha[0], alpha[1]);
    const Point2 b(beta[0], beta[1]);
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const Point2 e0 = vs[i];
      const Point2 e = vs[(i + 1) % vs.size()] - e0;
      const double den = b.x() * e.y() - b.y() * e.x();
      if (std::abs(den) < 1e-300) continue;
      const Point2 w = e0 - a;
      const double t = (w.x() * e.y() - w.y() * e.x()) / den;
      const double u = (w.x() * b.y() - w.y() * b.x()) / den;
      if (u >= 0.0 && u <= 1.0) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
      const Vector u = alpha + mid * beta;
      if (cuts[i + 1] > cuts[i] && section_contains(p.section, u, 0.0)) {
        out.emplace_back(cuts[i], cuts[i + 1]);
      }
    }
  }
  return out;
}

bool sections_cross(const PlanarSample& a, const PlanarSample& b) {
  const int d = static_cast<int>(a.position.size());
  const double scale = 1.0 + a.position.norm() + b.position.norm();
  if (d == 2) {
    const auto* ia = std::get_if<SectionInterval>(&a.section);
    const auto* ib = std::get_if<SectionInterval>(&b.section);
    if (ia == nullptr || ib == nullptr) return false;
    const Eigen::Vector2d na = a.frame.normal(0);
    const Eigen::Vector2d nb = b.frame.normal(0);
    Eigen::Matrix2d m;
    m << na, -nb;
    if (std::abs(m.determinant()) < 1e-12) return false;
    const Eigen::Vector2d uw = m.partialPivLu().solve(Eigen::Vector2d(b.position - a.position));
    const double tol = 1e-9 * scale;
    return uw[0] > ia->lower + tol && uw[0] < ia->upper - tol && uw[1] > ib->lower + tol &&
           uw[1] < ib->upper - tol;
  }
  if (d != 3) return false;
  const Eigen::Vector3d ta = a.frame.tangent();
  const Eigen::Vector3d tb = b.frame.tangent();
  const Eigen::Vector3d v = ta.cross(tb);
  if (v.norm() < 1e-12) return false;
  Eigen::Matrix3d sys;
  sys.row(0) = ta.transpose();
  sys.row(1) = tb.transpose();
  sys.row(2) = v.transpose();
  const Eigen::Vector3d rhs(ta.dot(Eigen::Vector3d(a.position)), tb.dot(Eigen::Vector3d(b.position)), 0.0);
  const Vector q = Eigen::Vector3d(sys.partialPivLu().solve(rhs));
  const Vector dir = v.normalized();
  const auto ra = line_in_section(a, q, dir);
  const auto rb = line_in_section(b, q, dir);
  const double tol = 1e-9 * scale;
  for (const auto& x : ra) {
    for (const auto& y : rb) {
      if (std::min(x.second, y.second) - std::max(x.first, y.first) > tol) return true;
    }
  }
  return false;
}

}  // namespace

std::uint64_t shard_seed(std::uint64_t master, std::uint64_t shard) {
  // splitmix64 finalizer over the (master, shard) pair
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (shard + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double projection_index(const CurveTrace& trace, const Vector& x, double tie_tol) {
  if (trace.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  std::vector<char> considered;
  const auto mins = segment_minima(trace, x, tie_tol, &considered);
  const auto local = local_minima(mins, considered, trace.size(), 1e-7 * (1.0 + trace.length()));
  double best = kInf;
  for (const auto& c : local) best = std::min(best, c.second);
  double s = -kInf;
  for (const auto& c : local) {
    if (c.second <= best + tie_tol) s = c.first;  // sorted by s: the last tie wins
  }
  return s;
}

double distance_to_curve(const CurveTrace& trace, const Vector& x) {
  if (trace.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  double best = kInf;
  for (const SegmentMin& m : segment_minima(trace, x, 0.0, nullptr, false)) best = std::min(best, m.dist);
  return best;
}

std::vector<std::pair<double, double>> self_consistency_residual(const Domain& dom,
                                                                 const CurveTrace& trace, int n_s) {
  if (n_s < 1) throw Error(ErrorCode::InvalidArgument, "need at least one residual point");
  if (trace.size() < 2) throw Error(ErrorCode::InvalidArgument, "trace needs two states");
  std::vector<std::pair<double, double>> out;
  for (int j = 0; j < n_s; ++j) {
    const double s = trace.start() + (j + 0.5) * trace.length() / n_s;
    try {
      const Vector x = trace.position_at(s);
      const Frame f = normalized_frame(angles_from_tangent(trace.tangent_at(s)));
      const Vector kappa = f.normals().transpose() * trace.accel_at(s);
      const MomentSet m = section_moments(cross_section(dom, x, f));
      out.emplace_back(s, weighted_first_moment(m, kappa).norm());
    } catch (const Error& e) {
      throw e.at(s);
    }
  }
  return out;
}

std::vector<BarycenterCell> voronoi_barycenters(const Domain& dom, const CurveTrace& trace,
                                                int n_nodes, std::int64_t n_samples,
                                                std::uint64_t seed, const VoronoiOptions& opts) {
  if (n_nodes < 2) throw Error(ErrorCode::InvalidArgument, "need at least two nodes");
  if (trace.size() < 2) throw Error(ErrorCode::InvalidArgument, "trace needs two states");
  const int d = dom.dim();
  std::vector<double> node_s(n_nodes);
  Matrix nodes(d, n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    node_s[k] = trace.start() + (k + 0.5) * trace.length() / n_nodes;
    nodes.col(k) = trace.position_at(node_s[k]);
  }
  struct Partial {
    std::vector<long> count;
    Matrix sum;
    std::vector<double> sq;
  };
  const MonteCarloOptions mc = with_truncation(dom, trace, opts);
  const auto parts = run_shards<Partial>(dom, n_samples, seed, mc, [&](const Matrix& pts) {
    Partial p{std::vector<long>(n_nodes, 0), Matrix::Zero(d, n_nodes), std::vector<double>(n_nodes, 0.0)};
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      int best = 0;
      double best_d = kInf;
      for (int k = 0; k < n_nodes; ++k) {
        const double dk = (nodes.col(k) - pts.col(j)).squaredNorm();
        if (dk <= best_d) {
          best_d = dk;
          best = k;
        }
      }
      ++p.count[best];
      p.sum.col(best) += pts.col(j);
      p.sq[best] += pts.col(j).squaredNorm();
    }
    return p;
  });
  std::vector<long> count(n_nodes, 0);
  Matrix sum = Matrix::Zero(d, n_nodes);
  std::vector<double> sq(n_nodes, 0.0);
  for (const Partial& p : parts) {
    for (int k = 0; k < n_nodes; ++k) {
      count[k] += p.count[k];
      sq[k] += p.sq[k];
    }
    sum += p.sum;
  }
  std::vector<BarycenterCell> out;
  for (int k = 0; k < n_nodes; ++k) {
    if (node_s[k] < trace.start() + opts.trim_length || node_s[k] > trace.end() - opts.trim_length) {
      continue;
    }
    BarycenterCell c;
    c.node = k;
    c.s = node_s[k];
    c.count = count[k];
    if (count[k] > 0) {
      const double n = static_cast<double>(count[k]);
      c.barycenter = sum.col(k) / n;
      c.distance = distance_to_curve(trace, c.barycenter);
      c.node_distance = (c.barycenter - nodes.col(k)).norm();
      const double var = std::max(0.0, sq[k] / n - c.barycenter.squaredNorm());
      c.std_error = std::sqrt(var / n);
    }
    out.push_back(c);
  }
  return out;
}

Estimate energy(const Domain& dom, const CurveTrace& trace, std::int64_t n_samples,
                std::uint64_t seed, const MonteCarloOptions& opts) {
  if (trace.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  struct Partial {
    double sum = 0.0;
    double sq = 0.0;
    std::int64_t n = 0;
  };
  const MonteCarloOptions mc = with_truncation(dom, trace, opts);
  const auto parts = run_shards<Partial>(dom, n_samples, seed, mc, [&](const Matrix& pts) {
    Partial p;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      const double d = distance_to_curve(trace, pts.col(j));
      p.sum += d * d;
      p.sq += d * d * d * d;
      ++p.n;
    }
    return p;
  });
  Partial total;
  for (const Partial& p : parts) {
    total.sum += p.sum;
    total.sq += p.sq;
    total.n += p.n;
  }
  Estimate e;
  e.n = total.n;
  e.mean = total.sum / static_cast<double>(total.n);
  const double var = std::max(0.0, total.sq / static_cast<double>(total.n) - e.mean * e.mean);
  e.std_error = std::sqrt(var / static_cast<double>(total.n));
  return e;
}

Admissibility admissibility_check(const Domain& dom, const CurveTrace& trace, int n_s) {
  Admissibility out;
  if (n_s < 1) throw Error(ErrorCode::InvalidArgument, "need at least one section");
  if (trace.size() < 2) throw Error(ErrorCode::InvalidArgument, "trace needs two states");
  std::vector<PlanarSample> samples;
  for (int j = 0; j < n_s; ++j) {
    const double s = trace.start() + (j + 0.5) * trace.length() / n_s;
    const Vector x = trace.position_at(s);
    const Frame f = normalized_frame(angles_from_tangent(trace.tangent_at(s)));
    const Vector kappa = f.normals().transpose() * trace.accel_at(s);
    try {
      CrossSection section = cross_section(dom, x, f);
      const double load = section_support(section, kappa);
      out.max_jacobian_load = std::max(out.max_jacobian_load, load);
      // Touching zero on the section boundary is allowed.
      if (load > 1.0 + 1e-9) {
        out.ok = false;
        out.reason = std::string(to_string(ErrorCode::JacobianSignViolation));
        out.s = s;
        return out;
      }
      samples.push_back(PlanarSample{s, x, f, kappa, std::move(section)});
    } catch (const Error& e) {
      out.ok = false;
      out.reason = std::string(to_string(e.code()));
      out.s = s;
      return out;
    }
  }
  for (std::size_t j = 1; j < samples.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (sections_cross(samples[i], samples[j])) {
        out.ok = false;
        out.reason = "NormalSectionsIntersect";
        out.s = samples[i].s;
        return out;
      }
    }
  }
  return out;
}

double ambiguity_fraction(const Domain& dom, const CurveTrace& trace, std::int64_t n_samples,
                          std::uint64_t seed, double tie_tol, const MonteCarloOptions& opts) {
  if (trace.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  if (!(tie_tol > 0.0)) return 0.0;
  const double merge = 1e-7 * (1.0 + trace.length());
  struct Partial {
    std::int64_t hits = 0;
    std::int64_t n = 0;
  };
  const MonteCarloOptions mc = with_truncation(dom, trace, opts);
  const auto parts = run_shards<Partial>(dom, n_samples, seed, mc, [&](const Matrix& pts) {
    Partial p;
    std::vector<char> considered;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      ++p.n;
      const auto mins = segment_minima(trace, pts.col(j), tie_tol, &considered);
      std::vector<double> dists;
      for (const auto& c : local_minima(mins, considered, trace.size(), merge)) dists.push_back(c.second);
      if (dists.size() >= 2) {
        std::partial_sort(dists.begin(), dists.begin() + 2, dists.end());
        if (dists[1] - dists[0] < tie_tol) ++p.hits;
      }
    }
    return p;
  });
  Partial total;
  for (const Partial& p : parts) {
    total.hits += p.hits;
    total.n += p.n;
  }
  return static_cast<double>(total.hits) / static_cast<double>(total.n);
}

std::optional<Truncation> default_truncation(const Domain& dom, const CurveTrace& trace) {
  if (dom.bounded() || trace.empty()) return std::nullopt;
  double lo = kInf;
  double hi = -kInf;
  for (const CurveState& st : trace.states) {
    const Vector c = dom.to_canonical(st.position);
    if (std::holds_alternative<Cylinder>(dom.shape())) {
      lo = std::min(lo, c[2]);
      hi = std::max(hi, c[2]);
    } else {
      lo = 0.0;
      hi = std::max(hi, c.maxCoeff());
    }
  }
  if (!(hi > lo)) throw Error(ErrorCode::MissingTruncation, "trace does not span a truncation range");
  return Truncation{lo, hi};
}

double ValidationReport::max_residual() const {
  double m = 0.0;
  for (const auto& r : residuals) m = std::max(m, r.second);
  return m;
}

double ValidationReport::max_barycenter_distance() const {
  double m = 0.0;
  for (const auto& c : barycenters) {
    if (c.count > 0) m = std::max(m, c.distance);
  }
  return m;
}

bool ValidationReport::passed(const ValidationOptions& opts) const {
  return admissible.ok && max_residual() <= opts.residual_tol &&
         max_barycenter_distance() <= opts.barycenter_tol;
}

ValidationReport run_validation(const Domain& dom, const CurveTrace& trace,
                                const ValidationOptions& opts) {
  ValidationReport r;
  r.admissible = admissibility_check(dom, trace, opts.residual_points);
  try {
    r.residuals = self_consistency_residual(dom, trace, opts.residual_points);
  } catch (const Error& e) {
    if (r.admissible.ok) {
      r.admissible = Admissibility{false, std::string(to_string(e.code())), e.arclength().value_or(0.0), 0.0};
    }
  }
  VoronoiOptions vo;
  vo.truncation = opts.truncation ? opts.truncation : default_truncation(dom, trace);
  vo.trim_length = opts.trim_length;
  r.barycenters = voronoi_barycenters(dom, trace, opts.nodes, opts.samples, opts.seed, vo);
  MonteCarloOptions mc;
  mc.truncation = vo.truncation;
  r.energy = energy(dom, trace, opts.samples, opts.seed + 1, mc);
  r.ambiguity = ambiguity_fraction(dom, trace, opts.samples, opts.seed + 2, opts.tie_tol, mc);
  return r;
}

std::vector<Vector> section_outline(const Domain& dom, const CurveTrace& trace, double s, int n_points) {
  if (n_points < 3) throw Error(ErrorCode::InvalidArgument, "need at least three outline points");
  const Vector x = trace.position_at(s);
  const Frame f = normalized_frame(angles_from_tangent(trace.tangent_at(s)));
  const Matrix n = f.normals();
  std::vector<Vector> out;
  try {
    const CrossSection section = cross_section(dom, x, f);
    if (const auto* iv = std::get_if<SectionInterval>(&section)) {
      out.push_back(x + n.col(0) * iv->lower);
      out.push_back(x + n.col(0) * iv->upper);
    } else if (const auto* poly = std::get_if<SectionPolygon>(&section)) {
      for (const Point2& v : poly->vertices) out.push_back(x + n * v);
    } else {
      const auto& e = std::get<SectionEllipse>(section);
      // (u - c) = L^{-T} w with |w| = 1, where shape = L L^T.
      const Eigen::Matrix2d lt = e.shape.llt().matrixU();
      for (int i = 0; i < n_points; ++i) {
        const double a = 2 * std::numbers::pi * i / n_points;
        const Point2 u = e.center + lt.triangularView<Eigen::Upper>().solve(Point2(std::cos(a), std::sin(a)));
        out.push_back(x + n * u);
      }
    }
  } catch (const Error& e) {
    throw e.at(s);
  }
  return out;
}

}  // namespace pcurve
