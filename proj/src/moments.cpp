#include "pcurve/moments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "pcurve/error.hpp"

namespace pcurve {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

MomentSet zero_moments(int k) {
  return MomentSet{0.0, Vector::Zero(k), Matrix::Zero(k, k)};
}

// Moments about the origin from moments about `shift`.
MomentSet shift_moments(const MomentSet& local, const Vector& shift) {
  MomentSet out = local;
  out.first = local.first + local.mu0 * shift;
  out.second = local.second + shift * local.first.transpose() + local.first * shift.transpose() +
               local.mu0 * shift * shift.transpose();
  return out;
}

double cross2(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Running sums for the quadrature oracle.
struct Accumulator {
  explicit Accumulator(int k) : m(zero_moments(k)) {}
  MomentSet m;

  void add(const Vector& u, double w) {
    m.mu0 += w;
    m.first += w * u;
    m.second += w * u * u.transpose();
  }
  void add(const Accumulator& o) {
    m.mu0 += o.m.mu0;
    m.first += o.m.first;
    m.second += o.m.second;
  }
  double distance(const Accumulator& o) const {
    return std::abs(m.mu0 - o.m.mu0) + (m.first - o.m.first).cwiseAbs().sum() +
           (m.second - o.m.second).cwiseAbs().sum();
  }
  double size() const {
    return std::abs(m.mu0) + m.first.cwiseAbs().sum() + m.second.cwiseAbs().sum();
  }
};

struct Integrand {
  const Density& density;
  const std::optional<Vector>& kappa;

  double operator()(const Vector& u) const {
    double f = density ? density(u) : 1.0;
    if (kappa) f *= 1.0 - kappa->dot(u);
    return f;
  }
};

constexpr int kIntervalOrder = 10;
constexpr int kTriangleOrder = 8;

Accumulator interval_rule(double lo, double hi, const Integrand& f) {
  const GaussRule& g = gauss_legendre(kIntervalOrder);
  Accumulator acc(1);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  Vector u(1);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    u[0] = mid + half * g.nodes[i];
    acc.add(u, half * g.weights[i] * f(u));
  }
  return acc;
}

Accumulator interval_adaptive(double lo, double hi, const Integrand& f, const Accumulator& coarse,
                              double tol, int depth, int max_depth) {
  const double mid = 0.5 * (lo + hi);
  Accumulator left = interval_rule(lo, mid, f);
  Accumulator right = interval_rule(mid, hi, f);
  Accumulator fine = left;
  fine.add(right);
  if (coarse.distance(fine) <= tol) return fine;
  if (depth >= max_depth) {
    throw Error(ErrorCode::NonConvergence, "interval quadrature did not converge");
  }
  Accumulator out = interval_adaptive(lo, mid, f, left, 0.5 * tol, depth + 1, max_depth);
  out.add(interval_adaptive(mid, hi, f, right, 0.5 * tol, depth + 1, max_depth));
  return out;
}

// Collapsed-square (Duffy) tensor rule on a triangle.
Accumulator triangle_rule(const std::array<Point2, 3>& t, const Integrand& f) {
  const GaussRule& g = gauss_legendre(kTriangleOrder);
  const Point2 e1 = t[1] - t[0];
  const Point2 e2 = t[2] - t[0];
  const double jac = std::abs(cross2(e1, e2));
  Accumulator acc(2);
  Vector u(2);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double x = 0.5 * (g.nodes[i] + 1.0);
    for (std::size_t j = 0; j < g.nodes.size(); ++j) {
      const double y = 0.5 * (g.nodes[j] + 1.0) * (1.0 - x);
      const Point2 p = t[0] + x * e1 + y * e2;
      u << p.x(), p.y();
      const double w = 0.25 * g.weights[i] * g.weights[j] * (1.0 - x) * jac;
      acc.add(u, w * f(u));
    }
  }
  return acc;
}

std::array<std::array<Point2, 3>, 4> split_triangle(const std::array<Point2, 3>& t) {
  const Point2 m01 = 0.5 * (t[0] + t[1]);
  const Point2 m12 = 0.5 * (t[1] + t[2]);
  const Point2 m20 = 0.5 * (t[2] + t[0]);
  return {{{t[0], m01, m20}, {m01, t[1], m12}, {m20, m12, t[2]}, {m01, m12, m20}}};
}

Accumulator triangle_adaptive(const std::array<Point2, 3>& t, const Integrand& f,
                              const Accumulator& coarse, double tol, int depth, int max_depth) {
  const auto kids = split_triangle(t);
  std::array<Accumulator, 4> parts{Accumulator(2), Accumulator(2), Accumulator(2), Accumulator(2)};
  Accumulator fine(2);
  for (int i = 0; i < 4; ++i) {
    parts[i] = triangle_rule(kids[i], f);
    fine.add(parts[i]);
  }
  if (coarse.distance(fine) <= tol) return fine;
  if (depth >= max_depth) {
    throw Error(ErrorCode::NonConvergence, "triangle quadrature did not converge");
  }
  Accumulator out(2);
  for (int i = 0; i < 4; ++i) {
    out.add(triangle_adaptive(kids[i], f, parts[i], 0.25 * tol, depth + 1, max_depth));
  }
  return out;
}

Accumulator ellipse_rule(const SectionEllipse& e, int level, const Integrand& f) {
  const int n_rho = 8 + 4 * level;
  const int n_theta = 16 + 8 * level;
  const GaussRule& g = gauss_legendre(n_rho);
  // u = c + L^{-T} z with Q = L L^T, |z| <= 1.
  const Eigen::Matrix2d l = e.shape.llt().matrixL();
  const Eigen::Matrix2d map = l.transpose().inverse();
  const double jac = map.determinant();
  Accumulator acc(2);
  Vector u(2);
  const double dtheta = 2.0 * std::numbers::pi / n_theta;
  for (int j = 0; j < n_theta; ++j) {
    const double th = (j + 0.5) * dtheta;
    const Point2 dir(std::cos(th), std::sin(th));
    for (int i = 0; i < n_rho; ++i) {
      const double rho = 0.5 * (g.nodes[i] + 1.0);
      const Point2 p = e.center + map * (rho * dir);
      u << p.x(), p.y();
      acc.add(u, 0.5 * g.weights[i] * rho * dtheta * jac * f(u));
    }
  }
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------

MomentSet moments_interval(double u_minus, double u_plus) {
  if (!(u_plus > u_minus)) {
    throw Error(ErrorCode::DegenerateInterval, "interval needs u_minus < u_plus");
  }
  MomentSet m = zero_moments(1);
  m.mu0 = u_plus - u_minus;
  // Centered form avoids cancellation for narrow, far-off intervals.
  const double c = 0.5 * (u_plus + u_minus);
  const double h = 0.5 * m.mu0;
  m.first[0] = m.mu0 * c;
  m.second(0, 0) = m.mu0 * (c * c + h * h / 3.0);
  return m;
}

PartialMoments partial_moments(double a, double b, double c, double d, double v1, double v2) {
  if (!(v2 > v1)) throw Error(ErrorCode::InvertedBounds, "strip needs v1 < v2");
  const double scale = 1.0 + std::abs(a) + std::abs(c) + (std::abs(b) + std::abs(d)) * std::max(std::abs(v1), std::abs(v2));
  const double tol = 1e-12 * scale;
  if (a + b * v1 > c + d * v1 + tol || a + b * v2 > c + d * v2 + tol) {
    throw Error(ErrorCode::InvertedBounds, "lower bound exceeds upper bound on the strip");
  }
  // D_n = v2^n - v1^n
  const double d1 = v2 - v1;
  const double d2 = v2 * v2 - v1 * v1;
  const double d3 = v2 * v2 * v2 - v1 * v1 * v1;
  const double d4 = v2 * v2 * v2 * v2 - v1 * v1 * v1 * v1;
  PartialMoments p;
  p.m00 = (c - a) * d1 + (d - b) * d2 / 2.0;
  p.m10 = (c - a) * d2 / 2.0 + (d - b) * d3 / 3.0;
  p.m20 = (c - a) * d3 / 3.0 + (d - b) * d4 / 4.0;
  p.m01 = 0.5 * ((c * c - a * a) * d1 + (c * d - a * b) * d2 + (d * d - b * b) * d3 / 3.0);
  p.m11 = 0.5 * ((c * c - a * a) * d2 / 2.0 + 2.0 * (c * d - a * b) * d3 / 3.0 +
                 (d * d - b * b) * d4 / 4.0);
  p.m02 = ((c * c * c - a * a * a) * d1 + 1.5 * (c * c * d - a * a * b) * d2 +
           (c * d * d - a * b * b) * d3 + (d * d * d - b * b * b) * d4 / 4.0) /
          3.0;
  return p;
}

MomentSet moments_polygon(const SectionPolygon& section) {
  const auto& v = section.vertices;
  if (v.size() < 3 || std::abs(polygon_signed_area(v)) < 1e-14) {
    throw Error(ErrorCode::DegeneratePolygon, "polygon has zero area");
  }
  Point2 shift = Point2::Zero();
  for (const Point2& p : v) shift += p;
  shift /= static_cast<double>(v.size());
  std::vector<Point2> local;
  local.reserve(v.size());
  for (const Point2& p : v) local.push_back(p - shift);

  std::vector<double> breaks;
  for (const Point2& p : local) breaks.push_back(p.x());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // Each edge is kept as its u2 values at the strip ends; the strip is
  // integrated in coordinates centred at its lower-left corner, so steep
  // edges over narrow strips do not cancel.
  struct Edge {
    double y1;  // u2 at v1
    double y2;  // u2 at v2
  };
  MomentSet m = zero_moments(2);
  const std::size_t n = local.size();
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double v1 = breaks[s];
    const double v2 = breaks[s + 1];
    const double w = v2 - v1;
    std::vector<std::pair<double, Edge>> crossing;
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& p = local[i];
      const Point2& q = local[(i + 1) % n];
      const double lo = std::min(p.x(), q.x());
      const double hi = std::max(p.x(), q.x());
      if (!(lo <= v1 && hi >= v2) || hi == lo) continue;
      const auto at = [&](double t) { return p.y() + (q.y() - p.y()) * ((t - p.x()) / (q.x() - p.x())); };
      const Edge e{at(v1), at(v2)};
      crossing.emplace_back(0.5 * (e.y1 + e.y2), e);
    }
    std::sort(crossing.begin(), crossing.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    if (crossing.size() % 2 != 0) {
      throw Error(ErrorCode::DegeneratePolygon, "polygon strip has an odd edge count");
    }
    for (std::size_t k = 0; k + 1 < crossing.size(); k += 2) {
      const Edge& bot = crossing[k].second;
      const Edge& top = crossing[k + 1].second;
      const double y0 = bot.y1;
      const PartialMoments p = partial_moments(0.0, (bot.y2 - y0) / w, top.y1 - y0,
                                               (top.y2 - top.y1) / w, 0.0, w);
      MomentSet strip = zero_moments(2);
      strip.mu0 = p.m00;
      strip.first << p.m10, p.m01;
      strip.second << p.m20, p.m11, p.m11, p.m02;
      const MomentSet placed = shift_moments(strip, Vector(Eigen::Vector2d(v1, y0)));
      m.mu0 += placed.mu0;
      m.first += placed.first;
      m.second += placed.second;
    }
  }
  m.second(1, 0) = m.second(0, 1);
  return shift_moments(m, Vector(shift));
}

MomentSet moments_ellipse(const SectionEllipse& e, const std::optional<Vector>& kappa) {
  const double det = e.shape.determinant();
  if (!(det > 0.0) || !(e.shape.trace() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ellipse shape must be positive definite");
  }
  const double area = std::numbers::pi / std::sqrt(det);
  const Eigen::Matrix2d sigma = e.shape.inverse() / 4.0;
  const Vector c = e.center;
  MomentSet m = zero_moments(2);
  m.mu0 = area;
  m.first = area * c;
  m.second = area * (Matrix(sigma) + c * c.transpose());
  if (!kappa) return m;

  const Vector& k = *kappa;
  if (k.size() != 2) throw Error(ErrorCode::DimensionMismatch, "ellipse weight needs 2 curvatures");
  const double max_ku = k.dot(c) + std::sqrt(k.dot(e.shape.inverse() * k));
  if (max_ku > 1.0) {
    throw Error(ErrorCode::JacobianSignViolation, "1 - <kappa, u> changes sign on the ellipse");
  }
  // Third raw moments of the uniform ellipse (central third moments vanish):
  // M_ijl = area (c_i c_j c_l + c_i S_jl + c_j S_il + c_l S_ij).
  MomentSet w = m;
  w.mu0 = m.mu0 - k.dot(m.first);
  w.first = m.first - m.second * k;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int l = 0; l < 2; ++l) {
        const double third = area * (c[i] * c[j] * c[l] + c[i] * sigma(j, l) + c[j] * sigma(i, l) +
                                     c[l] * sigma(i, j));
        s += k[l] * third;
      }
      w.second(i, j) = m.second(i, j) - s;
    }
  }
  return w;
}

MomentSet section_moments(const CrossSection& section) {
  return std::visit(overloaded{
                        [](const SectionInterval& iv) { return moments_interval(iv.lower, iv.upper); },
                        [](const SectionPolygon& p) { return moments_polygon(p); },
                        [](const SectionEllipse& e) { return moments_ellipse(e); },
                    },
                    section);
}

MomentSet moments_quadrature(const CrossSection& section, const Density& density,
                             const std::optional<Vector>& jacobian_weight,
                             const QuadratureOptions& opts) {
  const Integrand f{density, jacobian_weight};
  return std::visit(
      overloaded{
          [&](const SectionInterval& iv) {
            if (!(iv.upper > iv.lower)) {
              throw Error(ErrorCode::DegenerateInterval, "interval needs u_minus < u_plus");
            }
            const Accumulator coarse = interval_rule(iv.lower, iv.upper, f);
            const double tol = opts.rel_tol * std::max(coarse.size(), 1e-300);
            return interval_adaptive(iv.lower, iv.upper, f, coarse, tol, 0, opts.max_levels).m;
          },
          [&](const SectionPolygon& p) {
            const auto tris = triangulate(p.vertices);
            std::vector<Accumulator> coarse;
            Accumulator total(2);
            for (const auto& t : tris) {
              coarse.push_back(triangle_rule(t, f));
              total.add(coarse.back());
            }
            const double area = std::abs(polygon_signed_area(p.vertices));
            const double tol = opts.rel_tol * std::max(total.size(), 1e-300);
            Accumulator out(2);
            for (std::size_t i = 0; i < tris.size(); ++i) {
              const double share = std::abs(cross2(tris[i][1] - tris[i][0], tris[i][2] - tris[i][0])) / (2.0 * area);
              out.add(triangle_adaptive(tris[i], f, coarse[i], tol * share, 0, opts.max_levels));
            }
            return out.m;
          },
          [&](const SectionEllipse& e) {
            Accumulator prev = ellipse_rule(e, 0, f);
            for (int level = 1; level <= opts.max_levels; ++level) {
              Accumulator next = ellipse_rule(e, level, f);
              if (next.distance(prev) <= opts.rel_tol * next.size()) return next.m;
              prev = next;
            }
            throw Error(ErrorCode::NonConvergence, "ellipse quadrature did not converge");
          },
      },
      section);
}

Curvatures gram_solve(const MomentSet& m) {
  const Eigen::Index k = m.first.size();
  if (m.second.rows() != k || m.second.cols() != k) {
    throw Error(ErrorCode::DimensionMismatch, "moment set sizes disagree");
  }
  const Eigen::LLT<Matrix> llt(m.second);
  if (llt.info() != Eigen::Success || !(gram_condition(m) < 1e14)) {
    throw Error(ErrorCode::SingularGram, "Gram matrix of the section is singular");
  }
  Curvatures out{llt.solve(m.first)};
  const double res = (m.second * out.kappa - m.first).norm();
  if (!(res <= 1e-10 * std::max(m.first.norm(), 1e-300) || res <= 1e-14 * m.second.norm())) {
    throw Error(ErrorCode::SingularGram, "Gram solve residual too large");
  }
  return out;
}

double gram_condition(const MomentSet& m) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(m.second, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Vector weighted_first_moment(const MomentSet& m, const Vector& kappa) {
  return m.first - m.second * kappa;
}

TransverseStats transverse_stats(const MomentSet& m) {
  if (!(m.mu0 > 0.0)) throw Error(ErrorCode::ZeroMass, "section has zero mass");
  TransverseStats s;
  s.mean = m.first / m.mu0;
  s.cov = m.second / m.mu0 - s.mean * s.mean.transpose();
  s.cov = 0.5 * (s.cov + s.cov.transpose());
  return s;
}

// ---------------------------------------------------------------------------

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss rule needs n >= 1");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule g;
  g.nodes.resize(n);
  g.weights.resize(n);
  // Newton on P_n from the Chebyshev-like initial guess; nodes are symmetric.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // refresh the derivative at the converged node
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    g.weights[i] = w;
    g.weights[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(g)).first->second;
}

std::vector<std::array<Point2, 3>> triangulate(const std::vector<Point2>& polygon) {
  std::vector<Point2> v = polygon;
  if (polygon_signed_area(v) < 0.0) std::reverse(v.begin(), v.end());
  std::vector<std::array<Point2, 3>> out;
  auto inside = [](const Point2& p, const Point2& a, const Point2& b, const Point2& c) {
    return cross2(b - a, p - a) >= 0.0 && cross2(c - b, p - b) >= 0.0 && cross2(a - c, p - c) >= 0.0;
  };
  while (v.size() > 3) {
    const std::size_t n = v.size();
    std::size_t best = n;
    double best_quality = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = v[(i + n - 1) % n];
      const Point2& b = v[i];
      const Point2& c = v[(i + 1) % n];
      const double area2 = cross2(b - a, c - b);
      if (area2 <= 0.0) continue;
      bool ear = true;
      for (std::size_t j = 0; j < n && ear; ++j) {
        if (j == i || j == (i + n - 1) % n || j == (i + 1) % n) continue;
        if (inside(v[j], a, b, c)) ear = false;
      }
      if (!ear) continue;
      // Prefer well-shaped ears.
      const double quality = area2 / ((b - a).squaredNorm() + (c - b).squaredNorm() + (a - c).squaredNorm());
      if (quality > best_quality) {
        best_quality = quality;
        best = i;
      }
    }
    if (best == n) throw Error(ErrorCode::DegeneratePolygon, "polygon could not be triangulated");
    out.push_back({v[(best + n - 1) % n], v[best], v[(best + 1) % n]});
    v.erase(v.begin() + static_cast<std::ptrdiff_t>(best));
  }
  out.push_back({v[0], v[1], v[2]});
  return out;
}

}  // namespace pcurve
