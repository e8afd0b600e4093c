#include "pcurve/helix.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "pcurve/error.hpp"
#include "pcurve/moments.hpp"

namespace pcurve {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

double HelixParams::k() const { return 1.0 / std::hypot(a, b); }

void HelixParams::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0) || (a == 0.0 && b == 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "helix needs a, b >= 0, not both zero");
  }
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "cylinder radius must be positive");
}

HelixState helix_state(const HelixParams& p, double s) {
  p.validate();
  const double k = p.k();
  const double c = std::cos(k * s);
  const double sn = std::sin(k * s);
  Eigen::Matrix3d f;
  f.col(0) << -p.a * k * sn, p.a * k * c, p.b * k;
  f.col(1) << -c, -sn, 0.0;
  f.col(2) << p.b * k * sn, -p.b * k * c, p.a * k;
  const Vector x = Eigen::Vector3d(p.a * c, p.a * sn, p.b * k * s);
  return HelixState{x, Frame(Matrix(f))};
}

CurvePoint helix_point(const HelixParams& p, double s) {
  const HelixState h = helix_state(p, s);
  return CurvePoint{h.position, h.frenet.tangent(), p.curvature() * h.frenet.normal(0)};
}

CurveTrace helix_trace(const HelixParams& p, int periods, int nodes_per_period) {
  if (periods < 1 || nodes_per_period < 4) {
    throw Error(ErrorCode::InvalidArgument, "helix trace needs periods >= 1 and >= 4 nodes per period");
  }
  const double len = periods * 2.0 * kPi / p.k();
  return trace_from_curve([&](double s) { return helix_point(p, s); }, 0.0, len,
                          periods * nodes_per_period);
}

SectionEllipse helix_section(const HelixParams& p) {
  p.validate();
  if (p.b == 0.0) throw Error(ErrorCode::ZeroPitch, "planar circle has an unbounded section");
  const double bk = p.b * p.k();
  Eigen::Matrix2d shape = Eigen::Matrix2d::Zero();
  shape(0, 0) = 1.0 / (p.r * p.r);
  shape(1, 1) = bk * bk / (p.r * p.r);
  return SectionEllipse{Point2(p.a, 0.0), shape};
}

bool helix_jacobian_positive(const HelixParams& p) {
  p.validate();
  return p.curvature() * (p.a + p.r) <= 1.0;
}

MeanOffset mean_offset_closed_form(const HelixParams& p) {
  p.validate();
  if (p.b == 0.0) throw Error(ErrorCode::ZeroPitch, "mean offset needs b > 0");
  return MeanOffset{p.a * (1.0 - p.r * p.r / (4.0 * p.b * p.b)), 0.0};
}

MeanOffset mean_offset_quadrature(const HelixParams& p) {
  p.validate();
  if (p.b == 0.0) throw Error(ErrorCode::ZeroPitch, "mean offset needs b > 0");
  if (!helix_jacobian_positive(p)) {
    throw Error(ErrorCode::JacobianSignViolation, "kappa u1 exceeds 1 on the section ellipse");
  }
  Vector kappa(2);
  kappa << p.curvature(), 0.0;
  const MomentSet m = moments_quadrature(helix_section(p), {}, kappa);
  return MeanOffset{m.first[0] / m.mu0, m.first[1] / m.mu0};
}

bool projects_to_origin(const HelixParams& p, double u1, double u2) {
  const double k = p.k();
  const double x1 = p.a - u1;
  const double x2 = -p.b * k * u2;
  const double x3 = p.a * k * u2;
  const double rho = std::hypot(x1, x2);
  const double phi = std::atan2(x2, x1);
  // |x - H(theta)|^2 with theta = k s
  auto f = [&](double th) {
    const double dz = x3 - p.b * th;
    return rho * rho + p.a * p.a - 2.0 * p.a * rho * std::cos(th - phi) + dz * dz;
  };
  const double f0 = u1 * u1 + u2 * u2;
  const double tol = 1e-12 * (1.0 + f0);
  // Only thetas with (x3 - b theta)^2 + (rho - a)^2 < f0 can beat theta = 0.
  const double slack = f0 - (rho - p.a) * (rho - p.a);
  if (slack <= 0.0) return true;
  double lo;
  double hi;
  if (p.b > 0.0) {
    lo = (x3 - std::sqrt(slack)) / p.b;
    hi = (x3 + std::sqrt(slack)) / p.b;
  } else {
    lo = phi - kPi;
    hi = phi + kPi;
  }
  constexpr double step = 0.05;
  const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / step)));
  const double h = (hi - lo) / n;
  double prev2 = f(lo);
  double prev = f(lo + h);
  if (prev2 < f0 - tol || prev < f0 - tol) {
    if (std::abs(lo) > 1e-6 || std::abs(lo + h) > 1e-6) return false;
  }
  for (int i = 2; i <= n; ++i) {
    const double th = lo + i * h;
    const double cur = f(th);
    if (cur < f0 - tol && std::abs(th) > h) return false;
    if (prev <= prev2 && prev <= cur) {
      // Refine the bracketed local minimum away from theta = 0.
      const double a = th - 2.0 * h;
      const double b = th;
      if (!(a <= 0.0 && b >= 0.0)) {
        const auto m = boost::math::tools::brent_find_minima(f, a, b, 50);
        if (m.second < f0 - tol) return false;
      } else {
        // The bracket around 0 may hide a second, nearby minimum.
        for (const auto& [ea, eb] : {std::pair{a, 0.0}, std::pair{0.0, b}}) {
          if (eb - ea <= 0.0) continue;
          const auto m = boost::math::tools::brent_find_minima(f, ea, eb, 50);
          if (m.second < f0 - tol && std::abs(m.first) > 1e-6) return false;
        }
      }
    }
    prev2 = prev;
    prev = cur;
  }
  return true;
}

MeanOffset mean_offset_projection_region(const HelixParams& p) {
  p.validate();
  if (p.b == 0.0) throw Error(ErrorCode::ZeroPitch, "mean offset needs b > 0");
  const double kappa = p.curvature();
  const double bk = p.b * p.k();
  // Half-width in u2 of the region at u1 = a - r cos(phi).
  auto half_width = [&](double phi) {
    const double u1 = p.a - p.r * std::cos(phi);
    const double w = p.r * std::sin(phi) / bk;
    if (!projects_to_origin(p, u1, 0.0)) return 0.0;
    if (projects_to_origin(p, u1, w)) return w;
    double lo = 0.0;
    double hi = w;
    while (hi - lo > 1e-13 * (1.0 + w)) {
      const double mid = 0.5 * (lo + hi);
      (projects_to_origin(p, u1, mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  // Integrate (mass, first moment) over phi in [0, pi] together.
  auto integrand = [&](double phi, int moment) {
    const double u1 = p.a - p.r * std::cos(phi);
    const double jac = 1.0 - kappa * u1;
    const double w = half_width(phi);
    const double base = 2.0 * w * jac * p.r * std::sin(phi);
    return moment == 0 ? base : base * u1;
  };
  const double mass = GK::integrate([&](double phi) { return integrand(phi, 0); }, 0.0, kPi, 12, 1e-11);
  const double first = GK::integrate([&](double phi) { return integrand(phi, 1); }, 0.0, kPi, 12, 1e-11);
  if (!(mass > 0.0)) throw Error(ErrorCode::ZeroMass, "projection region has no mass");
  return MeanOffset{first / mass, 0.0};
}

PitchResult principal_pitch_search(double a, double r) {
  if (!(r > 0.0) || !(a >= 0.0)) throw Error(ErrorCode::InvalidArgument, "need a >= 0, r > 0");
  if (a >= 2.0 * r / 3.0) {
    throw Error(ErrorCode::OutOfRegime, "principal pitch search needs a < 2r/3");
  }
  PitchResult out;
  if (a <= r / 4.0) {
    out.found = true;
    out.b = r / 2.0;
    out.closed_form = true;
    out.residual = std::abs(mean_offset_closed_form({a, out.b, r}).u1);
    return out;
  }
  auto g = [&](double b) { return mean_offset_projection_region({a, b, r}).u1; };
  const double step = 0.025 * r;
  double b_hi = r / 2.0;
  double g_hi = g(b_hi);
  for (double b_lo = b_hi - step; b_lo > 0.5 * step; b_lo -= step) {
    const double g_lo = g(b_lo);
    if ((g_lo <= 0.0) != (g_hi <= 0.0)) {
      boost::uintmax_t iters = 100;
      const auto bracket = boost::math::tools::toms748_solve(
          g, b_lo, b_hi, g_lo, g_hi, boost::math::tools::eps_tolerance<double>(40), iters);
      const double b = 0.5 * (bracket.first + bracket.second);
      out.found = true;
      out.b = b;
      out.residual = std::abs(g(b));
      return out;
    }
    b_hi = b_lo;
    g_hi = g_lo;
  }
  return out;
}

}  // namespace pcurve
