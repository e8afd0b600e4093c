#include "pcurve/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "pcurve/error.hpp"
#include "pcurve/moments.hpp"

namespace pcurve {

SphericalAngles unwrapped_angles(const Vector& t, const SphericalAngles* hint) {
  SphericalAngles z = angles_from_tangent(t.normalized());
  if (hint != nullptr && hint->angles.size() == z.angles.size()) {
    const Eigen::Index last = z.angles.size() - 1;
    const double two_pi = 2.0 * std::numbers::pi;
    const double prev = hint->angles[last];
    z.angles[last] += two_pi * std::round((prev - z.angles[last]) / two_pi);
  }
  return z;
}

void CurveTrace::append(const CurveState& state, const Curvatures& kappa) {
  if (!states.empty() && !(state.s > states.back().s)) {
    throw Error(ErrorCode::InvalidArgument, "trace arclength must increase strictly");
  }
  states.push_back(state);
  kappas.push_back(kappa);
  const Frame f = normalized_frame(state.angles);
  tangents_.push_back(f.tangent());
  accels_.push_back(curvature_vector(kappa, f));
}

void CurveTrace::rebuild_cache() {
  if (kappas.size() != states.size()) {
    throw Error(ErrorCode::DimensionMismatch, "trace needs one curvature per state");
  }
  tangents_.clear();
  accels_.clear();
  for (std::size_t k = 0; k < states.size(); ++k) {
    const Frame f = normalized_frame(states[k].angles);
    tangents_.push_back(f.tangent());
    accels_.push_back(curvature_vector(kappas[k], f));
  }
}

std::size_t CurveTrace::segment(double s) const {
  if (states.size() < 2) return 0;
  auto it = std::upper_bound(states.begin(), states.end(), s,
                             [](double v, const CurveState& st) { return v < st.s; });
  std::size_t k = static_cast<std::size_t>(std::distance(states.begin(), it));
  if (k == 0) return 0;
  return std::min(k - 1, states.size() - 2);
}

Vector CurveTrace::position_at(double s) const {
  if (states.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  if (states.size() == 1) return states.front().position;
  s = std::clamp(s, start(), end());
  const std::size_t k = segment(s);
  const double h = states[k + 1].s - states[k].s;
  const double t = (s - states[k].s) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  const double t5 = t4 * t;
  const double h00 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double h10 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double h20 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
  const double h01 = 10 * t3 - 15 * t4 + 6 * t5;
  const double h11 = -4 * t3 + 7 * t4 - 3 * t5;
  const double h21 = 0.5 * (t3 - 2 * t4 + t5);
  return h00 * states[k].position + h * h10 * tangents_[k] + h * h * h20 * accels_[k] +
         h01 * states[k + 1].position + h * h11 * tangents_[k + 1] +
         h * h * h21 * accels_[k + 1];
}

Vector CurveTrace::tangent_at(double s) const {
  if (states.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  if (states.size() == 1) return tangents_.front();
  s = std::clamp(s, start(), end());
  const std::size_t k = segment(s);
  const double h = states[k + 1].s - states[k].s;
  const double t = (s - states[k].s) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  // derivatives of the quintic Hermite basis with respect to t
  const double d00 = -30 * t2 + 60 * t3 - 30 * t4;
  const double d10 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  const double d20 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
  const double d01 = -d00;
  const double d11 = -12 * t2 + 28 * t3 - 15 * t4;
  const double d21 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
  const Vector v = (d00 * states[k].position + d01 * states[k + 1].position) / h +
                   d10 * tangents_[k] + d11 * tangents_[k + 1] +
                   h * (d20 * accels_[k] + d21 * accels_[k + 1]);
  return v.normalized();
}

Vector CurveTrace::accel_at(double s) const {
  if (states.empty()) throw Error(ErrorCode::InvalidArgument, "empty trace");
  if (states.size() == 1) return accels_.front();
  s = std::clamp(s, start(), end());
  const std::size_t k = segment(s);
  const double h = states[k + 1].s - states[k].s;
  const double t = (s - states[k].s) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  // second derivatives of the quintic Hermite basis
  const double d00 = -60 * t + 180 * t2 - 120 * t3;
  const double d10 = -36 * t + 96 * t2 - 60 * t3;
  const double d20 = 0.5 * (2 - 18 * t + 36 * t2 - 20 * t3);
  const double d11 = -24 * t + 84 * t2 - 60 * t3;
  const double d21 = 0.5 * (6 * t - 24 * t2 + 20 * t3);
  const Vector a = d00 * (states[k].position - states[k + 1].position) / (h * h) +
                   (d10 * tangents_[k] + d11 * tangents_[k + 1]) / h + d20 * accels_[k] +
                   d21 * accels_[k + 1];
  const Vector tan = tangent_at(s);
  return a - a.dot(tan) * tan;
}

namespace {

CurveTrace build_trace(const std::vector<double>& s, const std::vector<CurvePoint>& pts) {
  CurveTrace trace;
  const SphericalAngles* prev = nullptr;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Vector t = pts[k].tangent.normalized();
    CurveState st{s[k], pts[k].position, unwrapped_angles(t, prev)};
    const Frame f = normalized_frame(st.angles);
    // Drop the tangential part left by rounding.
    const Vector a = pts[k].accel - pts[k].accel.dot(f.tangent()) * f.tangent();
    trace.append(st, principal_curvatures(a, f));
    prev = &trace.states.back().angles;
  }
  trace.meta.accepted = static_cast<long>(pts.size()) - 1;
  trace.meta.stop_s = s.back();
  return trace;
}

}  // namespace

CurveTrace trace_from_curve(const std::function<CurvePoint(double)>& curve, double s0, double s1,
                            int n) {
  if (n < 1 || !(s1 > s0)) throw Error(ErrorCode::InvalidArgument, "need n >= 1 and s1 > s0");
  std::vector<double> s;
  std::vector<CurvePoint> pts;
  for (int k = 0; k <= n; ++k) {
    const double sk = s0 + (s1 - s0) * k / n;
    s.push_back(sk);
    pts.push_back(curve(sk));
  }
  return build_trace(s, pts);
}

CurveTrace trace_from_parametric(const std::function<std::array<Vector, 3>(double)>& curve,
                                 double t0, double t1, int n) {
  if (n < 1 || !(t1 > t0)) throw Error(ErrorCode::InvalidArgument, "need n >= 1 and t1 > t0");
  const GaussRule& g = gauss_legendre(16);
  std::vector<double> s{0.0};
  std::vector<CurvePoint> pts;
  for (int k = 0; k <= n; ++k) {
    const double tk = t0 + (t1 - t0) * k / n;
    if (k > 0) {
      const double ta = t0 + (t1 - t0) * (k - 1) / n;
      double len = 0.0;
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const double t = 0.5 * (ta + tk) + 0.5 * (tk - ta) * g.nodes[i];
        len += 0.5 * (tk - ta) * g.weights[i] * curve(t)[1].norm();
      }
      s.push_back(s.back() + len);
    }
    const auto [p, d1, d2] = curve(tk);
    const double speed = d1.norm();
    const Vector tan = d1 / speed;
    const Vector acc = (d2 - d2.dot(tan) * tan) / (speed * speed);
    pts.push_back(CurvePoint{p, tan, acc});
  }
  return build_trace(s, pts);
}

}  // namespace pcurve
