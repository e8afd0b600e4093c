#include "pcurve/curves.hpp"

#include <cmath>
#include <numbers>

#include "pcurve/error.hpp"

namespace pcurve {

CurveTrace quarter_arc_trace(double radius, int n) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "arc radius must be positive");
  return trace_from_curve(
      [radius](double s) {
        const double th = s / radius;
        CurvePoint p;
        p.position = Eigen::Vector2d(radius * std::cos(th), radius * std::sin(th));
        p.tangent = Eigen::Vector2d(-std::sin(th), std::cos(th));
        p.accel = -p.position / (radius * radius);
        return p;
      },
      0.0, 0.5 * std::numbers::pi * radius, n);
}

namespace {

CurveTrace parabola(double x0, double dx, double y0, double dy, int n) {
  // (x0 + dx t, y0 + dy t^2)
  return trace_from_parametric(
      [=](double t) {
        return std::array<Vector, 3>{Vector(Eigen::Vector2d(x0 + dx * t, y0 + dy * t * t)),
                                     Vector(Eigen::Vector2d(dx, 2.0 * dy * t)),
                                     Vector(Eigen::Vector2d(0.0, 2.0 * dy))};
      },
      0.0, 1.0, n);
}

}  // namespace

CurveTrace square_parabola_trace(int n) { return parabola(0.1, 0.8, 0.9, -0.8, n); }

CurveTrace disk_parabola_trace(int n) { return parabola(0.0, 2.0 / 3.0, 2.0 / 3.0, -2.0 / 3.0, n); }

CurveTrace segment_trace(const Vector& a, const Vector& b, int n) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "segment end points differ in dimension");
  const double len = (b - a).norm();
  if (!(len > 0.0)) throw Error(ErrorCode::InvalidArgument, "degenerate segment");
  const Vector t = (b - a) / len;
  return trace_from_curve(
      [&](double s) { return CurvePoint{a + s * t, t, Vector::Zero(a.size())}; }, 0.0, len, n);
}

}  // namespace pcurve
