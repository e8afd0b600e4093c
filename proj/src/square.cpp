#include "pcurve/square.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include <boost/math/tools/roots.hpp>

#include "pcurve/error.hpp"

namespace pcurve {

namespace {

constexpr double kQuarter = std::numbers::pi / 4.0;

double direction_offset(const CurveTrace& trace, double s) {
  const Vector t = trace.tangent_at(s);
  return std::atan2(t[1], t[0]) - kQuarter;
}

Eigen::Vector2d apply(int sector, const Eigen::Vector2d& p) {
  // Odd sectors: mirror in the diagonal first.
  Eigen::Vector2d q = (sector % 2 == 1) ? Eigen::Vector2d(p[1], p[0]) : p;
  for (int m = 0; m < sector / 2; ++m) q = Eigen::Vector2d(-q[1], q[0]);
  return q;
}

}  // namespace

std::vector<double> diagonal_direction_zeros(const CurveTrace& trace) {
  if (trace.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "quadrant trace must be planar");
  std::vector<double> zeros;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const double a = trace.states[k].s;
    const double b = trace.states[k + 1].s;
    // Subdivide so that a double crossing inside one step is not missed.
    constexpr int kSub = 4;
    double fa = direction_offset(trace, a);
    for (int i = 1; i <= kSub; ++i) {
      const double lo = a + (b - a) * (i - 1) / kSub;
      const double hi = a + (b - a) * i / kSub;
      const double fb = direction_offset(trace, hi);
      if (fa == 0.0 && (zeros.empty() || zeros.back() < lo)) {
        zeros.push_back(lo);
      } else if (fa * fb < 0.0) {
        boost::uintmax_t iters = 200;
        const auto r = boost::math::tools::toms748_solve(
            [&](double s) { return direction_offset(trace, s); }, lo, hi, fa, fb,
            boost::math::tools::eps_tolerance<double>(52), iters);
        zeros.push_back(0.5 * (r.first + r.second));
      }
      fa = fb;
    }
  }
  return zeros;
}

SquareCurve compose_square(const CurveTrace& trace, double t, int samples_per_piece, double tol) {
  if (trace.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "quadrant trace must be planar");
  if (samples_per_piece < 2) throw Error(ErrorCode::InvalidArgument, "need >= 2 samples per piece");
  if (!(t > trace.start()) || t > trace.end()) {
    throw Error(ErrorCode::IncompatibleTruncation, "truncation outside the trace");
  }
  const double miss = direction_offset(trace, t);
  if (std::abs(miss) > tol) {
    throw Error(ErrorCode::IncompatibleTruncation,
                "normal at the truncation is not parallel to the diagonal", t);
  }
  const Vector end = trace.position_at(t);
  SquareCurve out;
  out.t = t;
  out.c = end[0] + end[1];

  std::vector<Eigen::Vector2d> pos;
  std::vector<Eigen::Vector2d> nrm;
  const double s0 = trace.start();
  for (int i = 0; i < samples_per_piece; ++i) {
    const double s = s0 + (t - s0) * i / (samples_per_piece - 1);
    const Vector x = trace.position_at(s);
    const Vector tan = trace.tangent_at(s);
    if (x[0] + x[1] > out.c + tol * (1.0 + out.c)) {
      throw Error(ErrorCode::IncompatibleTruncation, "piece leaves the triangle", s);
    }
    pos.emplace_back(out.c - x[0], x[1]);
    // Normal (-sin, cos) mapped by the reflection x1 -> -x1.
    nrm.emplace_back(tan[1], -tan[0]);
  }

  Eigen::Vector2d prev_end;
  Eigen::Vector2d prev_tan;
  Eigen::Vector2d first_start;
  Eigen::Vector2d first_tan;
  const Vector t0 = trace.tangent_at(s0);
  const Vector t1 = trace.tangent_at(t);
  const Eigen::Vector2d dir0(-t0[0], t0[1]);
  const Eigen::Vector2d dir1(-t1[0], t1[1]);
  for (int sector = 0; sector < 8; ++sector) {
    const bool odd = sector % 2 == 1;
    const Eigen::Vector2d start = apply(sector, odd ? pos.back() : pos.front());
    const Eigen::Vector2d finish = apply(sector, odd ? pos.front() : pos.back());
    const Eigen::Vector2d ts = odd ? Eigen::Vector2d(-apply(sector, dir1)) : apply(sector, dir0);
    const Eigen::Vector2d tf = odd ? Eigen::Vector2d(-apply(sector, dir0)) : apply(sector, dir1);
    if (sector == 0) {
      first_start = start;
      first_tan = ts;
    } else {
      out.max_gap = std::max(out.max_gap, (start - prev_end).norm());
      out.max_tangent_jump = std::max(out.max_tangent_jump, (ts - prev_tan).norm());
    }
    prev_end = finish;
    prev_tan = tf;
    for (int i = 0; i < samples_per_piece; ++i) {
      const std::size_t j = odd ? pos.size() - 1 - static_cast<std::size_t>(i) : static_cast<std::size_t>(i);
      if (sector > 0 && i == 0) continue;  // shared joint
      const Eigen::Vector2d p = apply(sector, pos[j]);
      const Eigen::Vector2d n = apply(sector, nrm[j]);
      SquarePoint sp;
      sp.piece = sector;
      sp.position = (p / out.c + Eigen::Vector2d::Ones()) * 0.5;
      sp.normal = n.normalized();
      out.points.push_back(sp);
    }
  }
  out.max_gap = std::max(out.max_gap, (first_start - prev_end).norm());
  out.max_tangent_jump = std::max(out.max_tangent_jump, (first_tan - prev_tan).norm());
  // Gaps are measured before rescaling; report them in unit-square units.
  out.max_gap /= 2.0 * out.c;
  return out;
}

void write_square_csv(std::ostream& out, const SquareCurve& curve) {
  out << "# format_version=1\n";
  out << "# t=" << curve.t << " c=" << curve.c << "\n";
  out << "piece,x1,x2,n1,n2\n";
  char buf[160];
  for (const SquarePoint& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", p.piece, p.position[0],
                  p.position[1], p.normal[0], p.normal[1]);
    out << buf;
  }
}

}  // namespace pcurve
