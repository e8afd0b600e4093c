#pragma once

#include <iosfwd>
#include <vector>

#include "pcurve/trace.hpp"

namespace pcurve {

// Arclengths where the quadrant trace crosses the diagonal direction,
// i.e. zeros of zeta(s) - pi/4, located on the dense output.
std::vector<double> diagonal_direction_zeros(const CurveTrace& quadrant_trace);

struct SquarePoint {
  int piece = 0;  // 0..7, counter-clockwise
  Vector position;
  Vector normal;
};

struct SquareCurve {
  std::vector<SquarePoint> points;
  double t = 0.0;            // truncation arclength
  double c = 0.0;            // x1(t) + x2(t), half side before rescaling
  double max_gap = 0.0;      // largest joint gap
  double max_tangent_jump = 0.0;
};

// Closed curve in [0,1]^2 from the quadrant trace truncated at t: the piece
// on [0, t] is mapped to the triangle (c - x1, x2) of [-c, c]^2, copied into
// the 8 dihedral sectors (odd sectors mirrored and reversed), then scaled to
// the unit square. Throws IncompatibleTruncation unless zeta(t) = pi/4 to tol.
SquareCurve compose_square(const CurveTrace& quadrant_trace, double t, int samples_per_piece = 200,
                           double tol = 1e-8);

// "# format_version=1", header piece,x1,x2,n1,n2.
void write_square_csv(std::ostream& out, const SquareCurve& curve);

}  // namespace pcurve
