#pragma once

#include "pcurve/trace.hpp"

namespace pcurve {

// Reference curves used for validation demos.

// Quarter circle of radius R about the origin, from (R, 0) to (0, R).
CurveTrace quarter_arc_trace(double radius, int n = 256);

// (0.1 + 0.8 t, 0.9 - 0.8 t^2), t in [0, 1]: a quarter parabola inside the
// unit square.
CurveTrace square_parabola_trace(int n = 256);

// (2t/3, 2(1 - t^2)/3), t in [0, 1]: parabola through the end points of the
// radius-2/3 arc.
CurveTrace disk_parabola_trace(int n = 256);

// Straight segment from a to b.
CurveTrace segment_trace(const Vector& a, const Vector& b, int n = 64);

}  // namespace pcurve
