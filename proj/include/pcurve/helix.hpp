#pragma once

#include <optional>
#include <utility>

#include "pcurve/domain.hpp"
#include "pcurve/frame.hpp"
#include "pcurve/trace.hpp"

namespace pcurve {

// H(s) = (a cos ks, a sin ks, b k s), k = (a^2 + b^2)^{-1/2}, inside the
// cylinder of radius r.
struct HelixParams {
  double a = 0.0;
  double b = 0.0;
  double r = 1.0;

  double k() const;
  double curvature() const { return a * k() * k(); }
  double torsion() const { return b * k() * k(); }
  void validate() const;
};

struct HelixState {
  Vector position;
  Frame frenet;  // columns T, N, B
};

HelixState helix_state(const HelixParams& p, double s);

// Curve sample for trace builders.
CurvePoint helix_point(const HelixParams& p, double s);

// Arclength-uniform trace over whole periods.
CurveTrace helix_trace(const HelixParams& p, int periods, int nodes_per_period);

// Normal-plane section at s = 0 in Frenet coordinates (u1 along N, u2 along B):
// (a - u1)^2 + (b k u2)^2 <= r^2.
SectionEllipse helix_section(const HelixParams& p);

struct MeanOffset {
  double u1 = 0.0;
  double u2 = 0.0;
};

// (a (1 - r^2 / 4b^2), 0).
MeanOffset mean_offset_closed_form(const HelixParams& p);

// Weighted mean of the full ellipse, by quadrature on the unit disk.
// Throws JacobianSignViolation if kappa (a + r) > 1.
MeanOffset mean_offset_quadrature(const HelixParams& p);

// Weighted mean over the set of ellipse points whose nearest helix point is
// H(0), i.e. the actual projection region at s = 0.
MeanOffset mean_offset_projection_region(const HelixParams& p);

// True when H(0) is a global nearest helix point to H(0) + u1 N + u2 B.
bool projects_to_origin(const HelixParams& p, double u1, double u2);

struct PitchResult {
  bool found = false;
  double b = 0.0;
  double residual = 0.0;  // |u1 bar| at b
  bool closed_form = false;
};

// b with vanishing mean offset: r/2 for a <= r/4, otherwise a root of the
// projection-region offset on (0, r/2). OutOfRegime for a >= 2r/3.
PitchResult principal_pitch_search(double a, double r);

// Jacobian positivity over the full ellipse: kappa (a + r) <= 1.
bool helix_jacobian_positive(const HelixParams& p);

}  // namespace pcurve
