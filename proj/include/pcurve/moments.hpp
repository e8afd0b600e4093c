#pragma once

#include <array>
#include <functional>
#include <optional>

#include "pcurve/domain.hpp"
#include "pcurve/frame.hpp"

namespace pcurve {

// Transverse moments of a cross-section for a constant density 1:
// mu0 = int 1, first_i = int u_i, second_ij = int u_i u_j.
struct MomentSet {
  double mu0 = 0.0;
  Vector first;
  Matrix second;

  int codim() const { return static_cast<int>(first.size()); }
};

struct TransverseStats {
  Vector mean;
  Matrix cov;
};

// Strip integrals int_{v1}^{v2} int_{a+b t}^{c+d t} t^j w^k dw dt.
struct PartialMoments {
  double m00 = 0.0;
  double m10 = 0.0;
  double m20 = 0.0;
  double m11 = 0.0;
  double m01 = 0.0;
  double m02 = 0.0;
};

MomentSet moments_interval(double u_minus, double u_plus);

PartialMoments partial_moments(double a, double b, double c, double d, double v1, double v2);

// Exact moments of a simple polygon by vertical strips between sorted
// u1-breakpoints.
MomentSet moments_polygon(const SectionPolygon& section);

// Closed-form moments over an ellipse. With `kappa` the density carries the
// factor (1 - <kappa, u>), which must stay positive on the ellipse.
MomentSet moments_ellipse(const SectionEllipse& section,
                          const std::optional<Vector>& kappa = std::nullopt);

// Analytic moments for whichever section kind is given.
MomentSet section_moments(const CrossSection& section);

using Density = std::function<double(const Vector&)>;

struct QuadratureOptions {
  double rel_tol = 1e-12;
  int max_levels = 12;
};

// Adaptive quadrature oracle. An empty density means density 1.
MomentSet moments_quadrature(const CrossSection& section, const Density& density = {},
                             const std::optional<Vector>& jacobian_weight = std::nullopt,
                             const QuadratureOptions& opts = {});

// kappa with G kappa = mu, G = second, mu = first.
Curvatures gram_solve(const MomentSet& m);
double gram_condition(const MomentSet& m);

// int u (1 - <kappa, u>) du = first - second * kappa.
Vector weighted_first_moment(const MomentSet& m, const Vector& kappa);

TransverseStats transverse_stats(const MomentSet& m);

// ---------------------------------------------------------------------------
// Quadrature building blocks (also used by the helix module).

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

// Ear-clipping triangulation of a simple CCW polygon.
std::vector<std::array<Point2, 3>> triangulate(const std::vector<Point2>& polygon);

}  // namespace pcurve
