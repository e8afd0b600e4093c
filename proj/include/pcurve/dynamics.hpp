#pragma once

#include <utility>

#include "pcurve/domain.hpp"
#include "pcurve/moments.hpp"
#include "pcurve/trace.hpp"

namespace pcurve {

struct SolverConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 1e-3;
  double max_step = 0.1;
  double min_step = 1e-12;
  double max_length = 1.0;
  // Restart with a rotated scene once |sin zeta_k| drops below this.
  double singularity_threshold = 0.05;
  bool stop_on_boundary = true;
  long max_steps = 2'000'000;
};

void validate_config(const SolverConfig& cfg);

struct RhsValue {
  Vector dposition;  // T(zeta)
  Vector dangles;    // zeta'
  Curvatures kappa;  // in the frame of the state's angles
};

// Gamma' = T(zeta), zeta'_j = (G^{-1} mu)_j / |T_{zeta_j}|.
RhsValue rhs_general(const Domain& dom, const CurveState& state);

// Quadrant system in (x1, x2, zeta), including the boundary branch at
// x2 = 0, zeta = pi/2.
Eigen::Vector3d rhs_quadrant(const CurveState& state);

// Arclength budget and stop events are taken from cfg; positions in the
// returned trace are in the original coordinates.
CurveTrace integrate(const Domain& dom, const CurveState& init, const SolverConfig& cfg);

std::pair<CurveTrace, Domain> rotate_scene(const CurveTrace& trace, const Domain& dom,
                                           const Matrix& rotation);

// Curvature from the transverse statistics, (cov + v v^T)^{-1} v.
Curvatures curvature_from_stats(const TransverseStats& stats);

}  // namespace pcurve
