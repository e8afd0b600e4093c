#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "pcurve/frame.hpp"

namespace pcurve {

struct CurveState {
  double s = 0.0;
  Vector position;
  SphericalAngles angles;
};

// Scene rotation applied at arclength s; `rotation` maps world to working
// coordinates from s on.
struct Restart {
  double s = 0.0;
  Matrix rotation;
};

struct SolverStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  // "length", "boundary", or the name of the error that ended the run.
  std::string stop_reason = "length";
  std::string stop_message;
  double stop_s = 0.0;

  bool clean_stop() const { return stop_reason == "length" || stop_reason == "boundary"; }
};

// Sampled arclength-parameterized curve. Positions, angles and curvatures
// are in world coordinates; the curvatures refer to normalized_frame(angles).
class CurveTrace {
 public:
  std::vector<CurveState> states;
  std::vector<Curvatures> kappas;
  std::vector<Restart> restarts;
  SolverStats meta;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
  int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().position.size()); }
  double start() const { return states.front().s; }
  double end() const { return states.back().s; }
  double length() const { return end() - start(); }

  void append(const CurveState& state, const Curvatures& kappa);

  // Tangent and T' = sum kappa_i N_i at node k.
  const Vector& tangent(std::size_t k) const { return tangents_[k]; }
  const Vector& accel(std::size_t k) const { return accels_[k]; }

  // Quintic Hermite dense output from positions, tangents and T'.
  Vector position_at(double s) const;
  Vector tangent_at(double s) const;
  // T' at s, made orthogonal to tangent_at(s).
  Vector accel_at(double s) const;
  // Index k with s_k <= s <= s_{k+1}.
  std::size_t segment(double s) const;

  // Rebuilds tangent/T' caches after states or kappas were edited in place.
  void rebuild_cache();

 private:
  std::vector<Vector> tangents_;
  std::vector<Vector> accels_;
};

// Arclength-parameterized curve sample: position, unit tangent and T'.
struct CurvePoint {
  Vector position;
  Vector tangent;
  Vector accel;
};

// n + 1 equally spaced nodes of an arclength-parameterized curve on [s0, s1].
CurveTrace trace_from_curve(const std::function<CurvePoint(double)>& curve, double s0, double s1,
                            int n);

// Same for a regular curve in an arbitrary parameter t: callback returns
// (gamma, gamma', gamma''). Arclength is integrated numerically.
CurveTrace trace_from_parametric(const std::function<std::array<Vector, 3>(double)>& curve,
                                 double t0, double t1, int n);

// Angles for tangent t, choosing the periodic last angle closest to `hint`.
SphericalAngles unwrapped_angles(const Vector& t, const SphericalAngles* hint);

}  // namespace pcurve
