#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pcurve/domain.hpp"
#include "pcurve/trace.hpp"

namespace pcurve {

// lambda(x): largest arclength among the global minimizers of |x - Gamma(s)|
// (ties within tie_tol).
double projection_index(const CurveTrace& trace, const Vector& x, double tie_tol = 1e-9);

// Distance from x to the dense-output curve.
double distance_to_curve(const CurveTrace& trace, const Vector& x);

// |int u (1 - <kappa, u>) du| over the cross-section at n_s cell-centred
// arclengths, density 1. Returns (s, norm) pairs.
std::vector<std::pair<double, double>> self_consistency_residual(const Domain& dom,
                                                                 const CurveTrace& trace, int n_s);

struct BarycenterCell {
  int node = 0;
  double s = 0.0;            // node arclength
  long count = 0;
  Vector barycenter;
  double distance = 0.0;     // barycenter to the curve
  double node_distance = 0.0;  // barycenter to its own node
  double std_error = 0.0;    // standard error of the barycenter (norm)
};

struct MonteCarloOptions {
  std::optional<Truncation> truncation;
  std::int64_t shard_size = 1 << 16;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct VoronoiOptions : MonteCarloOptions {
  // Cells within this arclength of either curve end are dropped from the
  // report (used for truncated unbounded domains).
  double trim_length = 0.0;
};

// Nearest-node assignment of uniform samples to n_nodes cell-centred nodes
// s_k = s0 + (k + 1/2) l / n_nodes; ties go to the larger index. Empty cells
// are reported with count 0.
std::vector<BarycenterCell> voronoi_barycenters(const Domain& dom, const CurveTrace& trace,
                                                int n_nodes, std::int64_t n_samples,
                                                std::uint64_t seed, const VoronoiOptions& opts = {});

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
};

// E |X - Gamma(lambda(X))|^2 under the uniform law on the (truncated) domain.
Estimate energy(const Domain& dom, const CurveTrace& trace, std::int64_t n_samples,
                std::uint64_t seed, const MonteCarloOptions& opts = {});

struct Admissibility {
  bool ok = true;
  std::string reason;  // empty when ok
  double s = 0.0;      // first violation
  double max_jacobian_load = 0.0;  // max over sections of max <kappa, u>
};

Admissibility admissibility_check(const Domain& dom, const CurveTrace& trace, int n_s);

double ambiguity_fraction(const Domain& dom, const CurveTrace& trace, std::int64_t n_samples,
                          std::uint64_t seed, double tie_tol = 1e-9,
                          const MonteCarloOptions& opts = {});

struct ValidationOptions {
  int residual_points = 64;
  int nodes = 32;
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  double tie_tol = 1e-9;
  double residual_tol = 1e-6;
  double barycenter_tol = 0.01;
  std::optional<Truncation> truncation;
  double trim_length = 0.0;
};

struct ValidationReport {
  std::vector<std::pair<double, double>> residuals;
  std::vector<BarycenterCell> barycenters;
  Estimate energy;
  double ambiguity = 0.0;
  Admissibility admissible;

  double max_residual() const;
  double max_barycenter_distance() const;
  bool passed(const ValidationOptions& opts) const;
};

// Boundary of the cross-section at s in world coordinates: interval end
// points, polygon vertices, or n_points on an ellipse.
std::vector<Vector> section_outline(const Domain& dom, const CurveTrace& trace, double s,
                                    int n_points = 64);

// Default truncation for unbounded domains: the x3-range (cylinder) or the
// coordinate box (quadrant) spanned by the trace.
std::optional<Truncation> default_truncation(const Domain& dom, const CurveTrace& trace);

ValidationReport run_validation(const Domain& dom, const CurveTrace& trace,
                                const ValidationOptions& opts);

// Seed of shard i derived from the master seed.
std::uint64_t shard_seed(std::uint64_t master, std::uint64_t shard);

}  // namespace pcurve
