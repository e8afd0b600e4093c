#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pcurve/curves.hpp"
#include "pcurve/domain.hpp"
#include "pcurve/dynamics.hpp"
#include "pcurve/helix.hpp"
#include "pcurve/validate.hpp"

using namespace pcurve;

namespace {

constexpr double kPi = std::numbers::pi;

CurveTrace diameter() { return segment_trace(Eigen::Vector3d(-1, 0, 0), Eigen::Vector3d(1, 0, 0)); }

double max_residual(const std::vector<std::pair<double, double>>& r) {
  double m = 0.0;
  for (const auto& [s, v] : r) m = std::max(m, v);
  return m;
}

double max_distance(const std::vector<BarycenterCell>& cells) {
  double m = 0.0;
  for (const BarycenterCell& c : cells) {
    if (c.count > 0) m = std::max(m, c.distance);
  }
  return m;
}

}  // namespace

TEST(ProjectionIndex, Segment) {
  const CurveTrace seg = segment_trace(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0));
  EXPECT_NEAR(projection_index(seg, Eigen::Vector2d(0.3, 5)), 0.3, 1e-12);
  EXPECT_NEAR(projection_index(seg, Eigen::Vector2d(2, 0)), 1.0, 1e-15);
  EXPECT_NEAR(projection_index(seg, Eigen::Vector2d(-2, 1)), 0.0, 1e-15);
}

TEST(ProjectionIndex, ArcCentreTakesLargestArclength) {
  const CurveTrace arc = quarter_arc_trace(2.0 / 3.0);
  EXPECT_NEAR(projection_index(arc, Eigen::Vector2d(0, 0)), arc.end(), 1e-12);
  EXPECT_NEAR(arc.end(), kPi / 3, 1e-12);
}

TEST(ProjectionIndex, IsTheGlobalMinimiser) {
  const HelixParams p{0.3, 0.2, 1.0};
  const CurveTrace tr = helix_trace(p, 2, 64);
  std::vector<Vector> dense;
  for (int i = 0; i <= 10000; ++i) dense.push_back(tr.position_at(tr.start() + tr.length() * i / 10000.0));
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double zmax = tr.states.back().position[2];
  for (int k = 0; k < 1000; ++k) {
    const Vector x = Eigen::Vector3d(u(rng), u(rng), 0.5 * (u(rng) + 1) * zmax);
    const double s = projection_index(tr, x);
    const double d = (x - tr.position_at(s)).norm();
    double best = 1e300;
    for (const Vector& y : dense) best = std::min(best, (x - y).norm());
    ASSERT_LE(d, best + 1e-9) << "query " << k;
  }
}

TEST(Residual, BallDiameterVanishes) {
  EXPECT_LE(max_residual(self_consistency_residual(make_ball(1.0, 3), diameter(), 64)), 1e-10);
}

TEST(Residual, HelixAtHalfRadiusPitch) {
  const HelixParams p{0.2, 0.5, 1.0};
  const auto r = self_consistency_residual(make_cylinder(1.0), helix_trace(p, 1, 256), 8);
  EXPECT_LE(max_residual(r), 1e-8);
}

TEST(Residual, HelixOffRegimeDoesNotVanish) {
  const HelixParams p{0.2, 1.0, 1.0};
  const auto r = self_consistency_residual(make_cylinder(1.0), helix_trace(p, 1, 256), 8);
  EXPECT_GT(max_residual(r), 0.1);
}

TEST(Residual, SquareParabolaIsNotPrincipal) {
  const Domain sq = make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  EXPECT_GE(max_residual(self_consistency_residual(sq, square_parabola_trace(), 64)), 0.01);
}

TEST(Residual, QuadrantSolutionIsSelfConsistent) {
  SolverConfig cfg;
  cfg.max_length = 10;
  const CurveTrace tr = integrate(make_quadrant(), CurveState{0, Eigen::Vector2d(1, 0),
                                                               SphericalAngles(Vector::Constant(1, kPi / 2))},
                                  cfg);
  // Skip the first cell: the section there degenerates at the boundary.
  auto r = self_consistency_residual(make_quadrant(), tr, 64);
  r.erase(r.begin());
  EXPECT_LE(max_residual(r), 1e-6);
}

TEST(Barycenters, BallDiameter) {
  const auto cells = voronoi_barycenters(make_ball(1.0, 3), diameter(), 32, 1'000'000, 1);
  ASSERT_EQ(cells.size(), 32u);
  EXPECT_LE(max_distance(cells), 0.01);
  long total = 0;
  for (const BarycenterCell& c : cells) total += c.count;
  EXPECT_EQ(total, 1'000'000);
}

TEST(Barycenters, ArcRefinementLadder) {
  // Coarse cells are biased towards the centre by the sector geometry; once
  // the bias drops below the sampling noise the trend is flat within 3 sigma.
  const Domain disk = make_quarter_disk(1.0);
  const CurveTrace arc = quarter_arc_trace(2.0 / 3.0);
  std::vector<double> worst;
  std::vector<double> noise;
  for (int n : {2, 4, 8, 16, 32}) {
    const auto cells = voronoi_barycenters(disk, arc, n, 1'000'000, 2);
    worst.push_back(max_distance(cells));
    double se = 0.0;
    for (const BarycenterCell& c : cells) se = std::max(se, c.std_error);
    noise.push_back(se);
  }
  for (std::size_t i = 0; i + 1 < worst.size(); ++i) {
    EXPECT_LE(worst[i + 1], worst[i] + 3 * noise[i + 1]) << "step " << i;
  }
  EXPECT_GT(worst[0], worst[2] + 3 * noise[2]);
  EXPECT_LE(worst.back(), 0.01);
}

TEST(Barycenters, TrimDropsEndCells) {
  const HelixParams p{0.2, 0.5, 1.0};
  const CurveTrace tr = helix_trace(p, 3, 64);
  VoronoiOptions opts;
  opts.truncation = default_truncation(make_cylinder(1.0), tr);
  opts.trim_length = 1.0;
  const auto cells = voronoi_barycenters(make_cylinder(1.0), tr, 32, 100'000, 3, opts);
  for (const BarycenterCell& c : cells) {
    EXPECT_GE(c.s, tr.start() + 1.0);
    EXPECT_LE(c.s, tr.end() - 1.0);
  }
  EXPECT_LT(cells.size(), 32u);
}

TEST(Energy, BallDiameter) {
  const Estimate e = energy(make_ball(1.0, 3), diameter(), 200'000, 5);
  EXPECT_NEAR(e.mean, 0.4, 3 * e.std_error);
  EXPECT_GT(e.std_error, 0.0);
}

TEST(Energy, UnitSquareMidline) {
  const Domain sq = make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const Estimate e = energy(sq, segment_trace(Eigen::Vector2d(0, 0.5), Eigen::Vector2d(1, 0.5)), 200'000, 6);
  EXPECT_NEAR(e.mean, 1.0 / 12.0, 3 * e.std_error);
}

TEST(Energy, ArcBeatsParabolaInQuarterDisk) {
  // Paired samples: the energy gap is small next to either marginal error.
  const Domain disk = make_quarter_disk(1.0);
  const CurveTrace arc = quarter_arc_trace(2.0 / 3.0);
  const CurveTrace par = disk_parabola_trace();
  const int n = 100'000;
  const Matrix pts = sample_uniform(disk, n, 7);
  double sum = 0.0;
  double sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double da = distance_to_curve(arc, pts.col(k));
    const double dp = distance_to_curve(par, pts.col(k));
    const double diff = dp * dp - da * da;
    sum += diff;
    sq += diff * diff;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_GT(mean, 3 * se);
}

TEST(Energy, RigidMotionInvariance) {
  const Domain cube = make_cuboid(Vector::Zero(3), Vector::Ones(3));
  const CurveTrace seg = segment_trace(Eigen::Vector3d(0.1, 0.5, 0.5), Eigen::Vector3d(0.9, 0.5, 0.5));
  const Matrix q = Eigen::AngleAxisd(0.8, Eigen::Vector3d(1, -1, 2).normalized()).toRotationMatrix();
  const auto [rot, rot_dom] = rotate_scene(seg, cube, q);
  const Estimate a = energy(cube, seg, 100'000, 8);
  const Estimate b = energy(rot_dom, rot, 100'000, 8);
  EXPECT_GE(a.mean, 0.0);
  EXPECT_NEAR(a.mean, b.mean, 3 * std::hypot(a.std_error, b.std_error));
}

TEST(Energy, ShardingIsDeterministic) {
  const Domain disk = make_quarter_disk(1.0);
  const CurveTrace arc = quarter_arc_trace(2.0 / 3.0);
  MonteCarloOptions one;
  one.threads = 1;
  one.shard_size = 10'000;
  MonteCarloOptions four = one;
  four.threads = 4;
  const Estimate a = energy(disk, arc, 100'000, 9, one);
  const Estimate b = energy(disk, arc, 100'000, 9, four);
  EXPECT_NEAR(a.mean, b.mean, 1e-12);
  EXPECT_EQ(a.n, b.n);
  EXPECT_NE(shard_seed(9, 0), shard_seed(9, 1));
}

TEST(Admissibility, HelixInRegime) {
  const HelixParams p{0.2, 0.5, 1.0};
  const Admissibility a = admissibility_check(make_cylinder(1.0), helix_trace(p, 1, 128), 32);
  EXPECT_TRUE(a.ok) << a.reason;
  EXPECT_NEAR(a.max_jacobian_load, p.curvature() * (p.a + p.r), 1e-6);
  EXPECT_NEAR(a.max_jacobian_load, 0.8276, 1e-4);
}

TEST(Admissibility, SteepHelixIsNot) {
  const HelixParams p{0.66, 0.1, 1.0};
  const Admissibility a = admissibility_check(make_cylinder(1.0), helix_trace(p, 1, 128), 32);
  EXPECT_FALSE(a.ok);
  EXPECT_FALSE(a.reason.empty());
}

TEST(Admissibility, LineInCuboid) {
  const Domain cube = make_cuboid(Vector::Zero(3), Vector::Ones(3));
  const Admissibility a =
      admissibility_check(cube, segment_trace(Eigen::Vector3d(0.1, 0.5, 0.5), Eigen::Vector3d(0.9, 0.5, 0.5)), 32);
  EXPECT_TRUE(a.ok);
  EXPECT_EQ(a.max_jacobian_load, 0.0);
}

TEST(Ambiguity, DiameterHasNoTies) {
  EXPECT_LE(ambiguity_fraction(make_ball(1.0, 3), diameter(), 100'000, 10), 1e-4);
  EXPECT_EQ(ambiguity_fraction(make_ball(1.0, 3), diameter(), 100'000, 10, 0.0), 0.0);
}

TEST(Validation, ReportForBallDiameter) {
  ValidationOptions opts;
  opts.samples = 100'000;
  opts.barycenter_tol = 0.03;
  const ValidationReport r = run_validation(make_ball(1.0, 3), diameter(), opts);
  EXPECT_TRUE(r.admissible.ok);
  EXPECT_EQ(r.residuals.size(), 64u);
  EXPECT_EQ(r.barycenters.size(), 32u);
  EXPECT_TRUE(r.passed(opts));
}

TEST(SectionOutline, PrismTriangleLiesInTheNormalPlane) {
  const Domain dom = make_prism({{0, 1}, {std::sqrt(3.0) / 2, -0.5}, {-2, -0.5}}, 6);
  const CurveTrace seg = segment_trace(Eigen::Vector3d(-0.2, 0, 0.6), Eigen::Vector3d(-0.2, 0, 5.6));
  const std::vector<Vector> pts = section_outline(dom, seg, 2.0);
  ASSERT_EQ(pts.size(), 3u);
  for (const Vector& p : pts) EXPECT_NEAR(p[2], 2.6, 1e-12);
  EXPECT_NEAR(pts[0].head<2>().norm() + pts[1].head<2>().norm() + pts[2].head<2>().norm(),
              1 + 1 + std::hypot(2.0, 0.5), 1e-12);
}

TEST(SectionOutline, EllipseAndInterval) {
  const HelixParams p{0.2, 0.5, 1.0};
  for (const Vector& x : section_outline(make_cylinder(1.0), helix_trace(p, 1, 128), 0.7, 32)) {
    EXPECT_NEAR(x.head<2>().norm(), 1.0, 1e-9);
  }
  const std::vector<Vector> ends = section_outline(make_ball(1.0, 2), segment_trace(Eigen::Vector2d(-1, 0.6),
                                                                                   Eigen::Vector2d(1, 0.6)), 1.0);
  ASSERT_EQ(ends.size(), 2u);
  EXPECT_NEAR(ends[0][1], -1.0, 1e-12);
  EXPECT_NEAR(ends[1][1], 1.0, 1e-12);
}
