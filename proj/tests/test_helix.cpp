#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pcurve/domain.hpp"
#include "pcurve/error.hpp"
#include "pcurve/helix.hpp"
#include "pcurve/validate.hpp"

using namespace pcurve;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(HelixState, AtZero) {
  const HelixParams p{0.2, 0.5, 1.0};
  const double k = p.k();
  const HelixState h = helix_state(p, 0.0);
  EXPECT_LT((h.position - Eigen::Vector3d(0.2, 0, 0)).norm(), 1e-15);
  EXPECT_LT((h.frenet.normal(0) - Eigen::Vector3d(-1, 0, 0)).norm(), 1e-15);
  EXPECT_LT((h.frenet.normal(1) - Eigen::Vector3d(0, -0.5 * k, 0.2 * k)).norm(), 1e-15);
}

TEST(HelixState, ZeroPitchIsACircle) {
  const HelixParams p{2.0 / 3.0, 0.0, 1.0};
  for (double s : {0.0, 0.4, 1.3, 3.0}) {
    const HelixState h = helix_state(p, s);
    EXPECT_NEAR(h.position.head<2>().norm(), 2.0 / 3.0, 1e-15);
    EXPECT_EQ(h.position[2], 0.0);
  }
  EXPECT_NEAR(p.curvature(), 1.5, 1e-15);
}

TEST(HelixState, FrenetFrameAndUnitSpeed) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const HelixParams p{u(rng), u(rng) + 0.01, 1.0};
    const double s = 10 * u(rng);
    const HelixState h = helix_state(p, s);
    ASSERT_LT(h.frenet.orthonormality_error(), 1e-14);
    const double e = 1e-6;
    const Vector d = (helix_state(p, s + e).position - helix_state(p, s - e).position) / (2 * e);
    ASSERT_NEAR(d.norm(), 1.0, 1e-8);
    ASSERT_LT((d - h.frenet.tangent()).norm(), 1e-8);
    ASSERT_NEAR(p.curvature() * p.curvature() + p.torsion() * p.torsion(), p.k() * p.k(), 1e-14 * p.k() * p.k());
  }
}

TEST(HelixState, RejectsBadParams) {
  EXPECT_EQ(code_of([] { helix_state(HelixParams{0.0, 0.0, 1.0}, 0.0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { helix_state(HelixParams{-0.1, 0.5, 1.0}, 0.0); }), ErrorCode::InvalidArgument);
}

TEST(HelixSection, MatchesTheCylinderSlice) {
  const HelixParams p{0.3, 0.4, 1.0};
  const SectionEllipse e = helix_section(p);
  EXPECT_LT((e.center - Point2(0.3, 0)).norm(), 1e-15);
  const double bk = p.b * p.k();
  EXPECT_NEAR(e.shape(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(e.shape(1, 1), bk * bk, 1e-15);
  EXPECT_EQ(code_of([] { helix_section(HelixParams{0.3, 0.0, 1.0}); }), ErrorCode::ZeroPitch);
}

TEST(MeanOffset, ClosedFormExamples) {
  MeanOffset m = mean_offset_closed_form({0.2, 0.5, 1.0});
  EXPECT_NEAR(m.u1, 0.0, 1e-16);
  EXPECT_EQ(m.u2, 0.0);
  m = mean_offset_closed_form({0.2, 1.0, 1.0});
  EXPECT_NEAR(m.u1, 0.15, 1e-15);
  m = mean_offset_closed_form({0.0, 0.7, 1.0});
  EXPECT_EQ(m.u1, 0.0);
  EXPECT_EQ(code_of([] { mean_offset_closed_form({0.2, 0.0, 1.0}); }), ErrorCode::ZeroPitch);
}

TEST(MeanOffset, QuadratureExamples) {
  MeanOffset m = mean_offset_quadrature({0.2, 0.5, 1.0});
  EXPECT_NEAR(m.u1, 0.0, 1e-8);
  EXPECT_NEAR(m.u2, 0.0, 1e-8);
  m = mean_offset_quadrature({0.1, 0.5, 1.0});
  EXPECT_NEAR(m.u1, 0.0, 1e-8);
  m = mean_offset_quadrature({0.2, 1.0, 1.0});
  EXPECT_NEAR(m.u1, 0.15, 1e-8);
  EXPECT_NEAR(m.u2, 0.0, 1e-8);
}

TEST(MeanOffset, ClosedFormMatchesQuadratureOnGrid) {
  int checked = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const HelixParams p{0.25 * i / 9.0, 0.25 + 0.75 * j / 9.0, 1.0};
      if (!helix_jacobian_positive(p)) continue;
      ASSERT_NEAR(mean_offset_quadrature(p).u1, mean_offset_closed_form(p).u1, 1e-8)
          << "a=" << p.a << " b=" << p.b;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 85);  // the other 15 have kappa (a + r) > 1
}

TEST(MeanOffset, QuadratureNeedsPositiveJacobian) {
  const HelixParams p{0.66, 0.1, 1.0};
  EXPECT_FALSE(helix_jacobian_positive(p));
  EXPECT_EQ(code_of([&] { mean_offset_quadrature(p); }), ErrorCode::JacobianSignViolation);
}

TEST(MeanOffset, ProjectionRegionIsTheWholeEllipseInRegime) {
  // With a positive Jacobian and a small offset every ellipse point projects to H(0).
  const HelixParams p{0.2, 1.0, 1.0};
  EXPECT_NEAR(mean_offset_projection_region(p).u1, 0.15, 1e-8);
  EXPECT_TRUE(projects_to_origin(p, 0.5, 0.0));
  EXPECT_TRUE(projects_to_origin(p, 0.0, 0.0));
}

TEST(MeanOffset, ProjectionRegionCutsTheEllipseForSteepHelices) {
  // Far across the axis the nearest helix point is no longer H(0).
  const HelixParams p{0.6, 0.35, 1.0};
  EXPECT_FALSE(projects_to_origin(p, 1.5, 0.0));
  EXPECT_TRUE(projects_to_origin(p, 0.1, 0.0));
}

TEST(PitchSearch, ClosedFormRegime) {
  const PitchResult r = principal_pitch_search(0.1, 1.0);
  EXPECT_TRUE(r.found);
  EXPECT_TRUE(r.closed_form);
  EXPECT_EQ(r.b, 0.5);
  EXPECT_LE(r.residual, 1e-12);
}

TEST(PitchSearch, OutOfRegime) {
  EXPECT_EQ(code_of([] { principal_pitch_search(0.7, 1.0); }), ErrorCode::OutOfRegime);
}

TEST(PitchSearch, SteepRegimeRoot) {
  const PitchResult r = principal_pitch_search(0.6, 1.0);
  ASSERT_TRUE(r.found);
  EXPECT_FALSE(r.closed_form);
  EXPECT_LT(r.b, 0.5);
  EXPECT_NEAR(r.b, 0.35, 0.01);
  EXPECT_LE(r.residual, 1e-8);
  EXPECT_LE(std::abs(mean_offset_projection_region({0.6, r.b, 1.0}).u1), 1e-8);
}

TEST(PitchSearch, NearLimitRootIsNotAdmissible) {
  const PitchResult r = principal_pitch_search(0.66, 1.0);
  ASSERT_TRUE(r.found);
  EXPECT_GT(r.b, 0.05);
  EXPECT_LT(r.b, 0.3);
  const HelixParams p{0.66, r.b, 1.0};
  EXPECT_FALSE(helix_jacobian_positive(p));
  EXPECT_FALSE(admissibility_check(make_cylinder(1.0), helix_trace(p, 1, 128), 16).ok);
}

TEST(HelixTrace, PrincipalRegimeResidual) {
  for (double a : {0.05, 0.1, 0.2, 0.25}) {
    const HelixParams p{a, 0.5, 1.0};
    const auto res = self_consistency_residual(make_cylinder(1.0), helix_trace(p, 1, 256), 8);
    ASSERT_EQ(res.size(), 8u);
    for (const auto& [s, v] : res) EXPECT_LE(v, 1e-8) << "a=" << a << " s=" << s;
  }
}
