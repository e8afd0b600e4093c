#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pcurve/domain.hpp"
#include "pcurve/error.hpp"
#include "pcurve/frame.hpp"
#include "pcurve/helix.hpp"

using namespace pcurve;

namespace {

constexpr double kPi = std::numbers::pi;

Frame planar_frame(double zeta) {
  return frame_from_angles(SphericalAngles(Vector::Constant(1, zeta)));
}

Frame frame3(double z1, double z2) {
  return frame_from_angles(SphericalAngles(Vector(Eigen::Vector2d(z1, z2))));
}

Domain triangle_prism(double h) {
  return make_prism({{0.0, 1.0}, {std::sqrt(3.0) / 2, -0.5}, {-2.0, -0.5}}, h);
}

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

// Points p + sum u_i N_i for u uniform in the section's bounding box.
void check_section_consistency(const Domain& dom, const Vector& p, const Frame& f, int seed) {
  const CrossSection sec = cross_section(dom, p, f);
  std::mt19937_64 rng(seed);
  const int m = f.dim() - 1;
  // Rays from the curve point: inside up to the support, outside a bit beyond.
  std::normal_distribution<double> g;
  int inside = 0;
  for (int k = 0; k < 1000; ++k) {
    Vector dir(m);
    for (int i = 0; i < m; ++i) dir[i] = g(rng);
    dir.normalize();
    double reach = 0.0;
    // Largest t with t*dir in the section, by bisection on membership.
    double lo = 0.0;
    double hi = 1.0;
    while (section_contains(sec, hi * dir)) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (section_contains(sec, mid * dir) ? lo : hi) = mid;
    }
    reach = lo;
    std::uniform_real_distribution<double> frac(0.0, 0.999);
    const Vector u = frac(rng) * reach * dir;
    const Vector x = p + f.normals() * u;
    ASSERT_TRUE(contains(dom, x, 1e-9)) << "u inside the section maps outside";
    const Vector out = p + f.normals() * (1.01 * reach * dir);
    if (reach > 1e-6) {
      ASSERT_FALSE(contains(dom, out, 1e-9)) << "u beyond the section maps inside";
    }
    ++inside;
  }
  EXPECT_EQ(inside, 1000);
}

}  // namespace

TEST(Domain, QuadrantDiagonalSection) {
  const auto sec = std::get<SectionInterval>(
      cross_section(make_quadrant(), Eigen::Vector2d(1, 1), planar_frame(kPi / 4)));
  EXPECT_NEAR(sec.lower, -std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(sec.upper, std::sqrt(2.0), 1e-14);
}

TEST(Domain, QuadrantBoundarySection) {
  const auto sec = std::get<SectionInterval>(
      cross_section(make_quadrant(), Eigen::Vector2d(1, 0), planar_frame(kPi / 2)));
  EXPECT_NEAR(sec.lower, 0.0, 1e-15);
  EXPECT_NEAR(sec.upper, 1.0, 1e-15);
}

TEST(Domain, QuadrantRejectsDirectionsOutsideFirstQuadrant) {
  EXPECT_EQ(code_of([] {
              cross_section(make_quadrant(), Eigen::Vector2d(1, 1), planar_frame(2.0));
            }),
            ErrorCode::UnboundedSection);
}

TEST(Domain, CylinderHelixSectionIsTheOffsetEllipse) {
  const HelixParams p{0.2, 0.5, 1.0};
  const HelixState h = helix_state(p, 0.0);
  const Frame f = frame_from_angles(angles_from_tangent(h.frenet.tangent()));
  const auto sec = std::get<SectionEllipse>(cross_section(make_cylinder(1.0), h.position, f));
  // Express the returned ellipse in Frenet (N, B) coordinates and compare.
  Eigen::Matrix2d r;
  r << f.normal(0).dot(h.frenet.normal(0)), f.normal(1).dot(h.frenet.normal(0)),
      f.normal(0).dot(h.frenet.normal(1)), f.normal(1).dot(h.frenet.normal(1));
  const Eigen::Vector2d center = r * sec.center;
  const Eigen::Matrix2d shape = r * sec.shape * r.transpose();
  const SectionEllipse expect = helix_section(p);
  EXPECT_LT((center - expect.center).norm(), 1e-13);
  EXPECT_LT((shape - expect.shape).norm(), 1e-12);
}

TEST(Domain, ContainsExamples) {
  const Domain ball = make_ball(1.0, 3);
  EXPECT_TRUE(contains(ball, Eigen::Vector3d(0, 0, 0)));
  EXPECT_TRUE(contains(ball, Eigen::Vector3d(1, 0, 0)));
  const Domain cube = make_cuboid(Vector::Zero(3), Vector::Ones(3));
  EXPECT_FALSE(contains(cube, Eigen::Vector3d(2, 0, 0)));
  EXPECT_TRUE(contains(make_quadrant(), Eigen::Vector2d(0, 5)));
  EXPECT_FALSE(contains(make_quadrant(), Eigen::Vector2d(-0.1, 5)));
  EXPECT_TRUE(contains(make_quarter_disk(1.0), Eigen::Vector2d(0.6, 0.6)));
  EXPECT_FALSE(contains(make_quarter_disk(1.0), Eigen::Vector2d(0.8, 0.8)));
}

TEST(Domain, RejectsBadShapes) {
  EXPECT_EQ(code_of([] { make_ball(-1.0, 3); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { make_polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { make_polygon({{0, 0}, {1, 0}, {2, 0}}); }), ErrorCode::DegeneratePolygon);
}

TEST(Domain, PolygonIsStoredCounterClockwise) {
  const Domain dom = make_polygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
  EXPECT_GT(polygon_signed_area(std::get<Polygon2D>(dom.shape()).vertices), 0.0);
}

TEST(Sampling, CuboidMeans) {
  const Domain cube = make_cuboid(Vector::Zero(3), Vector::Ones(3));
  const Matrix pts = sample_uniform(cube, 1'000'000, 3);
  const Vector mean = pts.rowwise().mean();
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(mean[i], 0.5, 0.002);
}

TEST(Sampling, BallSecondMoment) {
  const Matrix pts = sample_uniform(make_ball(1.0, 3), 1'000'000, 4);
  EXPECT_NEAR(pts.colwise().squaredNorm().mean(), 0.6, 0.002);
}

TEST(Sampling, SameSeedSamePoints) {
  const Domain dom = triangle_prism(2.0);
  EXPECT_EQ(sample_uniform(dom, 1000, 5), sample_uniform(dom, 1000, 5));
  EXPECT_NE(sample_uniform(dom, 1000, 5), sample_uniform(dom, 1000, 6));
}

TEST(Sampling, UnboundedNeedsTruncation) {
  EXPECT_EQ(code_of([] { sample_uniform(make_cylinder(1.0), 10, 1); }), ErrorCode::MissingTruncation);
  EXPECT_EQ(code_of([] { sample_uniform(make_quadrant(), 10, 1); }), ErrorCode::MissingTruncation);
  const Matrix pts = sample_uniform(make_cylinder(1.0), 1000, 1, Truncation{-2.0, 3.0});
  EXPECT_GE(pts.row(2).minCoeff(), -2.0);
  EXPECT_LE(pts.row(2).maxCoeff(), 3.0);
}

TEST(Sampling, SubBoxFractionsMatchVolumes) {
  const Domain dom = triangle_prism(2.0);
  const int n = 400'000;
  const Matrix pts = sample_uniform(dom, n, 8);
  const double vol = domain_volume(dom);
  // Box [-0.5, 0.3] x [-0.4, 0.4] x [0.5, 1.5] lies inside the prism.
  int hits = 0;
  for (int k = 0; k < n; ++k) {
    const auto x = pts.col(k);
    hits += x[0] >= -0.5 && x[0] <= 0.3 && x[1] >= -0.4 && x[1] <= 0.4 && x[2] >= 0.5 && x[2] <= 1.5;
  }
  const double p = 0.8 * 0.8 * 1.0 / vol;
  const double sigma = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(static_cast<double>(hits) / n, p, 4 * sigma);
}

TEST(Sampling, VolumesOfShapes) {
  EXPECT_NEAR(domain_volume(make_ball(1.0, 3)), 4.0 / 3.0 * kPi, 1e-12);
  EXPECT_NEAR(domain_volume(make_ball(2.0, 2)), 4.0 * kPi, 1e-12);
  EXPECT_NEAR(domain_volume(make_quarter_disk(1.0)), kPi / 4, 1e-12);
  EXPECT_NEAR(domain_volume(triangle_prism(2.0)), 2.0 * 0.5 * (2 + std::sqrt(3.0) / 2) * 1.5, 1e-12);
  EXPECT_NEAR(domain_volume(make_cylinder(1.0), Truncation{0, 3}), 3 * kPi, 1e-12);
}

TEST(CrossSection, RandomPointsRespectMembership) {
  check_section_consistency(make_polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), Eigen::Vector2d(0.3, 0.6),
                            planar_frame(0.9), 1);
  check_section_consistency(make_quarter_disk(1.0), Eigen::Vector2d(0.4, 0.3), planar_frame(2.0), 2);
  check_section_consistency(make_ball(1.0, 3), Eigen::Vector3d(0.2, -0.1, 0.3), frame3(1.1, 0.4), 3);
  check_section_consistency(make_cuboid(Vector::Zero(3), Vector(Eigen::Vector3d(2, 1, 1))),
                            Eigen::Vector3d(1, 0.5, 0.5), frame3(0.5, 1.2), 4);
  check_section_consistency(make_cylinder(1.0), Eigen::Vector3d(0.3, 0.1, 0.0), frame3(0.9, 1.3), 5);
  check_section_consistency(triangle_prism(6.0), Eigen::Vector3d(-0.3, 0.0, 3.0), frame3(1.4, 1.5), 6);
}

TEST(CrossSection, PrismVerticesLieOnVerticalEdges) {
  const Domain dom = triangle_prism(6.0);
  const Vector p = Eigen::Vector3d(-0.3, 0.1, 3.0);
  const Frame f = frame3(1.35, 1.45);
  const auto sec = std::get<SectionPolygon>(cross_section(dom, p, f));
  ASSERT_EQ(sec.vertices.size(), 3u);
  const std::vector<Point2> base = std::get<Prism>(dom.shape()).base;
  for (const Point2& u : sec.vertices) {
    const Vector x = p + f.normals() * Vector(u);
    double best = 1e300;
    for (const Point2& e : base) best = std::min(best, (x.head<2>() - e).norm());
    EXPECT_LT(best, 1e-10);
    EXPECT_GT(x[2], 0.0);
    EXPECT_LT(x[2], 6.0);
  }
}

TEST(CrossSection, TiltedPlaneNearBaseHitsIt) {
  const Domain dom = triangle_prism(6.0);
  EXPECT_EQ(code_of([&] { cross_section(dom, Eigen::Vector3d(-0.3, 0, 0.1), frame3(1.2, 1.5)); }),
            ErrorCode::SliceHitsBase);
}

TEST(CrossSection, PointOutsideIsReported) {
  EXPECT_EQ(code_of([] {
              cross_section(make_ball(1.0, 3), Eigen::Vector3d(2, 0, 0), frame3(1.0, 1.0));
            }),
            ErrorCode::OutOfDomain);
}

TEST(CrossSection, RotatedDomainMatchesRotatedQuery) {
  // Rotating the domain and the query together leaves the section unchanged.
  Eigen::Matrix3d q = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  const Domain cube = make_cuboid(Vector::Zero(3), Vector::Ones(3));
  const Domain rot = cube.rotated(q);
  const Vector p = Eigen::Vector3d(0.4, 0.5, 0.6);
  const Frame f = frame3(1.0, 0.8);
  const Frame fr(Matrix(q * f.columns()));
  const CrossSection s1 = cross_section(cube, p, f);
  const CrossSection s2 = cross_section(rot, q * p, fr);
  EXPECT_EQ(std::get<SectionPolygon>(s1).vertices.size(), std::get<SectionPolygon>(s2).vertices.size());
  EXPECT_NEAR(polygon_signed_area(std::get<SectionPolygon>(s1).vertices),
              polygon_signed_area(std::get<SectionPolygon>(s2).vertices), 1e-12);
}

TEST(DomainJson, ParsesAllTypes) {
  EXPECT_EQ(domain_from_json_text(R"({"type":"quadrant2d"})").type_name(), "quadrant2d");
  EXPECT_EQ(domain_from_json_text(R"({"type":"cylinder","r":2})").dim(), 3);
  EXPECT_EQ(domain_from_json_text(R"({"type":"ball","r":1,"dim":4})").dim(), 4);
  EXPECT_EQ(domain_from_json_text(R"({"type":"cuboid","min":[0,0],"max":[1,2]})").dim(), 2);
  const Domain prism = domain_from_json_text(
      R"({"type":"prism","base":[[0,1,0],[0.8660254037844386,-0.5,0],[-2,-0.5,0]],"height":3})");
  EXPECT_EQ(std::get<Prism>(prism.shape()).base.size(), 3u);
  EXPECT_EQ(std::get<Prism>(prism.shape()).height, 3.0);
}

TEST(DomainJson, RoundTrip) {
  const Domain a = triangle_prism(2.5);
  const Domain b = domain_from_json_text(domain_to_json_text(a));
  EXPECT_EQ(domain_to_json_text(a), domain_to_json_text(b));
}

TEST(DomainJson, Errors) {
  EXPECT_EQ(code_of([] { domain_from_json_text("{"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { domain_from_json_text(R"({"type":"torus"})"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { domain_from_json_text(R"({"type":"cylinder"})"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { load_domain_file("/nonexistent/domain.json"); }), ErrorCode::IoError);
}

TEST(DomainJson, ShippedDomainFilesParse) {
  for (const char* name : {"quadrant", "unit_square", "quarter_disk", "cylinder", "ball3", "cuboid",
                           "prism"}) {
    EXPECT_NO_THROW(load_domain_file(std::string(PCURVE_DATA_DIR) + "/domains/" + name + ".json"))
        << name;
  }
}
