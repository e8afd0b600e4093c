#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pcurve/frame.hpp"

namespace pcurve {

using Point2 = Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Shapes, in their canonical placement.

// x1, x2 >= 0, unbounded.
struct Quadrant2D {};

// Simple polygon, stored counter-clockwise.
struct Polygon2D {
  std::vector<Point2> vertices;
};

// {x : (x1, x2) in base, 0 <= x3 <= height}.
struct Prism {
  std::vector<Point2> base;
  double height = 1.0;
};

// x1^2 + x2^2 <= radius^2, x3 unbounded.
struct Cylinder {
  double radius = 1.0;
};

// |x| <= radius in R^dim.
struct Ball {
  double radius = 1.0;
  int dim = 3;
};

// Axis-aligned box in R^d.
struct Cuboid {
  Vector min;
  Vector max;
};

// Quarter of the disk of given radius in the first quadrant.
struct QuarterDisk {
  double radius = 1.0;
};

using Shape =
    std::variant<Quadrant2D, Polygon2D, Prism, Cylinder, Ball, Cuboid, QuarterDisk>;

// Support of a uniform density: a shape plus a rotation. World coordinates
// are x = rotation * canonical.
class Domain {
 public:
  Domain(Shape shape, Matrix rotation);
  explicit Domain(Shape shape);

  const Shape& shape() const { return shape_; }
  const Matrix& rotation() const { return rotation_; }
  int dim() const { return dim_; }
  bool bounded() const;
  std::string_view type_name() const;

  // Composes an extra rotation on the left.
  Domain rotated(const Matrix& q) const;

  Vector to_canonical(const Vector& x) const { return rotation_.transpose() * x; }
  Vector to_world(const Vector& x) const { return rotation_ * x; }

 private:
  Shape shape_;
  Matrix rotation_;
  int dim_ = 0;
};

Domain make_quadrant();
Domain make_polygon(std::vector<Point2> vertices);
Domain make_prism(std::vector<Point2> base, double height);
Domain make_cylinder(double radius);
Domain make_ball(double radius, int dim = 3);
Domain make_cuboid(Vector min, Vector max);
Domain make_quarter_disk(double radius);

// Closed-set membership; `tol` is an absolute slack on the defining inequalities.
bool contains(const Domain& dom, const Vector& x, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Cross-sections in normal coordinates u.

struct SectionInterval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
};

// Counter-clockwise, collinear vertices removed.
struct SectionPolygon {
  std::vector<Point2> vertices;
};

// {u : (u - center)^T shape (u - center) <= 1}, shape SPD.
struct SectionEllipse {
  Point2 center = Point2::Zero();
  Eigen::Matrix2d shape = Eigen::Matrix2d::Identity();

  static SectionEllipse axis_aligned(const Point2& center, double semi1, double semi2);
  double area() const;
};

using CrossSection = std::variant<SectionInterval, SectionPolygon, SectionEllipse>;

// Slice of the domain by the normal hyperplane at `position`, expressed in
// the coordinates of f's normals. For non-convex slices the connected piece
// containing the curve point is returned.
CrossSection cross_section(const Domain& dom, const Vector& position, const Frame& f);

// Membership of u in a section (closed), with absolute tolerance.
bool section_contains(const CrossSection& section, const Vector& u, double tol = 1e-12);

// max over the section of <w, u>; Jacobian checks use w = kappa.
double section_support(const CrossSection& section, const Vector& w);

int section_dim(const CrossSection& section);

// Removes collinear vertices (tolerance 1e-12 relative to the local scale)
// and orients counter-clockwise.
std::vector<Point2> clean_polygon(std::vector<Point2> vertices);

double polygon_signed_area(const std::vector<Point2>& vertices);
bool polygon_is_simple(const std::vector<Point2>& vertices);

// ---------------------------------------------------------------------------
// Sampling.

struct Truncation {
  double lower = 0.0;
  double upper = 0.0;
};

// n uniform points as the columns of a d x n matrix. Unbounded shapes need a
// truncation: the x3 range for cylinders, the coordinate range for the
// quadrant (applied to both axes).
Matrix sample_uniform(const Domain& dom, std::int64_t n, std::uint64_t seed,
                      std::optional<Truncation> truncation = std::nullopt);

// Lebesgue measure of the (truncated) domain.
double domain_volume(const Domain& dom, std::optional<Truncation> truncation = std::nullopt);

// Domain specification files (JSON).
Domain domain_from_json_text(std::string_view text);
Domain load_domain_file(const std::string& path);
std::string domain_to_json_text(const Domain& dom);

}  // namespace pcurve
