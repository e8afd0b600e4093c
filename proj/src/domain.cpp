#include "pcurve/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "pcurve/error.hpp"

namespace pcurve {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cross2(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

int shape_dim(const Shape& shape) {
  return std::visit(
      overloaded{
          [](const Quadrant2D&) { return 2; },
          [](const Polygon2D&) { return 2; },
          [](const Prism&) { return 3; },
          [](const Cylinder&) { return 3; },
          [](const Ball& b) { return b.dim; },
          [](const Cuboid& c) { return static_cast<int>(c.min.size()); },
          [](const QuarterDisk&) { return 2; },
      },
      shape);
}

// Point-in-polygon by winding parity; boundary points within tol count as inside.
bool polygon_contains(const std::vector<Point2>& poly, const Point2& p, double tol) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = poly[j];
    const Point2& b = poly[i];
    const Point2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 > 0.0) {
      const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
      if ((a + t * ab - p).norm() <= tol) return true;
    }
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const double d1 = cross2(q2 - q1, p1 - q1);
  const double d2 = cross2(q2 - q1, p2 - q1);
  const double d3 = cross2(p2 - p1, q1 - p1);
  const double d4 = cross2(p2 - p1, q2 - p1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](const Point2& a, const Point2& b, const Point2& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

std::vector<Point2> validated_polygon(std::vector<Point2> vertices, const char* what) {
  if (vertices.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " needs at least 3 vertices");
  }
  if (!polygon_is_simple(vertices)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " is not simple");
  }
  if (std::abs(polygon_signed_area(vertices)) < 1e-14) {
    throw Error(ErrorCode::DegeneratePolygon, std::string(what) + " has zero area");
  }
  if (polygon_signed_area(vertices) < 0.0) std::reverse(vertices.begin(), vertices.end());
  return vertices;
}

// Line p + u n (2D) against the half-plane a.x <= c; narrows [lo, hi].
void clip_halfplane(const Vector& p, const Vector& n, const Vector& a, double c, double& lo,
                    double& hi) {
  const double slope = a.dot(n);
  const double rhs = c - a.dot(p);
  const double scale = 1.0 + std::abs(c) + a.norm() * p.norm();
  if (std::abs(slope) < 1e-15) {
    if (rhs < -1e-12 * scale) {
      lo = 1.0;
      hi = -1.0;
    }
    return;
  }
  const double bound = rhs / slope;
  if (slope > 0.0) {
    hi = std::min(hi, bound);
  } else {
    lo = std::max(lo, bound);
  }
}

SectionInterval finite_interval(double lo, double hi) {
  constexpr double kHuge = 1e12;
  if (!(std::abs(lo) < kHuge) || !(std::abs(hi) < kHuge)) {
    throw Error(ErrorCode::UnboundedSection, "cross-section is unbounded");
  }
  if (!(hi - lo > 1e-14)) {
    throw Error(ErrorCode::EmptySection, "cross-section has zero width");
  }
  return SectionInterval{lo, hi};
}

// Connected piece of {u : p + u n in polygon} containing u = 0.
SectionInterval polygon_line_section(const std::vector<Point2>& poly, const Point2& p,
                                     const Point2& n) {
  std::vector<double> cuts;
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % m];
    const Point2 e = b - a;
    const double den = cross2(n, e);
    if (std::abs(den) < 1e-300) continue;
    // p + u n = a + t e
    const Point2 w = a - p;
    const double u = cross2(w, e) / den;
    const double t = cross2(w, n) / den;
    if (t >= -1e-12 && t <= 1.0 + 1e-12) cuts.push_back(u);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double x, double y) { return std::abs(x - y) <= 1e-13 * (1.0 + std::abs(x)); }),
             cuts.end());
  if (cuts.size() < 2) throw Error(ErrorCode::EmptySection, "line misses the polygon");
  const double scale = 1.0 + p.norm();
  auto inside_mid = [&](std::size_t j) {
    const double mid = 0.5 * (cuts[j] + cuts[j + 1]);
    return polygon_contains(poly, p + mid * n, 1e-13 * scale);
  };
  // Find a piece touching 0 and grow it over consecutive inside pieces.
  std::optional<std::size_t> start;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    if (cuts[j] <= 1e-12 * scale && cuts[j + 1] >= -1e-12 * scale && inside_mid(j)) {
      start = j;
      if (cuts[j + 1] > 1e-12 * scale) break;
    }
  }
  if (!start) throw Error(ErrorCode::EmptySection, "curve point is not inside the polygon slice");
  std::size_t lo = *start;
  std::size_t hi = *start;
  while (lo > 0 && inside_mid(lo - 1)) --lo;
  while (hi + 2 < cuts.size() && inside_mid(hi + 1)) ++hi;
  return finite_interval(cuts[lo], cuts[hi + 1]);
}

// Sutherland-Hodgman clip of a convex polygon by a.u <= c.
std::vector<Point2> clip_polygon(const std::vector<Point2>& poly, const Point2& a, double c) {
  std::vector<Point2> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& cur = poly[i];
    const Point2& nxt = poly[(i + 1) % n];
    const double fc = a.dot(cur) - c;
    const double fn = a.dot(nxt) - c;
    if (fc <= 0.0) out.push_back(cur);
    if ((fc < 0.0 && fn > 0.0) || (fc > 0.0 && fn < 0.0)) {
      const double t = fc / (fc - fn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

SectionPolygon finish_polygon(std::vector<Point2> vertices) {
  if (vertices.size() < 3) throw Error(ErrorCode::EmptySection, "cross-section is empty");
  std::vector<Point2> cleaned = clean_polygon(std::move(vertices));
  if (cleaned.size() < 3 || std::abs(polygon_signed_area(cleaned)) < 1e-14) {
    throw Error(ErrorCode::EmptySection, "cross-section has zero area");
  }
  return SectionPolygon{std::move(cleaned)};
}

// Quadrant slice from u- = -x2 / cos(zeta), u+ = x1 / sin(zeta).
SectionInterval quadrant_section(const Vector& p, const Frame& f) {
  const Vector t = f.tangent();
  const double zeta = std::atan2(t[1], t[0]);
  if (!(zeta > 0.0 && zeta <= std::numbers::pi / 2 + 1e-15)) {
    throw Error(ErrorCode::UnboundedSection, "quadrant slice needs 0 < zeta <= pi/2");
  }
  const double s = std::sin(zeta);
  const double c = std::cos(zeta);
  const double upper = p[0] / s;
  const double lower = c > 0.0 ? -p[1] / c : -std::numeric_limits<double>::infinity();
  // Frame normals may be the negative of (-sin, cos).
  const Point2 standard(-s, c);
  const double orient = standard.dot(Point2(f.normal(0)[0], f.normal(0)[1]));
  if (orient > 0.0) return finite_interval(lower, upper);
  return finite_interval(-upper, -lower);
}

SectionInterval section_2d(const Shape& shape, const Vector& p, const Frame& f) {
  const Vector n = f.normal(0);
  const Vector e1 = Vector::Unit(2, 0);
  const Vector e2 = Vector::Unit(2, 1);
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      overloaded{
          [&](const Quadrant2D&) { return quadrant_section(p, f); },
          [&](const Polygon2D& poly) {
            return polygon_line_section(poly.vertices, Point2(p[0], p[1]), Point2(n[0], n[1]));
          },
          [&](const Ball& b) {
            const double pn = p.dot(n);
            const double disc = pn * pn - p.squaredNorm() + b.radius * b.radius;
            if (!(disc > 0.0)) throw Error(ErrorCode::EmptySection, "line misses the disk");
            const double h = std::sqrt(disc);
            return finite_interval(-pn - h, -pn + h);
          },
          [&](const Cuboid& c) {
            double lo = -inf;
            double hi = inf;
            for (int i = 0; i < 2; ++i) {
              const Vector ei = Vector::Unit(2, i);
              clip_halfplane(p, n, ei, c.max[i], lo, hi);
              clip_halfplane(p, n, -ei, -c.min[i], lo, hi);
            }
            return finite_interval(lo, hi);
          },
          [&](const QuarterDisk& q) {
            double lo = -inf;
            double hi = inf;
            clip_halfplane(p, n, -e1, 0.0, lo, hi);
            clip_halfplane(p, n, -e2, 0.0, lo, hi);
            const double pn = p.dot(n);
            const double disc = pn * pn - p.squaredNorm() + q.radius * q.radius;
            if (!(disc > 0.0)) throw Error(ErrorCode::EmptySection, "line misses the disk");
            const double h = std::sqrt(disc);
            lo = std::max(lo, -pn - h);
            hi = std::min(hi, -pn + h);
            return finite_interval(lo, hi);
          },
          [&](const auto&) -> SectionInterval {
            throw Error(ErrorCode::DimensionMismatch, "shape is not two-dimensional");
          },
      },
      shape);
}

// Prism slice: each vertical edge E_i + v e3 meets the plane where
// u1 N1 + u2 N2 - v e3 = E_i - p. For the spherical-angle frame the system
// matrix [N1, N2, -e3] is lower triangular and is solved by forward substitution.
SectionPolygon prism_section(const Prism& prism, const Vector& p, const Frame& f) {
  const Vector n1 = f.normal(0);
  const Vector n2 = f.normal(1);
  if (std::abs(f.tangent()[2]) < 1e-12) {
    throw Error(ErrorCode::UnboundedSection, "normal plane is vertical");
  }
  Eigen::Matrix3d system;
  system.col(0) = n1;
  system.col(1) = n2;
  system.col(2) = -Eigen::Vector3d::UnitZ();
  const bool triangular = std::abs(system(0, 1)) <= 1e-14;
  const Eigen::PartialPivLU<Eigen::Matrix3d> lu(system);
  const double tol = 1e-12 * (1.0 + prism.height);
  std::vector<Point2> vertices;
  vertices.reserve(prism.base.size());
  for (const Point2& e : prism.base) {
    const Eigen::Vector3d rhs(e.x() - p[0], e.y() - p[1], -p[2]);
    Eigen::Vector3d sol;
    if (triangular) {
      sol[0] = rhs[0] / system(0, 0);
      sol[1] = (rhs[1] - system(1, 0) * sol[0]) / system(1, 1);
      sol[2] = -(rhs[2] - system(2, 0) * sol[0] - system(2, 1) * sol[1]);
    } else {
      sol = lu.solve(rhs);
    }
    const double v = sol[2];
    if (v < -tol || v > prism.height + tol) {
      throw Error(ErrorCode::SliceHitsBase, "normal plane intersects a base of the prism");
    }
    vertices.emplace_back(sol[0], sol[1]);
  }
  return finish_polygon(std::move(vertices));
}

SectionEllipse cylinder_section(const Cylinder& cyl, const Vector& p, const Frame& f) {
  Eigen::Matrix<double, 3, 2> n;
  n.col(0) = f.normal(0);
  n.col(1) = f.normal(1);
  Eigen::Matrix<double, 3, 2> nh = n;
  nh.row(2).setZero();
  const Eigen::Vector3d ph(p[0], p[1], 0.0);
  const Eigen::Matrix2d a = nh.transpose() * nh;
  if (a.determinant() < 1e-14) {
    throw Error(ErrorCode::UnboundedSection, "normal plane contains the cylinder axis direction");
  }
  const Eigen::Vector2d b = nh.transpose() * ph;
  const double c0 = ph.squaredNorm() - cyl.radius * cyl.radius;
  const Eigen::Vector2d center = -a.ldlt().solve(b);
  const double rho2 = b.dot(-center) - c0;
  if (!(rho2 > 0.0)) throw Error(ErrorCode::EmptySection, "plane misses the cylinder");
  return SectionEllipse{center, a / rho2};
}

CrossSection section_3d(const Shape& shape, const Vector& p, const Frame& f) {
  return std::visit(
      overloaded{
          [&](const Prism& prism) -> CrossSection { return prism_section(prism, p, f); },
          [&](const Cylinder& cyl) -> CrossSection { return cylinder_section(cyl, p, f); },
          [&](const Ball& b) -> CrossSection {
            const double pt = p.dot(f.tangent());
            const double rho2 = b.radius * b.radius - pt * pt;
            if (!(rho2 > 0.0)) throw Error(ErrorCode::EmptySection, "plane misses the ball");
            const Point2 center(-p.dot(f.normal(0)), -p.dot(f.normal(1)));
            return SectionEllipse{center, Eigen::Matrix2d::Identity() / rho2};
          },
          [&](const Cuboid& c) -> CrossSection {
            const double big = 2.0 * (p.norm() + (c.max - c.min).norm()) + 1.0;
            std::vector<Point2> poly{{-big, -big}, {big, -big}, {big, big}, {-big, big}};
            const Vector n1 = f.normal(0);
            const Vector n2 = f.normal(1);
            for (int i = 0; i < 3 && !poly.empty(); ++i) {
              // x_i = p_i + u1 n1_i + u2 n2_i within [min_i, max_i]
              const Point2 a(n1[i], n2[i]);
              poly = clip_polygon(poly, a, c.max[i] - p[i]);
              if (!poly.empty()) poly = clip_polygon(poly, -a, p[i] - c.min[i]);
            }
            return finish_polygon(std::move(poly));
          },
          [&](const auto&) -> CrossSection {
            throw Error(ErrorCode::DimensionMismatch, "shape is not three-dimensional");
          },
      },
      shape);
}

}  // namespace

// ---------------------------------------------------------------------------

Domain::Domain(Shape shape, Matrix rotation)
    : shape_(std::move(shape)), rotation_(std::move(rotation)), dim_(shape_dim(shape_)) {
  if (rotation_.rows() != dim_ || rotation_.cols() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "domain rotation has the wrong size");
  }
  const double err =
      (rotation_.transpose() * rotation_ - Matrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
  if (err > 1e-10) {
    throw Error(ErrorCode::NonOrthogonalRotation, "domain rotation is not orthogonal");
  }
}

Domain::Domain(Shape shape) : Domain(shape, Matrix::Identity(shape_dim(shape), shape_dim(shape))) {}

bool Domain::bounded() const {
  return !std::holds_alternative<Quadrant2D>(shape_) && !std::holds_alternative<Cylinder>(shape_);
}

std::string_view Domain::type_name() const {
  return std::visit(overloaded{
                        [](const Quadrant2D&) { return std::string_view("quadrant2d"); },
                        [](const Polygon2D&) { return std::string_view("polygon2d"); },
                        [](const Prism&) { return std::string_view("prism"); },
                        [](const Cylinder&) { return std::string_view("cylinder"); },
                        [](const Ball&) { return std::string_view("ball"); },
                        [](const Cuboid&) { return std::string_view("cuboid"); },
                        [](const QuarterDisk&) { return std::string_view("quarter_disk"); },
                    },
                    shape_);
}

Domain Domain::rotated(const Matrix& q) const { return Domain(shape_, q * rotation_); }

Domain make_quadrant() { return Domain(Quadrant2D{}); }

Domain make_polygon(std::vector<Point2> vertices) {
  return Domain(Polygon2D{validated_polygon(std::move(vertices), "polygon")});
}

Domain make_prism(std::vector<Point2> base, double height) {
  if (!(height > 0.0)) throw Error(ErrorCode::InvalidArgument, "prism height must be positive");
  return Domain(Prism{validated_polygon(std::move(base), "prism base"), height});
}

Domain make_cylinder(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "cylinder radius must be positive");
  return Domain(Cylinder{radius});
}

Domain make_ball(double radius, int dim) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
  if (dim < 2) throw Error(ErrorCode::InvalidArgument, "ball dimension must be >= 2");
  return Domain(Ball{radius, dim});
}

Domain make_cuboid(Vector min, Vector max) {
  if (min.size() != max.size() || min.size() < 2) {
    throw Error(ErrorCode::DimensionMismatch, "cuboid corners must have equal size >= 2");
  }
  if (!((max - min).minCoeff() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "cuboid must have positive extent");
  }
  return Domain(Cuboid{std::move(min), std::move(max)});
}

Domain make_quarter_disk(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  return Domain(QuarterDisk{radius});
}

bool contains(const Domain& dom, const Vector& x_world, double tol) {
  if (x_world.size() != dom.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "point dimension differs from domain");
  }
  const Vector x = dom.to_canonical(x_world);
  return std::visit(
      overloaded{
          [&](const Quadrant2D&) { return x[0] >= -tol && x[1] >= -tol; },
          [&](const Polygon2D& poly) {
            return polygon_contains(poly.vertices, Point2(x[0], x[1]), tol);
          },
          [&](const Prism& prism) {
            return x[2] >= -tol && x[2] <= prism.height + tol &&
                   polygon_contains(prism.base, Point2(x[0], x[1]), tol);
          },
          [&](const Cylinder& c) {
            return std::hypot(x[0], x[1]) <= c.radius + tol;
          },
          [&](const Ball& b) { return x.norm() <= b.radius + tol; },
          [&](const Cuboid& c) {
            return (x - c.min).minCoeff() >= -tol && (c.max - x).minCoeff() >= -tol;
          },
          [&](const QuarterDisk& q) {
            return x[0] >= -tol && x[1] >= -tol && x.norm() <= q.radius + tol;
          },
      },
      dom.shape());
}

CrossSection cross_section(const Domain& dom, const Vector& position, const Frame& f) {
  if (position.size() != dom.dim() || f.dim() != dom.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "position/frame dimension differs from domain");
  }
  const double scale = 1.0 + position.norm();
  if (!contains(dom, position, 1e-9 * scale)) {
    throw Error(ErrorCode::OutOfDomain, "curve point lies outside the domain");
  }
  const Vector p = dom.to_canonical(position);
  const Frame local(dom.rotation().transpose() * f.columns());
  if (dom.dim() == 2) return section_2d(dom.shape(), p, local);
  if (dom.dim() == 3) return section_3d(dom.shape(), p, local);
  throw Error(ErrorCode::UnsupportedDimension, "cross-sections are implemented for d = 2, 3");
}

SectionEllipse SectionEllipse::axis_aligned(const Point2& center, double semi1, double semi2) {
  if (!(semi1 > 0.0 && semi2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ellipse semi-axes must be positive");
  }
  Eigen::Matrix2d shape = Eigen::Matrix2d::Zero();
  shape(0, 0) = 1.0 / (semi1 * semi1);
  shape(1, 1) = 1.0 / (semi2 * semi2);
  return SectionEllipse{center, shape};
}

double SectionEllipse::area() const { return std::numbers::pi / std::sqrt(shape.determinant()); }

int section_dim(const CrossSection& section) {
  return std::holds_alternative<SectionInterval>(section) ? 1 : 2;
}

bool section_contains(const CrossSection& section, const Vector& u, double tol) {
  return std::visit(
      overloaded{
          [&](const SectionInterval& iv) {
            return u[0] >= iv.lower - tol && u[0] <= iv.upper + tol;
          },
          [&](const SectionPolygon& poly) {
            return polygon_contains(poly.vertices, Point2(u[0], u[1]), tol);
          },
          [&](const SectionEllipse& e) {
            const Point2 d = Point2(u[0], u[1]) - e.center;
            // Scale the tolerance to the ellipse's quadratic form.
            const double q = d.dot(e.shape * d);
            const double lmax = e.shape.eigenvalues().real().maxCoeff();
            return std::sqrt(q) <= 1.0 + tol * std::sqrt(lmax);
          },
      },
      section);
}

double section_support(const CrossSection& section, const Vector& w) {
  return std::visit(
      overloaded{
          [&](const SectionInterval& iv) { return std::max(w[0] * iv.lower, w[0] * iv.upper); },
          [&](const SectionPolygon& poly) {
            double best = -std::numeric_limits<double>::infinity();
            for (const Point2& v : poly.vertices) best = std::max(best, w[0] * v.x() + w[1] * v.y());
            return best;
          },
          [&](const SectionEllipse& e) {
            const Point2 ww(w[0], w[1]);
            return ww.dot(e.center) + std::sqrt(ww.dot(e.shape.inverse() * ww));
          },
      },
      section);
}

double polygon_signed_area(const std::vector<Point2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) a += cross2(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

bool polygon_is_simple(const std::vector<Point2>& v) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::vector<Point2> clean_polygon(std::vector<Point2> v) {
  bool changed = true;
  while (changed && v.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point2& prev = v[(i + v.size() - 1) % v.size()];
      const Point2& cur = v[i];
      const Point2& next = v[(i + 1) % v.size()];
      const double scale = std::max({(cur - prev).norm(), (next - cur).norm(), 1e-300});
      const bool duplicate = (cur - prev).norm() <= 1e-12 * (1.0 + cur.norm());
      if (duplicate || std::abs(cross2(cur - prev, next - cur)) <= 1e-12 * scale * scale) {
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  if (v.size() >= 3 && polygon_signed_area(v) < 0.0) std::reverse(v.begin(), v.end());
  return v;
}

// ---------------------------------------------------------------------------

namespace {

Truncation require_truncation(const std::optional<Truncation>& t, const char* what) {
  if (!t) throw Error(ErrorCode::MissingTruncation, std::string(what) + " is unbounded");
  if (!(t->upper > t->lower)) throw Error(ErrorCode::InvalidArgument, "empty truncation range");
  return *t;
}

struct Box {
  Vector lo;
  Vector hi;
};

Box polygon_box(const std::vector<Point2>& poly) {
  Vector lo = Vector::Constant(2, std::numeric_limits<double>::infinity());
  Vector hi = -lo;
  for (const Point2& p : poly) {
    lo = lo.cwiseMin(Vector(p));
    hi = hi.cwiseMax(Vector(p));
  }
  return {lo, hi};
}

}  // namespace

Matrix sample_uniform(const Domain& dom, std::int64_t n, std::uint64_t seed,
                      std::optional<Truncation> truncation) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  const int d = dom.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix out(d, n);
  auto box_draw = [&](const Vector& lo, const Vector& hi) {
    Vector x(lo.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
    return x;
  };
  auto fill = [&](auto&& draw) {
    for (std::int64_t j = 0; j < n; ++j) out.col(j) = draw();
  };
  std::visit(
      overloaded{
          [&](const Quadrant2D&) {
            const Truncation t = require_truncation(truncation, "quadrant");
            const Vector lo = Vector::Constant(2, std::max(0.0, t.lower));
            const Vector hi = Vector::Constant(2, t.upper);
            fill([&] { return box_draw(lo, hi); });
          },
          [&](const Polygon2D& poly) {
            const Box b = polygon_box(poly.vertices);
            fill([&] {
              for (;;) {
                Vector x = box_draw(b.lo, b.hi);
                if (polygon_contains(poly.vertices, Point2(x[0], x[1]), 0.0)) return x;
              }
            });
          },
          [&](const Prism& prism) {
            const Box b = polygon_box(prism.base);
            fill([&] {
              for (;;) {
                const Vector xy = box_draw(b.lo, b.hi);
                if (polygon_contains(prism.base, Point2(xy[0], xy[1]), 0.0)) {
                  return Vector(Eigen::Vector3d(xy[0], xy[1], prism.height * unit(rng)));
                }
              }
            });
          },
          [&](const Cylinder& c) {
            const Truncation t = require_truncation(truncation, "cylinder");
            fill([&] {
              for (;;) {
                const double x = c.radius * (2.0 * unit(rng) - 1.0);
                const double y = c.radius * (2.0 * unit(rng) - 1.0);
                if (x * x + y * y <= c.radius * c.radius) {
                  const double z = t.lower + (t.upper - t.lower) * unit(rng);
                  return Vector(Eigen::Vector3d(x, y, z));
                }
              }
            });
          },
          [&](const Ball& b) {
            const Vector lo = Vector::Constant(b.dim, -b.radius);
            const Vector hi = Vector::Constant(b.dim, b.radius);
            fill([&] {
              for (;;) {
                Vector x = box_draw(lo, hi);
                if (x.squaredNorm() <= b.radius * b.radius) return x;
              }
            });
          },
          [&](const Cuboid& c) { fill([&] { return box_draw(c.min, c.max); }); },
          [&](const QuarterDisk& q) {
            const Vector lo = Vector::Zero(2);
            const Vector hi = Vector::Constant(2, q.radius);
            fill([&] {
              for (;;) {
                Vector x = box_draw(lo, hi);
                if (x.squaredNorm() <= q.radius * q.radius) return x;
              }
            });
          },
      },
      dom.shape());
  if (!dom.rotation().isIdentity(0.0)) out = dom.rotation() * out;
  return out;
}

double domain_volume(const Domain& dom, std::optional<Truncation> truncation) {
  return std::visit(
      overloaded{
          [&](const Quadrant2D&) {
            const Truncation t = require_truncation(truncation, "quadrant");
            const double w = t.upper - std::max(0.0, t.lower);
            return w * w;
          },
          [&](const Polygon2D& p) { return polygon_signed_area(p.vertices); },
          [&](const Prism& p) { return polygon_signed_area(p.base) * p.height; },
          [&](const Cylinder& c) {
            const Truncation t = require_truncation(truncation, "cylinder");
            return std::numbers::pi * c.radius * c.radius * (t.upper - t.lower);
          },
          [&](const Ball& b) {
            // V_d = pi^{d/2} r^d / Gamma(d/2 + 1)
            return std::pow(std::numbers::pi, 0.5 * b.dim) * std::pow(b.radius, b.dim) /
                   std::tgamma(0.5 * b.dim + 1.0);
          },
          [&](const Cuboid& c) { return (c.max - c.min).prod(); },
          [&](const QuarterDisk& q) { return 0.25 * std::numbers::pi * q.radius * q.radius; },
      },
      dom.shape());
}

}  // namespace pcurve
