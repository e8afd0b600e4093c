#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pcurve/domain.hpp"
#include "pcurve/error.hpp"

namespace pcurve {

namespace {

using nlohmann::json;

double positive(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::ParseError, std::string("domain field '") + key + "' missing or not a number");
  }
  return j.at(key).get<double>();
}

std::vector<Point2> points2(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw Error(ErrorCode::ParseError, std::string("domain field '") + key + "' must be an array");
  }
  std::vector<Point2> out;
  for (const json& p : j.at(key)) {
    // 3D points are accepted for prism bases as long as z = 0.
    if (!p.is_array() || p.size() < 2 || p.size() > 3) {
      throw Error(ErrorCode::ParseError, "polygon vertices must be [x, y] pairs");
    }
    if (p.size() == 3 && p[2].get<double>() != 0.0) {
      throw Error(ErrorCode::ParseError, "base vertices must lie in the x3 = 0 plane");
    }
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

Vector vector_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw Error(ErrorCode::ParseError, std::string("domain field '") + key + "' must be an array");
  }
  const auto values = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json points_json(const std::vector<Point2>& pts) {
  json out = json::array();
  for (const Point2& p : pts) out.push_back({p.x(), p.y()});
  return out;
}

}  // namespace

Domain domain_from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("domain JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw Error(ErrorCode::ParseError, "domain JSON needs a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  try {
    Domain dom = [&]() -> Domain {
      if (type == "quadrant2d") return make_quadrant();
      if (type == "polygon2d") return make_polygon(points2(j, "vertices"));
      if (type == "prism") return make_prism(points2(j, "base"), positive(j, "height"));
      if (type == "cylinder") return make_cylinder(positive(j, "r"));
      if (type == "ball") return make_ball(positive(j, "r"), j.value("dim", 3));
      if (type == "cuboid") return make_cuboid(vector_field(j, "min"), vector_field(j, "max"));
      if (type == "quarter_disk") return make_quarter_disk(positive(j, "r"));
      throw Error(ErrorCode::ParseError, "unknown domain type '" + type + "'");
    }();
    if (j.contains("rotation")) {
      const json& rows = j.at("rotation");
      const int d = dom.dim();
      if (!rows.is_array() || static_cast<int>(rows.size()) != d) {
        throw Error(ErrorCode::ParseError, "rotation must be a d x d array of rows");
      }
      Matrix q(d, d);
      for (int r = 0; r < d; ++r) {
        const auto row = rows[r].get<std::vector<double>>();
        if (static_cast<int>(row.size()) != d) {
          throw Error(ErrorCode::ParseError, "rotation must be a d x d array of rows");
        }
        for (int c = 0; c < d; ++c) q(r, c) = row[c];
      }
      dom = Domain(dom.shape(), q);
    }
    return dom;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("domain JSON: ") + e.what());
  }
}

Domain load_domain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open domain file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return domain_from_json_text(buf.str());
}

std::string domain_to_json_text(const Domain& dom) {
  json j;
  j["type"] = std::string(dom.type_name());
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Polygon2D>) {
          j["vertices"] = points_json(s.vertices);
        } else if constexpr (std::is_same_v<T, Prism>) {
          j["base"] = points_json(s.base);
          j["height"] = s.height;
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          j["r"] = s.radius;
        } else if constexpr (std::is_same_v<T, Ball>) {
          j["r"] = s.radius;
          j["dim"] = s.dim;
        } else if constexpr (std::is_same_v<T, Cuboid>) {
          j["min"] = vec_json(s.min);
          j["max"] = vec_json(s.max);
        } else if constexpr (std::is_same_v<T, QuarterDisk>) {
          j["r"] = s.radius;
        }
      },
      dom.shape());
  if (!dom.rotation().isIdentity(0.0)) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < dom.rotation().rows(); ++r) rows.push_back(vec_json(dom.rotation().row(r).transpose()));
    j["rotation"] = rows;
  }
  return j.dump(2);
}

}  // namespace pcurve
