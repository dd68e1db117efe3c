#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "flowcast/geometry.hpp"
#include "flowcast/io.hpp"

namespace flowcast {

enum class GeometryKind { Point, Line, Polygon };

inline const char* geometry_kind_name(GeometryKind k) {
  switch (k) {
    case GeometryKind::Point: return "point";
    case GeometryKind::Line: return "line";
    case GeometryKind::Polygon: return "polygon";
  }
  return "?";
}

inline GeometryKind geometry_kind_from_name(std::string_view s) {
  if (s == "point") return GeometryKind::Point;
  if (s == "line") return GeometryKind::Line;
  if (s == "polygon") return GeometryKind::Polygon;
  throw ParseError("unknown geometry kind: " + std::string(s));
}

// One thematic geographic layer (e.g. transit stops, road segments, land-use
// areas). All elements share the layer's geometry kind:
//   point   -> single-vertex elements
//   line    -> polylines with >= 2 vertices
//   polygon -> simple polygons stored as open rings (closed in the file)
struct SpatialLayer {
  std::string name;
  GeometryKind kind = GeometryKind::Point;
  std::vector<std::vector<geom::Point>> elements;

  void validate() const {
    for (size_t i = 0; i < elements.size(); ++i) {
      const auto& e = elements[i];
      switch (kind) {
        case GeometryKind::Point:
          if (e.size() != 1)
            throw SchemaError("layer " + name + " element " + std::to_string(i) + ": point needs exactly 1 vertex");
          break;
        case GeometryKind::Line:
          if (e.size() < 2)
            throw SchemaError("layer " + name + " element " + std::to_string(i) + ": polyline needs >= 2 vertices");
          break;
        case GeometryKind::Polygon:
          if (e.size() < 3)
            throw SchemaError("layer " + name + " element " + std::to_string(i) + ": polygon needs >= 3 vertices");
          if (!geom::is_simple_polygon(e))
            throw SchemaError("layer " + name + " element " + std::to_string(i) + ": self-intersecting polygon");
          break;
      }
    }
  }
};

// Layer file: JSON {name, geometry_kind, elements: [...]]}. Point elements
// are [x, y]; line/polygon elements are [[x, y], ...]; polygon rings closed.
inline SpatialLayer load_layer(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(util::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("layer file " + path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("name") || !doc.contains("geometry_kind") || !doc.contains("elements"))
    throw SchemaError("layer file must be {name, geometry_kind, elements}: " + path);
  SpatialLayer layer;
  layer.name = doc["name"].get<std::string>();
  layer.kind = geometry_kind_from_name(doc["geometry_kind"].get<std::string>());
  for (const auto& el : doc["elements"]) {
    std::vector<geom::Point> pts;
    if (layer.kind == GeometryKind::Point) {
      if (!el.is_array() || el.size() != 2)
        throw SchemaError("layer " + layer.name + ": point elements must be [x, y]: " + path);
      pts.push_back({el[0].get<double>(), el[1].get<double>()});
    } else {
      if (!el.is_array()) throw SchemaError("layer " + layer.name + ": elements must be vertex arrays: " + path);
      for (const auto& v : el) {
        if (!v.is_array() || v.size() != 2)
          throw SchemaError("layer " + layer.name + ": vertices must be [x, y] pairs: " + path);
        pts.push_back({v[0].get<double>(), v[1].get<double>()});
      }
      if (layer.kind == GeometryKind::Polygon) {
        if (pts.size() < 4 || !(pts.front() == pts.back()))
          throw SchemaError("layer " + layer.name + ": polygon rings must be closed: " + path);
        pts.pop_back();
      }
    }
    layer.elements.push_back(std::move(pts));
  }
  layer.validate();
  return layer;
}

inline void save_layer(const std::string& path, const SpatialLayer& layer) {
  layer.validate();
  nlohmann::ordered_json elements = nlohmann::ordered_json::array();
  for (const auto& e : layer.elements) {
    if (layer.kind == GeometryKind::Point) {
      elements.push_back({e[0].x, e[0].y});
    } else {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& p : e) arr.push_back({p.x, p.y});
      if (layer.kind == GeometryKind::Polygon) arr.push_back({e.front().x, e.front().y});
      elements.push_back(std::move(arr));
    }
  }
  nlohmann::ordered_json doc{
      {"name", layer.name}, {"geometry_kind", geometry_kind_name(layer.kind)}, {"elements", std::move(elements)}};
  util::write_file(path, doc.dump(1) + "\n");
}

}  // namespace flowcast
