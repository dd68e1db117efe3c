#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowcast/geometry.hpp"
#include "flowcast/io.hpp"
#include "flowcast/numio.hpp"
#include "flowcast/rng.hpp"

namespace flowcast {

// One spatial unit. The boundary is stored as an OPEN vertex ring (the file
// format's closing vertex is stripped on load and re-added on save).
struct Zone {
  std::string zone_id;
  geom::Polygon boundary;
  std::string level;
};

inline void validate_zone(const Zone& z) {
  if (z.zone_id.empty()) throw SchemaError("zone with empty zone_id");
  if (z.boundary.size() < 3)
    throw SchemaError("zone " + z.zone_id + ": ring must have at least 4 vertices including closure");
  if (geom::signed_area(z.boundary) == 0.0) throw SchemaError("zone " + z.zone_id + ": zero signed area");
  if (!geom::is_simple_polygon(z.boundary)) throw SchemaError("zone " + z.zone_id + ": self-intersecting ring");
}

inline bool point_in_zone(const geom::Point& p, const Zone& z) { return geom::point_in_polygon(p, z.boundary); }

// A named spatial level: a set of interior-disjoint zones. Zones keep their
// construction order; lookups go through an id index; assignment uses a bbox
// prefilter and breaks boundary ties by smallest zone_id.
class SpatialPartition {
 public:
  SpatialPartition() = default;
  SpatialPartition(std::string level, std::vector<Zone> zones) : level_(std::move(level)), zones_(std::move(zones)) {
    for (size_t i = 0; i < zones_.size(); ++i) {
      validate_zone(zones_[i]);
      if (zones_[i].level != level_)
        throw SchemaError("zone " + zones_[i].zone_id + " has level '" + zones_[i].level +
                          "', partition is '" + level_ + "'");
      if (!by_id_.emplace(zones_[i].zone_id, i).second)
        throw SchemaError("duplicate zone_id: " + zones_[i].zone_id);
      bboxes_.push_back(geom::bbox_of(zones_[i].boundary));
    }
  }

  const std::string& level() const { return level_; }
  const std::vector<Zone>& zones() const { return zones_; }
  size_t size() const { return zones_.size(); }

  const Zone* find(const std::string& zone_id) const {
    auto it = by_id_.find(zone_id);
    return it == by_id_.end() ? nullptr : &zones_[it->second];
  }

  // Id of the containing zone under the closed-boundary rule; boundary ties
  // go to the lexicographically smallest id; nullopt when no zone contains p.
  std::optional<std::string> assign(const geom::Point& p) const {
    const std::string* best = nullptr;
    for (size_t i = 0; i < zones_.size(); ++i) {
      if (!bboxes_[i].contains(p)) continue;
      if (!geom::point_in_polygon(p, zones_[i].boundary)) continue;
      if (!best || zones_[i].zone_id < *best) best = &zones_[i].zone_id;
    }
    if (!best) return std::nullopt;
    return *best;
  }

  geom::BBox bounding_box() const {
    if (zones_.empty()) throw DomainError("bounding box of empty partition");
    geom::BBox b = bboxes_[0];
    for (const auto& zb : bboxes_) {
      b.min_x = std::min(b.min_x, zb.min_x);
      b.min_y = std::min(b.min_y, zb.min_y);
      b.max_x = std::max(b.max_x, zb.max_x);
      b.max_y = std::max(b.max_y, zb.max_y);
    }
    return b;
  }

 private:
  std::string level_;
  std::vector<Zone> zones_;
  std::map<std::string, size_t> by_id_;
  std::vector<geom::BBox> bboxes_;
};

// Probabilistic interior-disjointness check: samples points in the combined
// bounding box and reports a violation when a point clearly interior to two
// zones (not near either boundary) is found. Returns the first offending
// pair, or nullopt when the sample finds none.
inline std::optional<std::pair<std::string, std::string>> find_interior_overlap(const SpatialPartition& part,
                                                                                uint64_t seed, int n_samples = 2000) {
  if (part.size() < 2) return std::nullopt;
  auto bb = part.bounding_box();
  double diag = std::hypot(bb.max_x - bb.min_x, bb.max_y - bb.min_y);
  double eps = std::max(diag, 1.0) * 1e-9;
  Rng rng(seed);
  for (int s = 0; s < n_samples; ++s) {
    geom::Point p{rng.uniform(bb.min_x, bb.max_x), rng.uniform(bb.min_y, bb.max_y)};
    const Zone* first = nullptr;
    for (const auto& z : part.zones()) {
      if (!geom::point_in_polygon(p, z.boundary)) continue;
      // Near-boundary containment is legitimate sharing, not overlap.
      bool near_edge = false;
      size_t n = z.boundary.size();
      for (size_t i = 0; i < n && !near_edge; ++i)
        near_edge = geom::point_on_segment(p, z.boundary[i], z.boundary[(i + 1) % n], eps);
      if (near_edge) continue;
      if (first) return std::make_pair(first->zone_id, z.zone_id);
      first = &z;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- hex grid

struct HexGridSpec {
  double circumradius_m = 250.0;
  geom::Point origin{0.0, 0.0};
  geom::BBox bounding_box;

  void validate() const {
    if (!(circumradius_m > 0)) throw DomainError("hex grid circumradius must be positive");
    if (!(bounding_box.max_x > bounding_box.min_x) || !(bounding_box.max_y > bounding_box.min_y))
      throw DomainError("hex grid bounding box is degenerate");
  }
};

namespace detail {

inline geom::Polygon hexagon_at(const geom::Point& center, double r) {
  // Flat-top regular hexagon: vertices at 0, 60, ..., 300 degrees.
  static const double kCos[6] = {1.0, 0.5, -0.5, -1.0, -0.5, 0.5};
  const double s3_2 = std::sqrt(3.0) / 2.0;
  static const double kSinScale[6] = {0.0, 1.0, 1.0, 0.0, -1.0, -1.0};
  geom::Polygon hex;
  hex.reserve(6);
  for (int k = 0; k < 6; ++k) hex.push_back({center.x + r * kCos[k], center.y + r * s3_2 * kSinScale[k]});
  return hex;
}

}  // namespace detail

// Tiles the bounding box with flat-top regular hexagons of the given
// circumradius; cells that intersect the box (positive overlap area) are
// included. Ids are "hex_<col>_<row>" with col/row shifted so the smallest
// included indices are 0. Fully deterministic.
inline SpatialPartition generate_hex_grid(const HexGridSpec& spec, util::WarningSink& sink,
                                          const std::string& level_name = "hex_grid") {
  spec.validate();
  const double r = spec.circumradius_m;
  const auto& bb = spec.bounding_box;
  const double width = bb.max_x - bb.min_x;
  const double height = bb.max_y - bb.min_y;

  if (r > width || r > height) {
    sink.warn("hex circumradius " + util::format_double(r) + " exceeds bounding box extent; emitting a single cell");
    geom::Point c{0.5 * (bb.min_x + bb.max_x), 0.5 * (bb.min_y + bb.max_y)};
    Zone z{"hex_0_0", detail::hexagon_at(c, r), level_name};
    return SpatialPartition(level_name, {z});
  }

  const double dx = 1.5 * r;                 // column spacing
  const double dy = std::sqrt(3.0) * r;      // row spacing
  const geom::Polygon box_poly{{bb.min_x, bb.min_y}, {bb.max_x, bb.min_y}, {bb.max_x, bb.max_y}, {bb.min_x, bb.max_y}};

  // Candidate index ranges with one cell of margin on every side.
  int64_t col_lo = static_cast<int64_t>(std::floor((bb.min_x - r - spec.origin.x) / dx)) - 1;
  int64_t col_hi = static_cast<int64_t>(std::ceil((bb.max_x + r - spec.origin.x) / dx)) + 1;
  int64_t row_lo = static_cast<int64_t>(std::floor((bb.min_y - dy - spec.origin.y) / dy)) - 1;
  int64_t row_hi = static_cast<int64_t>(std::ceil((bb.max_y + dy - spec.origin.y) / dy)) + 1;

  struct Cell {
    int64_t col, row;
    geom::Polygon hex;
  };
  std::vector<Cell> cells;
  for (int64_t col = col_lo; col <= col_hi; ++col) {
    double off = (col % 2 != 0) ? 0.5 : 0.0;
    for (int64_t row = row_lo; row <= row_hi; ++row) {
      geom::Point c{spec.origin.x + dx * static_cast<double>(col),
                    spec.origin.y + dy * (static_cast<double>(row) + off)};
      // Cheap bbox reject before the exact overlap test.
      if (c.x + r < bb.min_x || c.x - r > bb.max_x || c.y + dy / 2 < bb.min_y || c.y - dy / 2 > bb.max_y) continue;
      geom::Polygon hex = detail::hexagon_at(c, r);
      if (geom::intersection_area(hex, box_poly) <= 1e-12 * r * r) continue;
      cells.push_back({col, row, std::move(hex)});
    }
  }
  if (cells.empty()) throw DomainError("hex grid generation produced no cells");

  int64_t min_col = cells[0].col, min_row = cells[0].row;
  for (const auto& c : cells) {
    min_col = std::min(min_col, c.col);
    min_row = std::min(min_row, c.row);
  }
  std::vector<Zone> zones;
  zones.reserve(cells.size());
  for (auto& c : cells) {
    zones.push_back({"hex_" + std::to_string(c.col - min_col) + "_" + std::to_string(c.row - min_row),
                     std::move(c.hex), level_name});
  }
  return SpatialPartition(level_name, std::move(zones));
}

// ------------------------------------------------------------------- I/O

// Polygon file: JSON array of {zone_id, level, ring: [[x, y], ...]} with the
// ring closed (first vertex repeated last).
inline SpatialPartition load_partition(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(util::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("zones file " + path + ": " + e.what());
  }
  if (!doc.is_array()) throw SchemaError("zones file must be a JSON array: " + path);
  std::vector<Zone> zones;
  std::string level;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("zone_id") || !item.contains("level") || !item.contains("ring"))
      throw SchemaError("zone entry missing zone_id/level/ring in " + path);
    Zone z;
    z.zone_id = item["zone_id"].get<std::string>();
    z.level = item["level"].get<std::string>();
    const auto& ring = item["ring"];
    if (!ring.is_array() || ring.size() < 4)
      throw SchemaError("zone " + z.zone_id + ": ring must be a closed array of at least 4 vertex pairs");
    for (const auto& v : ring) {
      if (!v.is_array() || v.size() != 2)
        throw SchemaError("zone " + z.zone_id + ": ring vertices must be [x, y] pairs");
      z.boundary.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    if (z.boundary.front() != z.boundary.back())
      throw SchemaError("zone " + z.zone_id + ": ring is not closed (first vertex must repeat last)");
    z.boundary.pop_back();
    if (level.empty())
      level = z.level;
    else if (level != z.level)
      throw SchemaError("zones file mixes levels '" + level + "' and '" + z.level + "': " + path);
    zones.push_back(std::move(z));
  }
  if (zones.empty()) throw SchemaError("zones file has no zones: " + path);
  SpatialPartition part(level, std::move(zones));
  if (auto overlap = find_interior_overlap(part, util::fnv1a(level)))
    throw SchemaError("zones " + overlap->first + " and " + overlap->second + " have overlapping interiors: " + path);
  return part;
}

inline void save_partition(const std::string& path, const SpatialPartition& part) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& z : part.zones()) {
    nlohmann::ordered_json ring = nlohmann::ordered_json::array();
    for (const auto& p : z.boundary) ring.push_back({p.x, p.y});
    ring.push_back({z.boundary.front().x, z.boundary.front().y});  // close the ring
    doc.push_back({{"zone_id", z.zone_id}, {"level", z.level}, {"ring", std::move(ring)}});
  }
  util::write_file(path, doc.dump(1) + "\n");
}

}  // namespace flowcast
