#pragma once

#include <map>
#include <string>
#include <vector>

#include "flowcast/partition.hpp"
#include "flowcast/spatial_layer.hpp"
#include "flowcast/timeutil.hpp"
#include "flowcast/trips.hpp"

namespace flowcast {

// --------------------------------------------------------- spatial stats
// Per-zone context statistics from a geometry layer. Each function demands
// the matching geometry kind so that a mislabelled layer fails loudly.

// Points per zone, assigned with the same closed-boundary and smallest-id
// tie-break rule used for trip endpoints. Points outside every zone are not
// counted. Every zone is present in the result (0 when empty).
inline std::map<std::string, double> spatial_point_count(const SpatialPartition& part, const SpatialLayer& layer) {
  if (layer.kind != GeometryKind::Point)
    throw DomainError("spatial_point_count expects a point layer, got " + std::string(geometry_kind_name(layer.kind)) +
                      " layer '" + layer.name + "'");
  std::map<std::string, double> out;
  for (const auto& z : part.zones()) out[z.zone_id] = 0.0;
  for (const auto& el : layer.elements) {
    auto zid = part.assign(el.front());
    if (zid) out[*zid] += 1.0;
  }
  return out;
}

// Total polyline length clipped to each zone. Shared-boundary segments are
// measured in every zone whose closed region contains them.
inline std::map<std::string, double> spatial_line_length(const SpatialPartition& part, const SpatialLayer& layer) {
  if (layer.kind != GeometryKind::Line)
    throw DomainError("spatial_line_length expects a line layer, got " + std::string(geometry_kind_name(layer.kind)) +
                      " layer '" + layer.name + "'");
  std::map<std::string, double> out;
  for (const auto& z : part.zones()) {
    double total = 0.0;
    for (const auto& el : layer.elements) total += geom::polyline_length_in_polygon(el, z.boundary);
    out[z.zone_id] = total;
  }
  return out;
}

// Total overlap area between the layer's polygons and each zone.
inline std::map<std::string, double> spatial_polygon_area(const SpatialPartition& part, const SpatialLayer& layer) {
  if (layer.kind != GeometryKind::Polygon)
    throw DomainError("spatial_polygon_area expects a polygon layer, got " + std::string(geometry_kind_name(layer.kind)) +
                      " layer '" + layer.name + "'");
  std::map<std::string, double> out;
  for (const auto& z : part.zones()) {
    double total = 0.0;
    for (const auto& el : layer.elements) total += geom::intersection_area(el, z.boundary);
    out[z.zone_id] = total;
  }
  return out;
}

// Dispatch on the layer's kind; the feature's base name encodes the stat.
inline std::pair<std::string, std::map<std::string, double>> spatial_layer_feature(const SpatialPartition& part,
                                                                                   const SpatialLayer& layer) {
  switch (layer.kind) {
    case GeometryKind::Point: return {layer.name + "_count", spatial_point_count(part, layer)};
    case GeometryKind::Line: return {layer.name + "_length", spatial_line_length(part, layer)};
    case GeometryKind::Polygon: return {layer.name + "_area", spatial_polygon_area(part, layer)};
  }
  throw DomainError("unknown geometry kind");
}

// ------------------------------------------------------ calendar features

struct CalendarOptions {
  // Day-of-week indices counted as weekend, Monday = 0. The default models a
  // Friday + Saturday weekend.
  std::vector<int> weekend_days{4, 5};
};

// Deterministic calendar encoding of one bucket start: weekend/holiday
// indicators plus one-hot day-of-week, month, and (hourly scale only) hour.
inline std::vector<std::pair<std::string, double>> calendar_features(Timestamp bucket_start, Scale scale,
                                                                     const HolidayCalendar* holidays,
                                                                     const CalendarOptions& opt = {}) {
  std::vector<std::pair<std::string, double>> out;
  int dow = day_of_week(bucket_start);
  bool weekend = false;
  for (int d : opt.weekend_days) weekend = weekend || (d == dow);
  out.emplace_back("is_weekend", weekend ? 1.0 : 0.0);
  out.emplace_back("is_holiday", (holidays && holidays->is_holiday(bucket_start)) ? 1.0 : 0.0);
  for (int d = 0; d < 7; ++d) out.emplace_back("dow_" + std::to_string(d), d == dow ? 1.0 : 0.0);
  auto ymd = ymd_of(bucket_start);
  for (int m = 1; m <= 12; ++m) out.emplace_back("month_" + std::to_string(m), m == ymd.month ? 1.0 : 0.0);
  if (scale == Scale::Hourly) {
    int h = hour_of_day(bucket_start);
    for (int k = 0; k < 24; ++k) out.emplace_back("hour_" + std::to_string(k), k == h ? 1.0 : 0.0);
  }
  return out;
}

}  // namespace flowcast
