#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowcast/csv.hpp"
#include "flowcast/featgen.hpp"
#include "flowcast/flowgraph.hpp"
#include "flowcast/numio.hpp"
#include "flowcast/seasonal.hpp"
#include "flowcast/timeutil.hpp"
#include "flowcast/trips.hpp"

namespace flowcast {

inline double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

// Feature groups used for tagging and ablation.
inline constexpr const char* kGroupSpatial = "spatial";
inline constexpr const char* kGroupTemporal = "temporal";
inline constexpr const char* kGroupNetwork = "network";

// One modelling table: a row per (origin zone, destination zone, bucket)
// with its feature vector and the flow count as target. Missing entries
// (insufficient lag history, covariate gaps) are NaN until imputed.
struct FeatureMatrix {
  Scale scale = Scale::Daily;
  std::string level;
  std::vector<std::string> feature_names;
  std::vector<std::string> feature_groups;  // parallel to feature_names
  std::vector<std::string> row_orig;
  std::vector<std::string> row_dest;
  std::vector<Timestamp> row_bucket;
  std::vector<std::vector<double>> values;  // [row][feature]
  std::vector<double> target;

  size_t n_rows() const { return values.size(); }
  size_t n_cols() const { return feature_names.size(); }

  size_t column(const std::string& name) const {
    for (size_t i = 0; i < feature_names.size(); ++i)
      if (feature_names[i] == name) return i;
    throw SchemaError("feature matrix has no column named '" + name + "'");
  }
  std::vector<size_t> group_columns(const std::string& group) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < feature_groups.size(); ++i)
      if (feature_groups[i] == group) out.push_back(i);
    return out;
  }
};

struct AssembleOptions {
  // Lag depth: lag 1 surfaces as the network-group `previous_count`; lags
  // 2..max_lag become temporal `previous_count_lag<k>` columns.
  int max_lag = 3;
  std::vector<int> rolling_windows{3, 7};  // strictly-prior full windows
  CalendarOptions calendar;
};

struct AssembleInputs {
  const std::map<Timestamp, FlowGraph>* graphs = nullptr;  // bucket start -> graph
  Scale scale = Scale::Daily;
  std::string level;
  // (feature base name, zone id -> value); every zone seen in the graphs
  // must be present in every map.
  std::vector<std::pair<std::string, std::map<std::string, double>>> spatial;
  const HolidayCalendar* holidays = nullptr;
  std::vector<const CovariateSeries*> covariates;
  const SeasonalModel* seasonal = nullptr;
  AssembleOptions options;
};

namespace detail {

inline const std::vector<std::pair<const char*, const char*>>& network_feature_slots() {
  static const std::vector<std::pair<const char*, const char*>> slots = {
      {"orig_degree_centrality", kGroupNetwork},
      {"orig_in_degree_centrality", kGroupNetwork},
      {"orig_out_degree_centrality", kGroupNetwork},
      {"orig_betweenness", kGroupNetwork},
      {"orig_in_degree", kGroupNetwork},
      {"orig_out_degree", kGroupNetwork},
      {"orig_strength_in", kGroupNetwork},
      {"orig_strength_out", kGroupNetwork},
      {"dest_degree_centrality", kGroupNetwork},
      {"dest_in_degree_centrality", kGroupNetwork},
      {"dest_out_degree_centrality", kGroupNetwork},
      {"dest_betweenness", kGroupNetwork},
      {"dest_in_degree", kGroupNetwork},
      {"dest_out_degree", kGroupNetwork},
      {"dest_strength_in", kGroupNetwork},
      {"dest_strength_out", kGroupNetwork},
      {"edge_betweenness", kGroupNetwork},
      {"edge_connectivity", kGroupNetwork},
      {"connectivity_exact", kGroupNetwork},
      {"shortest_path_length", kGroupNetwork},
      {"path_unreachable", kGroupNetwork},
      {"edge_present", kGroupNetwork},
      {"previous_count", kGroupNetwork},
      {"num_nodes", kGroupNetwork},
      {"num_edges", kGroupNetwork},
      {"avg_degree_connectivity", kGroupNetwork},
      {"average_clustering", kGroupNetwork},
  };
  return slots;
}

inline std::vector<double> network_feature_values(const EdgeNetworkFeatures& f) {
  return {f.orig_degree_centrality,
          f.orig_in_degree_centrality,
          f.orig_out_degree_centrality,
          f.orig_betweenness,
          f.orig_in_degree,
          f.orig_out_degree,
          f.orig_strength_in,
          f.orig_strength_out,
          f.dest_degree_centrality,
          f.dest_in_degree_centrality,
          f.dest_out_degree_centrality,
          f.dest_betweenness,
          f.dest_in_degree,
          f.dest_out_degree,
          f.dest_strength_in,
          f.dest_strength_out,
          f.edge_betweenness,
          f.edge_connectivity,
          f.connectivity_exact ? 1.0 : 0.0,
          f.shortest_path_length,
          f.path_unreachable ? 1.0 : 0.0,
          f.edge_present,
          f.previous_count,
          f.num_nodes,
          f.num_edges,
          f.avg_degree_connectivity,
          f.average_clustering};
}

}  // namespace detail

// Builds the modelling table from bucketed flow graphs plus feature sources.
// Row universe: each (origin, dest) pair enters at the first bucket where it
// has flow and stays for every later bucket (its target may then be zero).
// Buckets run as a continuous aligned range from the first to the last
// observed graph; gaps count as zero-flow buckets. All network-group
// features come from the previous bucket's graph, so the first bucket's
// rows carry NaN there (imputed later from training data only).
inline FeatureMatrix assemble_matrix(const AssembleInputs& in) {
  if (!in.graphs || in.graphs->empty()) throw DomainError("assembly requires at least one bucketed flow graph");
  if (in.options.max_lag < 1) throw DomainError("assembly requires max_lag >= 1");

  // Continuous bucket range.
  std::vector<Timestamp> buckets;
  Timestamp first = in.graphs->begin()->first;
  Timestamp last = in.graphs->rbegin()->first;
  if (!is_aligned(first, in.scale) || !is_aligned(last, in.scale))
    throw DomainError("assembly: graph bucket keys must be aligned to the scale");
  for (Timestamp b = first;; b = next_bucket_start(b, in.scale)) {
    buckets.push_back(b);
    if (b == last) break;
  }
  std::map<Timestamp, size_t> bucket_index;
  for (size_t i = 0; i < buckets.size(); ++i) bucket_index[buckets[i]] = i;
  for (const auto& [t, _] : *in.graphs)
    if (!bucket_index.count(t)) throw DomainError("assembly: graph bucket keys must be aligned to the scale");

  static const FlowGraph kEmptyGraph;
  auto graph_at = [&](size_t idx) -> const FlowGraph& {
    auto it = in.graphs->find(buckets[idx]);
    return it == in.graphs->end() ? kEmptyGraph : it->second;
  };

  // Count panel and growing row universe.
  std::map<std::pair<std::string, std::string>, std::vector<double>> counts;
  std::vector<std::set<std::pair<std::string, std::string>>> universe(buckets.size());
  std::set<std::pair<std::string, std::string>> active;
  std::set<std::string> zones_seen;
  for (size_t bi = 0; bi < buckets.size(); ++bi) {
    const FlowGraph& g = graph_at(bi);
    for (const auto& [key, w] : g.edges()) {
      std::pair<std::string, std::string> od{g.nodes()[key.first], g.nodes()[key.second]};
      auto [it, fresh] = counts.try_emplace(od);
      if (fresh) it->second.assign(buckets.size(), 0.0);
      it->second[bi] = static_cast<double>(w);
      active.insert(od);
      zones_seen.insert(od.first);
      zones_seen.insert(od.second);
    }
    universe[bi] = active;
  }

  // Spatial lookups must cover every zone that can appear in a row.
  for (const auto& [fname, zmap] : in.spatial)
    for (const auto& z : zones_seen)
      if (!zmap.count(z))
        throw SchemaError("assembly: zone '" + z + "' missing from spatial feature '" + fname + "'");

  FeatureMatrix fm;
  fm.scale = in.scale;
  fm.level = in.level;

  // ---- column plan: spatial block, temporal block, network block.
  std::vector<std::string> spatial_names;
  for (const auto& [fname, _] : in.spatial) spatial_names.push_back(fname);
  std::sort(spatial_names.begin(), spatial_names.end());
  for (const auto& fname : spatial_names) {
    fm.feature_names.push_back("orig_" + fname);
    fm.feature_groups.push_back(kGroupSpatial);
    fm.feature_names.push_back("dest_" + fname);
    fm.feature_groups.push_back(kGroupSpatial);
  }

  auto sample_calendar = calendar_features(buckets.front(), in.scale, in.holidays, in.options.calendar);
  for (const auto& [name, _] : sample_calendar) {
    fm.feature_names.push_back(name);
    fm.feature_groups.push_back(kGroupTemporal);
  }
  for (int lag = 2; lag <= in.options.max_lag; ++lag) {
    fm.feature_names.push_back("previous_count_lag" + std::to_string(lag));
    fm.feature_groups.push_back(kGroupTemporal);
  }
  for (int w : in.options.rolling_windows) {
    fm.feature_names.push_back("rolling_mean_" + std::to_string(w));
    fm.feature_groups.push_back(kGroupTemporal);
  }
  std::vector<const CovariateSeries*> covs = in.covariates;
  std::sort(covs.begin(), covs.end(),
            [](const CovariateSeries* a, const CovariateSeries* b) { return a->name < b->name; });
  for (const auto* c : covs) {
    fm.feature_names.push_back(c->name);
    fm.feature_groups.push_back(kGroupTemporal);
  }
  if (in.seasonal) {
    for (const char* name : {"trend_component", "weekly_component", "yearly_component", "holiday_component", "yhat"}) {
      fm.feature_names.push_back(name);
      fm.feature_groups.push_back(kGroupTemporal);
    }
  }

  for (const auto& [name, group] : detail::network_feature_slots()) {
    fm.feature_names.push_back(name);
    fm.feature_groups.push_back(group);
  }
  size_t n_network = detail::network_feature_slots().size();

  // ---- rows, bucket-major then (origin, dest) lexicographic.
  for (size_t bi = 0; bi < buckets.size(); ++bi) {
    Timestamp b = buckets[bi];
    if (universe[bi].empty()) continue;
    std::vector<std::pair<std::string, std::string>> pairs(universe[bi].begin(), universe[bi].end());

    // Per-bucket shared blocks.
    auto cal = calendar_features(b, in.scale, in.holidays, in.options.calendar);
    std::vector<double> cov_vals;
    for (const auto* c : covs) {
      Timestamp key = truncate_to_cadence(b, c->cadence);
      if (c->kind == CovariateKind::LagOnly) key = prev_cadence_start(key, c->cadence);
      auto v = c->at_or_before(key, b);
      cov_vals.push_back(v ? *v : nan_value());
    }
    SeasonalComponents sc;
    if (in.seasonal) sc = seasonal_components(*in.seasonal, b);

    std::vector<EdgeNetworkFeatures> net;
    if (bi > 0) net = extract_network_features(graph_at(bi - 1), pairs);

    for (size_t pi = 0; pi < pairs.size(); ++pi) {
      const auto& [o, d] = pairs[pi];
      std::vector<double> row;
      row.reserve(fm.n_cols());
      for (const auto& fname : spatial_names) {
        const auto* zmap = [&]() -> const std::map<std::string, double>* {
          for (const auto& [n, m] : in.spatial)
            if (n == fname) return &m;
          return nullptr;
        }();
        row.push_back(zmap->at(o));
        row.push_back(zmap->at(d));
      }
      for (const auto& [_, v] : cal) row.push_back(v);
      const auto& series = counts.at(pairs[pi]);
      for (int lag = 2; lag <= in.options.max_lag; ++lag)
        row.push_back(bi >= static_cast<size_t>(lag) ? series[bi - lag] : nan_value());
      for (int w : in.options.rolling_windows) {
        if (bi >= static_cast<size_t>(w)) {
          double s = 0;
          for (int k = 1; k <= w; ++k) s += series[bi - k];
          row.push_back(s / w);
        } else {
          row.push_back(nan_value());
        }
      }
      for (double v : cov_vals) row.push_back(v);
      if (in.seasonal) {
        row.push_back(sc.trend);
        row.push_back(sc.weekly);
        row.push_back(sc.yearly);
        row.push_back(sc.holiday);
        row.push_back(sc.yhat);
      }
      if (bi > 0) {
        auto nv = detail::network_feature_values(net[pi]);
        row.insert(row.end(), nv.begin(), nv.end());
      } else {
        row.insert(row.end(), n_network, nan_value());
      }

      fm.row_orig.push_back(o);
      fm.row_dest.push_back(d);
      fm.row_bucket.push_back(b);
      fm.values.push_back(std::move(row));
      fm.target.push_back(series[bi]);
    }
  }
  return fm;
}

// -------------------------------------------------------------- scaling

// Min-max scaling fitted on training rows only. Missing entries are imputed
// with the training-column mean before scaling; a column constant on the
// training rows maps to 0 everywhere (its spread carries no information).
struct ScalerColumn {
  double min = 0, max = 0;
  double impute = 0;     // training mean of observed values
  bool constant = true;  // no spread on the training rows
};

struct Scaler {
  std::vector<std::string> feature_names;
  std::vector<ScalerColumn> columns;
};

inline Scaler fit_scaler(const FeatureMatrix& fm, const std::vector<char>& is_train) {
  if (is_train.size() != fm.n_rows()) throw ShapeError("fit_scaler: train mask size mismatch");
  bool any_train = false;
  for (char c : is_train) any_train = any_train || c;
  if (!any_train) throw DomainError("fit_scaler requires at least one training row");

  Scaler sc;
  sc.feature_names = fm.feature_names;
  sc.columns.assign(fm.n_cols(), {});
  for (size_t j = 0; j < fm.n_cols(); ++j) {
    ScalerColumn col;
    double sum = 0;
    int64_t n = 0;
    bool seen = false;
    for (size_t i = 0; i < fm.n_rows(); ++i) {
      if (!is_train[i]) continue;
      double v = fm.values[i][j];
      if (std::isnan(v)) continue;
      if (!seen) {
        col.min = col.max = v;
        seen = true;
      } else {
        col.min = std::min(col.min, v);
        col.max = std::max(col.max, v);
      }
      sum += v;
      ++n;
    }
    col.impute = n > 0 ? sum / static_cast<double>(n) : 0.0;
    col.constant = !seen || col.max == col.min;
    sc.columns[j] = col;
  }
  return sc;
}

inline double scaler_transform(const ScalerColumn& col, double v) {
  if (std::isnan(v)) v = col.impute;
  if (col.constant) return 0.0;
  return (v - col.min) / (col.max - col.min);  // deliberately unclipped
}

// Inverse of scaler_transform for observed, non-constant columns.
inline double scaler_invert(const ScalerColumn& col, double s) {
  if (col.constant) return col.min;
  return s * (col.max - col.min) + col.min;
}

inline void apply_scaler(const Scaler& sc, FeatureMatrix& fm) {
  if (sc.feature_names != fm.feature_names) throw SchemaError("apply_scaler: column names do not match the fit");
  for (auto& row : fm.values)
    for (size_t j = 0; j < row.size(); ++j) row[j] = scaler_transform(sc.columns[j], row[j]);
}

// -------------------------------------------------------------- file I/O

// CSV layout: orig,dest,bucket_start,split,<features...>,target with NaN as
// an empty field, plus a JSON sidecar mapping every feature to its group.
inline void save_feature_matrix(const std::string& csv_path, const std::string& sidecar_path,
                                const FeatureMatrix& fm, const std::vector<char>& is_train) {
  if (is_train.size() != fm.n_rows()) throw ShapeError("save_feature_matrix: train mask size mismatch");
  std::string out;
  std::vector<std::string> header{"orig", "dest", "bucket_start", "split"};
  header.insert(header.end(), fm.feature_names.begin(), fm.feature_names.end());
  header.push_back("target");
  out += csv::join_row(header);
  out += "\n";
  std::vector<std::string> row(header.size());
  for (size_t i = 0; i < fm.n_rows(); ++i) {
    row[0] = fm.row_orig[i];
    row[1] = fm.row_dest[i];
    row[2] = format_iso8601(fm.row_bucket[i]);
    row[3] = is_train[i] ? "train" : "test";
    for (size_t j = 0; j < fm.n_cols(); ++j) {
      double v = fm.values[i][j];
      row[4 + j] = std::isnan(v) ? "" : util::format_double(v);
    }
    row[4 + fm.n_cols()] = util::format_double(fm.target[i]);
    out += csv::join_row(row);
    out += "\n";
  }
  util::write_file(csv_path, out);

  nlohmann::ordered_json meta;
  meta["scale"] = scale_name(fm.scale);
  meta["level"] = fm.level;
  nlohmann::ordered_json cols = nlohmann::ordered_json::object();
  for (size_t j = 0; j < fm.n_cols(); ++j) cols[fm.feature_names[j]] = fm.feature_groups[j];
  meta["columns"] = cols;
  util::write_file(sidecar_path, meta.dump(1) + "\n");
}

struct LoadedFeatureMatrix {
  FeatureMatrix fm;
  std::vector<char> is_train;
};

inline LoadedFeatureMatrix load_feature_matrix(const std::string& csv_path, const std::string& sidecar_path) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(util::read_file(sidecar_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("feature matrix sidecar is not valid JSON: " + std::string(e.what()));
  }
  if (!meta.contains("columns") || !meta.contains("scale") || !meta.contains("level"))
    throw SchemaError("feature matrix sidecar must have scale, level and columns");

  csv::Table table = csv::load_table(csv_path);
  if (table.header.size() < 5 || table.header[0] != "orig" || table.header[1] != "dest" ||
      table.header[2] != "bucket_start" || table.header[3] != "split" || table.header.back() != "target")
    throw SchemaError("feature matrix CSV must start with orig,dest,bucket_start,split and end with target");

  LoadedFeatureMatrix out;
  out.fm.scale = scale_from_name(meta.at("scale").get<std::string>());
  out.fm.level = meta.at("level").get<std::string>();
  for (size_t j = 4; j + 1 < table.header.size(); ++j) {
    const std::string& name = table.header[j];
    if (!meta.at("columns").contains(name))
      throw SchemaError("feature matrix sidecar is missing group for column '" + name + "'");
    out.fm.feature_names.push_back(name);
    out.fm.feature_groups.push_back(meta.at("columns").at(name).get<std::string>());
  }
  size_t n_cols = out.fm.feature_names.size();
  for (const auto& r : table.rows) {
    out.fm.row_orig.push_back(r[0]);
    out.fm.row_dest.push_back(r[1]);
    out.fm.row_bucket.push_back(parse_iso8601(r[2]));
    if (r[3] != "train" && r[3] != "test") throw SchemaError("feature matrix split must be train or test");
    out.is_train.push_back(r[3] == "train" ? 1 : 0);
    std::vector<double> vals(n_cols);
    for (size_t j = 0; j < n_cols; ++j) vals[j] = r[4 + j].empty() ? nan_value() : util::parse_double(r[4 + j]);
    out.fm.values.push_back(std::move(vals));
    out.fm.target.push_back(util::parse_double(r.back()));
  }
  return out;
}

}  // namespace flowcast
