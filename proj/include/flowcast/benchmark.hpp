#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowcast/common.hpp"
#include "flowcast/csv.hpp"
#include "flowcast/featmatrix.hpp"
#include "flowcast/io.hpp"
#include "flowcast/metrics.hpp"
#include "flowcast/models.hpp"
#include "flowcast/numio.hpp"
#include "flowcast/seasonal.hpp"
#include "flowcast/timeutil.hpp"

namespace flowcast {

// --------------------------------------------------------- temporal split

struct EvalSplit {
  std::vector<size_t> train_rows;  // bucket strictly before the aligned cut-off
  std::vector<size_t> test_rows;   // bucket at or after the aligned cut-off
  Timestamp aligned_cutoff = 0;    // cut-off truncated down to the matrix scale
};

inline EvalSplit split_matrix(const FeatureMatrix& fm, Timestamp cutoff) {
  EvalSplit s;
  s.aligned_cutoff = truncate_to_scale(cutoff, fm.scale);
  for (size_t i = 0; i < fm.n_rows(); ++i)
    (fm.row_bucket[i] < s.aligned_cutoff ? s.train_rows : s.test_rows).push_back(i);
  if (s.train_rows.empty())
    throw DomainError("temporal split leaves the training side empty (cut-off " +
                      format_iso8601(s.aligned_cutoff) + " precedes all data)");
  if (s.test_rows.empty())
    throw DomainError("temporal split leaves the test side empty (cut-off " + format_iso8601(s.aligned_cutoff) +
                      " is after all data)");
  return s;
}

// ------------------------------------------------------------- model zoo

// Configuration for every regressor the benchmark can run. Ensemble sizes
// default to the large library settings; runtime-constrained runs override
// them from their run configuration.
struct ModelZooConfig {
  double ridge_lambda = 1.0;
  double lasso_lambda = 0.1;
  double enet_lambda = 0.1;
  double enet_alpha = 0.5;
  TreeOptions tree;           // unlimited depth by default
  ForestOptions forest;       // 1000 trees by default
  GbmOptions gbm;             // 2000 stages, learning rate 0.1, depth 5 by default
  size_t knn_k = 5;
  size_t knn_train_cap = 0;   // 0 = use every training row
  uint64_t seed = 0;          // drives forest bootstraps and the knn cap subsample
};

inline const std::vector<std::string>& all_model_kinds() {
  static const std::vector<std::string> kinds = {
      "linear_regression", "ridge",         "lasso", "elastic_net",       "decision_tree",
      "random_forest",     "gradient_boosting", "knn",   "seasonal_baseline",
  };
  return kinds;
}

inline std::string model_display_name(const std::string& kind) {
  if (kind == "linear_regression") return "Linear Regression";
  if (kind == "ridge") return "Ridge";
  if (kind == "lasso") return "Lasso";
  if (kind == "elastic_net") return "Elastic Net";
  if (kind == "decision_tree") return "Decision Tree";
  if (kind == "random_forest") return "Random Forest";
  if (kind == "gradient_boosting") return "Gradient Boosting";
  if (kind == "knn") return "Neighbors Regressor";
  if (kind == "seasonal_baseline") return "Seasonal Baseline";
  throw ConfigError("unknown model kind '" + kind + "'");
}

inline std::string model_regressor_type(const std::string& kind) {
  return kind == "seasonal_baseline" ? "Time Series" : "Classical ML";
}

inline Model fit_model_by_kind(const std::string& kind, const Rows& x, const std::vector<double>& y,
                               const ModelZooConfig& zoo) {
  if (kind == "linear_regression") return Model{fit_ols(x, y)};
  if (kind == "ridge") return Model{fit_ridge(x, y, zoo.ridge_lambda)};
  if (kind == "lasso") return Model{fit_lasso(x, y, zoo.lasso_lambda)};
  if (kind == "elastic_net") return Model{fit_elastic_net(x, y, zoo.enet_lambda, zoo.enet_alpha)};
  if (kind == "decision_tree") return Model{fit_tree(x, y, zoo.tree)};
  if (kind == "random_forest") {
    ForestOptions opt = zoo.forest;
    opt.seed = Rng(zoo.seed).child("forest").next_u64();
    return Model{fit_forest(x, y, opt)};
  }
  if (kind == "gradient_boosting") return Model{fit_gbm(x, y, zoo.gbm)};
  if (kind == "knn") {
    if (zoo.knn_train_cap > 0 && x.size() > zoo.knn_train_cap) {
      std::vector<size_t> idx(x.size());
      for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      Rng rng = Rng(zoo.seed).child("knn_cap");
      for (size_t i = 0; i < zoo.knn_train_cap; ++i) {
        size_t j = i + static_cast<size_t>(rng.uniform_index(idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(zoo.knn_train_cap);
      std::sort(idx.begin(), idx.end());
      Rows xs;
      std::vector<double> ys;
      xs.reserve(idx.size());
      ys.reserve(idx.size());
      for (size_t i : idx) {
        xs.push_back(x[i]);
        ys.push_back(y[i]);
      }
      return Model{fit_knn(xs, ys, std::min(zoo.knn_k, xs.size()))};
    }
    return Model{fit_knn(x, y, zoo.knn_k)};
  }
  throw ConfigError("unknown model kind '" + kind + "'");
}

// ------------------------------------------------------ seasonal baseline

// Time-series reference forecast: a seasonal trend model is fitted to the
// citywide per-bucket totals of the training period, and its forecast for a
// test bucket is distributed over edges proportionally to each edge's share
// of total training flow.
inline std::vector<double> seasonal_baseline_predict(const FeatureMatrix& fm, const EvalSplit& split,
                                                     const HolidayCalendar* holidays,
                                                     const SeasonalOptions& sopt = {},
                                                     util::WarningSink* sink = nullptr) {
  std::map<Timestamp, double> totals;
  std::map<std::pair<std::string, std::string>, double> edge_flow;
  double grand_total = 0;
  for (size_t i : split.train_rows) {
    totals[fm.row_bucket[i]] += fm.target[i];
    edge_flow[{fm.row_orig[i], fm.row_dest[i]}] += fm.target[i];
    grand_total += fm.target[i];
  }
  SeasonalModel season = fit_seasonal(totals, holidays, split.aligned_cutoff, fm.scale, sopt, sink);
  std::vector<double> out;
  out.reserve(split.test_rows.size());
  for (size_t i : split.test_rows) {
    double share = 0;
    if (grand_total > 0) {
      auto it = edge_flow.find({fm.row_orig[i], fm.row_dest[i]});
      if (it != edge_flow.end()) share = it->second / grand_total;
    }
    out.push_back(seasonal_components(season, fm.row_bucket[i]).yhat * share);
  }
  return out;
}

// --------------------------------------------------------- benchmark runs

struct EvalRow {
  std::string timeframe;      // hourly | daily | monthly
  std::string geography;      // partition level name
  std::string featurestypes;  // feature-group subset label
  std::string regressortype;  // Classical ML | Time Series
  std::string regressor;      // display name
  Metrics metrics;
  bool failed = false;
  std::string error;
};

struct BenchmarkOptions {
  std::vector<std::string> models = all_model_kinds();
  ModelZooConfig zoo;
  Timestamp cutoff = 0;
  SeasonalOptions seasonal;
};

namespace detail {

struct PreparedSplit {
  Rows x_train, x_test;
  std::vector<double> y_train, y_test;
};

inline PreparedSplit prepare_split(const FeatureMatrix& fm, const EvalSplit& split) {
  FeatureMatrix scaled = fm;
  std::vector<char> mask(fm.n_rows(), 0);
  for (size_t i : split.train_rows) mask[i] = 1;
  apply_scaler(fit_scaler(fm, mask), scaled);
  PreparedSplit out;
  out.x_train.reserve(split.train_rows.size());
  out.y_train.reserve(split.train_rows.size());
  for (size_t i : split.train_rows) {
    out.x_train.push_back(scaled.values[i]);
    out.y_train.push_back(scaled.target[i]);
  }
  out.x_test.reserve(split.test_rows.size());
  out.y_test.reserve(split.test_rows.size());
  for (size_t i : split.test_rows) {
    out.x_test.push_back(scaled.values[i]);
    out.y_test.push_back(scaled.target[i]);
  }
  return out;
}

inline EvalRow eval_one_model(const std::string& kind, const FeatureMatrix& fm, const EvalSplit& split,
                              const PreparedSplit& prep, const std::string& featurestypes,
                              const HolidayCalendar* holidays, const BenchmarkOptions& opt,
                              util::WarningSink* sink) {
  EvalRow row;
  row.timeframe = scale_name(fm.scale);
  row.geography = fm.level;
  row.featurestypes = featurestypes;
  row.regressortype = model_regressor_type(kind);
  row.regressor = model_display_name(kind);
  try {
    std::vector<double> pred;
    if (kind == "seasonal_baseline") {
      pred = seasonal_baseline_predict(fm, split, holidays, opt.seasonal, sink);
    } else {
      Model model = fit_model_by_kind(kind, prep.x_train, prep.y_train, opt.zoo);
      pred = predict(model, prep.x_test);
    }
    row.metrics = compute_metrics(prep.y_test, pred);
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

}  // namespace detail

// Fits every configured regressor on the scaled training block and scores
// it on the held-out test block. A failing fit yields an error-marked row
// instead of aborting the run.
inline std::vector<EvalRow> run_benchmark(const FeatureMatrix& fm, const HolidayCalendar* holidays,
                                          const BenchmarkOptions& opt, util::WarningSink* sink = nullptr) {
  EvalSplit split = split_matrix(fm, opt.cutoff);
  detail::PreparedSplit prep = detail::prepare_split(fm, split);
  std::vector<EvalRow> rows;
  for (const auto& kind : opt.models)
    rows.push_back(detail::eval_one_model(kind, fm, split, prep, "All", holidays, opt, sink));
  return rows;
}

// --------------------------------------------------------------- ablation

struct AblationSubset {
  std::string label;                // featurestypes value in reports
  std::vector<std::string> groups;  // feature groups visible to the models
};

inline const std::vector<AblationSubset>& ablation_subsets() {
  static const std::vector<AblationSubset> subsets = {
      {"All", {kGroupSpatial, kGroupTemporal, kGroupNetwork}},
      {"spatial", {kGroupSpatial}},
      {"temporal", {kGroupTemporal}},
      {"network", {kGroupNetwork}},
      {"spatial and temporal", {kGroupSpatial, kGroupTemporal}},
      {"network and temporal", {kGroupNetwork, kGroupTemporal}},
      {"spatial and network", {kGroupSpatial, kGroupNetwork}},
  };
  return subsets;
}

// A copy of the matrix holding only the columns of the requested groups, so
// downstream fitting is structurally unable to touch excluded features.
inline FeatureMatrix restrict_to_groups(const FeatureMatrix& fm, const std::vector<std::string>& groups) {
  std::vector<size_t> cols;
  for (const auto& g : groups) {
    std::vector<size_t> gc = fm.group_columns(g);
    if (gc.empty()) throw ConfigError("feature group '" + g + "' has no columns in the assembled matrix");
    cols.insert(cols.end(), gc.begin(), gc.end());
  }
  std::sort(cols.begin(), cols.end());
  FeatureMatrix out;
  out.scale = fm.scale;
  out.level = fm.level;
  out.row_orig = fm.row_orig;
  out.row_dest = fm.row_dest;
  out.row_bucket = fm.row_bucket;
  out.target = fm.target;
  for (size_t c : cols) {
    out.feature_names.push_back(fm.feature_names[c]);
    out.feature_groups.push_back(fm.feature_groups[c]);
  }
  out.values.reserve(fm.n_rows());
  for (const auto& r : fm.values) {
    std::vector<double> row;
    row.reserve(cols.size());
    for (size_t c : cols) row.push_back(r[c]);
    out.values.push_back(std::move(row));
  }
  return out;
}

// Re-runs the configured regressors on exactly seven feature-group subsets.
// The seasonal baseline ignores features and is skipped here; benchmark
// rows already cover it.
inline std::vector<EvalRow> run_ablation(const FeatureMatrix& fm, const HolidayCalendar* holidays,
                                         const BenchmarkOptions& opt, util::WarningSink* sink = nullptr) {
  std::vector<EvalRow> rows;
  for (const auto& subset : ablation_subsets()) {
    FeatureMatrix sub = restrict_to_groups(fm, subset.groups);
    EvalSplit split = split_matrix(sub, opt.cutoff);
    detail::PreparedSplit prep = detail::prepare_split(sub, split);
    for (const auto& kind : opt.models) {
      if (kind == "seasonal_baseline") continue;
      rows.push_back(detail::eval_one_model(kind, sub, split, prep, subset.label, holidays, opt, sink));
    }
  }
  return rows;
}

// ----------------------------------------------------------- persistence

inline const std::string kEvalCsvHeader = "timeframe,geography,featurestypes,regressortype,regressor,mae,mape,mse,rmse";

inline void save_eval_csv(const std::string& path, const std::vector<EvalRow>& rows) {
  std::string out = kEvalCsvHeader + "\n";
  for (const auto& r : rows) {
    std::vector<std::string> fields = {r.timeframe, r.geography, r.featurestypes, r.regressortype, r.regressor};
    if (r.failed) {
      for (int i = 0; i < 4; ++i) fields.push_back("error");
    } else {
      fields.push_back(util::format_double(r.metrics.mae));
      fields.push_back(util::format_double(r.metrics.mape));
      fields.push_back(util::format_double(r.metrics.mse));
      fields.push_back(util::format_double(r.metrics.rmse));
    }
    out += csv::join_row(fields) + "\n";
  }
  util::write_file(path, out);
}

// Lowest test MAE wins; equal MAE falls back to lower RMSE. Failed rows
// never win. Returns an index into `rows`.
inline size_t best_row_index(const std::vector<EvalRow>& rows) {
  size_t best = rows.size();
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].failed) continue;
    if (best == rows.size() || rows[i].metrics.mae < rows[best].metrics.mae ||
        (rows[i].metrics.mae == rows[best].metrics.mae && rows[i].metrics.rmse < rows[best].metrics.rmse))
      best = i;
  }
  if (best == rows.size()) throw DomainError("every evaluated model failed; no best row");
  return best;
}

inline nlohmann::ordered_json eval_rows_to_json(const std::vector<EvalRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["timeframe"] = r.timeframe;
    j["geography"] = r.geography;
    j["featurestypes"] = r.featurestypes;
    j["regressortype"] = r.regressortype;
    j["regressor"] = r.regressor;
    if (r.failed) {
      j["error"] = r.error;
    } else {
      j["mae"] = r.metrics.mae;
      j["mape"] = r.metrics.mape;
      j["mse"] = r.metrics.mse;
      j["rmse"] = r.metrics.rmse;
      j["n_test_rows"] = r.metrics.n;
      j["mape_excluded"] = r.metrics.mape_excluded;
    }
    arr.push_back(j);
  }
  return arr;
}

inline void save_eval_summary(const std::string& path, const std::vector<EvalRow>& rows,
                              const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  size_t best = best_row_index(rows);
  j["best"] = {{"timeframe", rows[best].timeframe},
               {"geography", rows[best].geography},
               {"featurestypes", rows[best].featurestypes},
               {"regressor", rows[best].regressor},
               {"mae", rows[best].metrics.mae},
               {"rmse", rows[best].metrics.rmse}};
  j["rows"] = eval_rows_to_json(rows);
  util::write_file(path, j.dump(1) + "\n");
}

}  // namespace flowcast
