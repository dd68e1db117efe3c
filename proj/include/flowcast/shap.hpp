#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowcast/common.hpp"
#include "flowcast/csv.hpp"
#include "flowcast/io.hpp"
#include "flowcast/models.hpp"
#include "flowcast/numio.hpp"
#include "flowcast/rng.hpp"

namespace flowcast {

// Exact per-feature attributions for the model zoo. Tree ensembles use the
// polynomial-time path-dependent algorithm in which the conditional
// expectation of a subtree under a partially-known input is taken with
// respect to the training-cover distribution recorded at fit time. Linear
// models decompose exactly as coef_j * (x_j - training mean of feature j).
// Attributions satisfy local accuracy: sum(phi) + base_value == prediction.

namespace detail {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0;  // share of cover that flows down when the feature is unknown
  double one_fraction = 0;   // 1 when the known input follows this branch, else 0
  double pweight = 0;
};

inline void shap_extend(std::vector<PathElement>& m, double pz, double po, int pi) {
  size_t l = m.size();
  m.push_back({pi, pz, po, l == 0 ? 1.0 : 0.0});
  for (size_t i = l; i-- > 0;) {
    m[i + 1].pweight += po * m[i].pweight * static_cast<double>(i + 1) / static_cast<double>(l + 1);
    m[i].pweight = pz * m[i].pweight * static_cast<double>(l - i) / static_cast<double>(l + 1);
  }
}

inline std::vector<PathElement> shap_unwind(std::vector<PathElement> m, size_t idx) {
  size_t d = m.size() - 1;
  double one = m[idx].one_fraction, zero = m[idx].zero_fraction;
  double n = m[d].pweight;
  for (size_t j = d; j-- > 0;) {
    if (one != 0) {
      double tmp = m[j].pweight;
      m[j].pweight = n * static_cast<double>(d + 1) / (static_cast<double>(j + 1) * one);
      n = tmp - m[j].pweight * zero * static_cast<double>(d - j) / static_cast<double>(d + 1);
    } else {
      m[j].pweight = m[j].pweight * static_cast<double>(d + 1) / (zero * static_cast<double>(d - j));
    }
  }
  for (size_t j = idx; j < d; ++j) {
    m[j].feature = m[j + 1].feature;
    m[j].zero_fraction = m[j + 1].zero_fraction;
    m[j].one_fraction = m[j + 1].one_fraction;
  }
  m.pop_back();
  return m;
}

inline void shap_recurse(const Tree& tree, size_t at, const std::vector<double>& x,
                         std::vector<PathElement> path, double p_zero, double p_one, int p_feature,
                         std::vector<double>& phi) {
  shap_extend(path, p_zero, p_one, p_feature);
  const TreeNode& node = tree.nodes[at];
  if (node.is_leaf()) {
    for (size_t i = 1; i < path.size(); ++i) {
      std::vector<PathElement> unwound = shap_unwind(path, i);
      double w = 0;
      for (const auto& el : unwound) w += el.pweight;
      phi[static_cast<size_t>(path[i].feature)] += w * (path[i].one_fraction - path[i].zero_fraction) * node.value;
    }
    return;
  }
  size_t hot = x[static_cast<size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  size_t cold = hot == node.left ? node.right : node.left;
  double incoming_zero = 1.0, incoming_one = 1.0;
  for (size_t k = 1; k < path.size(); ++k) {
    if (path[k].feature == node.feature) {
      incoming_zero = path[k].zero_fraction;
      incoming_one = path[k].one_fraction;
      path = shap_unwind(path, k);
      break;
    }
  }
  double cover = node.cover;
  shap_recurse(tree, hot, x, path, incoming_zero * tree.nodes[hot].cover / cover, incoming_one, node.feature, phi);
  shap_recurse(tree, cold, x, std::move(path), incoming_zero * tree.nodes[cold].cover / cover, 0.0, node.feature,
               phi);
}

inline void check_covers(const Tree& tree) {
  for (const auto& n : tree.nodes)
    if (!(n.cover > 0))
      throw FormatError("tree model is missing positive node covers required for attribution");
}

}  // namespace detail

// Cover-weighted expectation of a single tree (its value on a row about
// which nothing is known).
inline double tree_expected_value(const Tree& tree) {
  detail::check_covers(tree);
  double acc = 0;
  for (const auto& n : tree.nodes)
    if (n.is_leaf()) acc += n.value * n.cover;
  return acc / tree.nodes.front().cover;
}

// Exact attributions of a single (unscaled) tree for one row.
inline std::vector<double> tree_shap_row(const Tree& tree, const std::vector<double>& x, size_t n_features) {
  detail::check_covers(tree);
  std::vector<double> phi(n_features, 0.0);
  if (tree.nodes.front().is_leaf()) return phi;  // constant tree attributes nothing
  detail::shap_recurse(tree, 0, x, {}, 1.0, 1.0, -1, phi);
  return phi;
}

struct ShapExplanation {
  double base_value = 0;                  // expectation of the model over training cover
  std::vector<std::vector<double>> phi;   // one attribution row per input row
};

inline ShapExplanation shap_values(const Model& model, const Rows& x) {
  detail::check_predict(model_n_features(model), x);
  size_t p = model_n_features(model);
  ShapExplanation out;
  out.phi.assign(x.size(), std::vector<double>(p, 0.0));

  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    if (lin->train_feature_means.size() != p)
      throw FormatError("linear model is missing training feature means required for attribution");
    out.base_value = lin->intercept;
    for (size_t j = 0; j < p; ++j) out.base_value += lin->coef[j] * lin->train_feature_means[j];
    for (size_t i = 0; i < x.size(); ++i)
      for (size_t j = 0; j < p; ++j) out.phi[i][j] = lin->coef[j] * (x[i][j] - lin->train_feature_means[j]);
    return out;
  }
  if (const auto* tm = std::get_if<TreeModel>(&model)) {
    out.base_value = tree_expected_value(tm->tree);
    for (size_t i = 0; i < x.size(); ++i) out.phi[i] = tree_shap_row(tm->tree, x[i], p);
    return out;
  }
  if (const auto* fm = std::get_if<ForestModel>(&model)) {
    double scale = 1.0 / static_cast<double>(fm->trees.size());
    out.base_value = 0;
    for (const auto& t : fm->trees) out.base_value += scale * tree_expected_value(t);
    for (size_t i = 0; i < x.size(); ++i)
      for (const auto& t : fm->trees) {
        std::vector<double> phi = tree_shap_row(t, x[i], p);
        for (size_t j = 0; j < p; ++j) out.phi[i][j] += scale * phi[j];
      }
    return out;
  }
  if (const auto* gm = std::get_if<GbmModel>(&model)) {
    out.base_value = gm->base_score;
    for (const auto& t : gm->trees) out.base_value += gm->learning_rate * tree_expected_value(t);
    for (size_t i = 0; i < x.size(); ++i)
      for (const auto& t : gm->trees) {
        std::vector<double> phi = tree_shap_row(t, x[i], p);
        for (size_t j = 0; j < p; ++j) out.phi[i][j] += gm->learning_rate * phi[j];
      }
    return out;
  }
  throw DomainError("attribution is not defined for model kind '" + model_kind(model) + "'");
}

// ------------------------------------------------------- importance report

struct FeatureImportance {
  std::string name;
  std::string group;
  double mean_abs_shap = 0;
};

struct ImportanceReport {
  double base_value_mean = 0;
  size_t n_rows_used = 0;
  std::vector<FeatureImportance> features;  // sorted by mean_abs_shap, descending
  std::map<std::string, double> groups;     // total mean-|phi| per feature group
};

// Mean absolute attribution per feature over (a seeded subsample of) the
// given rows, with per-group totals.
inline ImportanceReport shap_importance(const Model& model, const Rows& x, const std::vector<std::string>& names,
                                        const std::vector<std::string>& groups, size_t max_rows = 2000,
                                        uint64_t seed = 0) {
  size_t p = model_n_features(model);
  if (names.size() != p || groups.size() != p)
    throw ShapeError("importance: feature name/group lists must match model feature count");
  if (x.empty()) throw DomainError("importance requires at least one row");

  Rows sample;
  if (x.size() <= max_rows) {
    sample = x;
  } else {
    std::vector<size_t> idx(x.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng = Rng(seed).child("shap_sample");
    for (size_t i = 0; i < max_rows; ++i) {
      size_t j = i + static_cast<size_t>(rng.uniform_index(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(max_rows);
    std::sort(idx.begin(), idx.end());
    sample.reserve(max_rows);
    for (size_t i : idx) sample.push_back(x[i]);
  }

  ShapExplanation ex = shap_values(model, sample);
  ImportanceReport rep;
  rep.base_value_mean = ex.base_value;
  rep.n_rows_used = sample.size();
  std::vector<double> mean_abs(p, 0.0);
  for (const auto& row : ex.phi)
    for (size_t j = 0; j < p; ++j) mean_abs[j] += std::abs(row[j]);
  for (size_t j = 0; j < p; ++j) {
    mean_abs[j] /= static_cast<double>(sample.size());
    rep.features.push_back({names[j], groups[j], mean_abs[j]});
    rep.groups[groups[j]] += mean_abs[j];
  }
  std::stable_sort(rep.features.begin(), rep.features.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) {
                     if (a.mean_abs_shap != b.mean_abs_shap) return a.mean_abs_shap > b.mean_abs_shap;
                     return a.name < b.name;
                   });
  return rep;
}

inline nlohmann::ordered_json importance_to_json(const ImportanceReport& rep) {
  nlohmann::ordered_json j;
  j["base_value_mean"] = rep.base_value_mean;
  j["n_rows_used"] = rep.n_rows_used;
  nlohmann::ordered_json feats = nlohmann::ordered_json::array();
  for (const auto& f : rep.features)
    feats.push_back({{"name", f.name}, {"group", f.group}, {"mean_abs_shap", f.mean_abs_shap}});
  j["features"] = feats;
  nlohmann::ordered_json groups;
  for (const auto& [g, v] : rep.groups) groups[g] = v;
  j["groups"] = groups;
  return j;
}

inline void save_importance_json(const std::string& path, const ImportanceReport& rep) {
  util::write_file(path, importance_to_json(rep).dump(1) + "\n");
}

inline void save_importance_csv(const std::string& path, const ImportanceReport& rep) {
  std::string out = "feature,group,mean_abs_shap\n";
  for (const auto& f : rep.features)
    out += csv::join_row({f.name, f.group, util::format_double(f.mean_abs_shap)}) + "\n";
  util::write_file(path, out);
}

}  // namespace flowcast
