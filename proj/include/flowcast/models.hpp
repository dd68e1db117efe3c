#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "flowcast/common.hpp"
#include "flowcast/io.hpp"
#include "flowcast/linalg.hpp"
#include "flowcast/rng.hpp"

namespace flowcast {

using Rows = std::vector<std::vector<double>>;

namespace detail {
inline void check_xy(const Rows& x, const std::vector<double>& y) {
  if (x.empty()) throw DomainError("fit requires at least one training row");
  if (x.size() != y.size()) throw ShapeError("fit: X and y row counts differ");
  size_t p = x.front().size();
  if (p == 0) throw ShapeError("fit: X needs at least one feature column");
  for (const auto& r : x)
    if (r.size() != p) throw ShapeError("fit: ragged feature matrix");
}
inline void check_predict(size_t expected, const Rows& x) {
  for (const auto& r : x)
    if (r.size() != expected)
      throw ShapeError("predict: expected " + std::to_string(expected) + " features, got " +
                       std::to_string(r.size()));
}
}  // namespace detail

// ------------------------------------------------------------ linear models

struct LinearModel {
  std::string kind;  // linear_regression | ridge | lasso | elastic_net
  double intercept = 0;
  std::vector<double> coef;
  double lambda = 0;
  double alpha = 1;                        // l1 share for elastic net
  std::vector<double> train_feature_means;  // kept for attribution baselines

  size_t n_features() const { return coef.size(); }
  double predict_row(const std::vector<double>& r) const {
    double v = intercept;
    for (size_t j = 0; j < coef.size(); ++j) v += coef[j] * r[j];
    return v;
  }
};

namespace detail {
inline std::vector<double> column_means(const Rows& x) {
  std::vector<double> mu(x.front().size(), 0.0);
  for (const auto& r : x)
    for (size_t j = 0; j < mu.size(); ++j) mu[j] += r[j];
  for (auto& v : mu) v /= static_cast<double>(x.size());
  return mu;
}
}  // namespace detail

// Ridge regression by normal equations with an unpenalized intercept;
// lambda = 0 recovers ordinary least squares (with a pseudo-inverse
// fallback when the normal matrix is singular).
inline LinearModel fit_ridge(const Rows& x, const std::vector<double>& y, double lambda) {
  detail::check_xy(x, y);
  if (lambda < 0) throw DomainError("ridge penalty must be >= 0");
  size_t n = x.size(), p = x.front().size();
  linalg::Matrix xa(n, p + 1);
  for (size_t i = 0; i < n; ++i) {
    xa(i, 0) = 1.0;
    for (size_t j = 0; j < p; ++j) xa(i, j + 1) = x[i][j];
  }
  linalg::Matrix a = linalg::gram(xa);
  for (size_t j = 1; j <= p; ++j) a(j, j) += lambda;
  std::vector<double> rhs = linalg::xty(xa, y);
  std::vector<double> beta;
  try {
    beta = linalg::cholesky_solve(linalg::cholesky(a), rhs);
  } catch (const NumericalError&) {
    beta = linalg::symmetric_pinv_solve(a, rhs);  // singular system: minimum-norm solution
  }
  LinearModel m;
  m.kind = lambda == 0 ? "linear_regression" : "ridge";
  m.lambda = lambda;
  m.intercept = beta[0];
  m.coef.assign(beta.begin() + 1, beta.end());
  m.train_feature_means = detail::column_means(x);
  return m;
}

inline LinearModel fit_ols(const Rows& x, const std::vector<double>& y) { return fit_ridge(x, y, 0.0); }

// Smallest penalty at which the elastic net solution is identically zero,
// computed on internally standardized columns.
inline double elastic_net_lambda_max(const Rows& x, const std::vector<double>& y, double alpha) {
  detail::check_xy(x, y);
  if (alpha <= 0 || alpha > 1) throw DomainError("elastic net alpha must be in (0, 1]");
  size_t n = x.size(), p = x.front().size();
  double ybar = 0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);
  std::vector<double> mu = detail::column_means(x);
  double best = 0;
  for (size_t j = 0; j < p; ++j) {
    double var = 0;
    for (size_t i = 0; i < n; ++i) var += (x[i][j] - mu[j]) * (x[i][j] - mu[j]);
    double sd = std::sqrt(var / static_cast<double>(n));
    if (sd == 0) continue;
    double dot = 0;
    for (size_t i = 0; i < n; ++i) dot += (x[i][j] - mu[j]) / sd * (y[i] - ybar);
    best = std::max(best, std::abs(dot) / static_cast<double>(n));
  }
  return best / alpha;
}

// Elastic net by cyclic coordinate descent with soft thresholding on
// internally standardized columns. Objective (per-sample scaling):
//   (1/2n) ||y - b0 - X b||^2 + lambda * (alpha ||b||_1 + (1-alpha)/2 ||b||^2)
inline LinearModel fit_elastic_net(const Rows& x, const std::vector<double>& y, double lambda, double alpha,
                                   int max_sweeps = 10000, double tol = 1e-8) {
  detail::check_xy(x, y);
  if (lambda < 0) throw DomainError("elastic net penalty must be >= 0");
  if (alpha <= 0 || alpha > 1) throw DomainError("elastic net alpha must be in (0, 1]");
  size_t n = x.size(), p = x.front().size();

  std::vector<double> mu = detail::column_means(x);
  std::vector<double> sd(p, 0.0);
  for (size_t j = 0; j < p; ++j) {
    double var = 0;
    for (size_t i = 0; i < n; ++i) var += (x[i][j] - mu[j]) * (x[i][j] - mu[j]);
    sd[j] = std::sqrt(var / static_cast<double>(n));
  }
  double ybar = 0;
  for (double v : y) ybar += v;
  ybar /= static_cast<double>(n);

  // Standardized design (constant columns become all-zero and stay at 0).
  Rows xs(n, std::vector<double>(p, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < p; ++j) xs[i][j] = sd[j] > 0 ? (x[i][j] - mu[j]) / sd[j] : 0.0;

  std::vector<double> beta(p, 0.0);
  std::vector<double> resid(n);
  for (size_t i = 0; i < n; ++i) resid[i] = y[i] - ybar;

  auto soft = [](double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); };
  double denom = 1.0 + lambda * (1.0 - alpha);

  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double max_delta = 0;
    for (size_t j = 0; j < p; ++j) {
      if (sd[j] == 0) continue;
      double rho = 0;
      for (size_t i = 0; i < n; ++i) rho += xs[i][j] * resid[i];
      rho = rho / static_cast<double>(n) + beta[j];  // unit variance: z_j == 1
      double nb = soft(rho, lambda * alpha) / denom;
      double delta = nb - beta[j];
      if (delta != 0) {
        for (size_t i = 0; i < n; ++i) resid[i] -= xs[i][j] * delta;
        beta[j] = nb;
      }
      max_delta = std::max(max_delta, std::abs(delta));
    }
    converged = max_delta < tol;
  }
  if (!converged) {
    double worst = 0;
    for (size_t j = 0; j < p; ++j) {
      if (sd[j] == 0) continue;
      double g = 0;
      for (size_t i = 0; i < n; ++i) g += xs[i][j] * resid[i];
      g /= static_cast<double>(n);
      double viol = beta[j] == 0 ? std::max(0.0, std::abs(g) - lambda * alpha)
                                 : std::abs(g - lambda * alpha * (beta[j] > 0 ? 1.0 : -1.0) -
                                            lambda * (1.0 - alpha) * beta[j]);
      worst = std::max(worst, viol);
    }
    throw NumericalError("coordinate descent did not converge in " + std::to_string(max_sweeps) +
                         " sweeps; last max KKT violation " + std::to_string(worst));
  }

  LinearModel m;
  m.kind = alpha == 1.0 ? "lasso" : "elastic_net";
  m.lambda = lambda;
  m.alpha = alpha;
  m.coef.assign(p, 0.0);
  double adj = 0;
  for (size_t j = 0; j < p; ++j) {
    if (sd[j] > 0) m.coef[j] = beta[j] / sd[j];
    adj += m.coef[j] * mu[j];
  }
  m.intercept = ybar - adj;
  m.train_feature_means = mu;
  return m;
}

inline LinearModel fit_lasso(const Rows& x, const std::vector<double>& y, double lambda, int max_sweeps = 10000,
                             double tol = 1e-8) {
  return fit_elastic_net(x, y, lambda, 1.0, max_sweeps, tol);
}

// ------------------------------------------------------------- tree models

struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0;
  uint32_t left = 0, right = 0;
  double value = 0;  // mean target of the training rows reaching the node
  double cover = 0;  // number of training rows reaching the node

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict_row(const std::vector<double>& r) const {
    size_t at = 0;
    while (!nodes[at].is_leaf()) at = r[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return nodes[at].value;
  }
};

struct TreeOptions {
  int max_depth = 0;  // 0 = unlimited
  size_t min_samples_split = 2;
  size_t min_samples_leaf = 1;
};

namespace detail {

using Presort = std::vector<std::vector<uint32_t>>;  // per feature: slots sorted by value

// Sorted slot orders for a sample of rows (slot s holds row sample[s]).
inline Presort build_presort(const Rows& x, const std::vector<uint32_t>& sample) {
  size_t p = x.front().size(), n = sample.size();
  Presort order(p, std::vector<uint32_t>(n));
  for (size_t j = 0; j < p; ++j) {
    auto& o = order[j];
    for (uint32_t s = 0; s < n; ++s) o[s] = s;
    std::sort(o.begin(), o.end(), [&](uint32_t a, uint32_t b) {
      double va = x[sample[a]][j], vb = x[sample[b]][j];
      if (va != vb) return va < vb;
      return a < b;
    });
  }
  return order;
}

// Level-synchronous CART builder over segmented presorted index arrays.
// Splits minimize the summed squared error of the two children, scanning
// features in ascending index and thresholds in ascending value, keeping
// the first strict improvement (lowest feature index, then lowest
// threshold, on ties).
class TreeBuilder {
 public:
  TreeBuilder(const Rows& x, const std::vector<double>& y, std::vector<uint32_t> sample, const TreeOptions& opt,
              Presort presort, Rng* feature_rng = nullptr, double feature_subsample = 1.0)
      : x_(x), opt_(opt), sample_(std::move(sample)), order_(std::move(presort)), rng_(feature_rng) {
    p_ = x.front().size();
    n_ = sample_.size();
    y_slot_.resize(n_);
    for (uint32_t s = 0; s < n_; ++s) y_slot_[s] = y[sample_[s]];
    n_candidates_ = p_;
    if (feature_subsample < 1.0) {
      n_candidates_ = static_cast<size_t>(std::max(1.0, std::floor(feature_subsample * static_cast<double>(p_) + 1e-9)));
      n_candidates_ = std::min(n_candidates_, p_);
    }
  }

  Tree build() {
    Tree tree;
    struct Item {
      size_t begin, end;
      int depth;
      uint32_t node;
    };
    std::vector<Item> queue;
    tree.nodes.push_back({});
    queue.push_back({0, n_, 0, 0});
    std::vector<uint32_t> scratch(n_);
    std::vector<size_t> feat_pool(p_);
    for (size_t j = 0; j < p_; ++j) feat_pool[j] = j;

    for (size_t qi = 0; qi < queue.size(); ++qi) {
      Item it = queue[qi];
      size_t cnt = it.end - it.begin;
      double sum = 0, sumsq = 0;
      for (size_t pos = it.begin; pos < it.end; ++pos) {
        double v = y_slot_[order_[0][pos]];
        sum += v;
        sumsq += v * v;
      }
      TreeNode& node = tree.nodes[it.node];
      node.value = sum / static_cast<double>(cnt);
      node.cover = static_cast<double>(cnt);

      bool splittable = cnt >= opt_.min_samples_split && (opt_.max_depth == 0 || it.depth < opt_.max_depth) &&
                        sumsq - sum * sum / static_cast<double>(cnt) > 0;
      int best_feature = -1;
      double best_threshold = 0, best_sse = std::numeric_limits<double>::infinity();
      if (splittable) {
        // Candidate features: all, or a seeded subset drawn per split.
        size_t k = n_candidates_;
        if (k < p_ && rng_) {
          for (size_t j = 0; j < k; ++j) {
            size_t swap_with = j + static_cast<size_t>(rng_->uniform_index(p_ - j));
            std::swap(feat_pool[j], feat_pool[swap_with]);
          }
          std::sort(feat_pool.begin(), feat_pool.begin() + static_cast<long>(k));
        }
        for (size_t fi = 0; fi < k; ++fi) {
          size_t j = k < p_ ? feat_pool[fi] : fi;
          const auto& ord = order_[j];
          double lsum = 0, lsumsq = 0;
          size_t lcnt = 0;
          double prev = 0;
          for (size_t pos = it.begin; pos < it.end; ++pos) {
            double v = x_[sample_[ord[pos]]][j];
            if (lcnt > 0 && v > prev) {
              size_t rcnt = cnt - lcnt;
              if (lcnt >= opt_.min_samples_leaf && rcnt >= opt_.min_samples_leaf) {
                double rsum = sum - lsum, rsumsq = sumsq - lsumsq;
                double sse = (lsumsq - lsum * lsum / static_cast<double>(lcnt)) +
                             (rsumsq - rsum * rsum / static_cast<double>(rcnt));
                if (sse < best_sse) {
                  best_sse = sse;
                  best_feature = static_cast<int>(j);
                  best_threshold = (prev + v) / 2.0;
                }
              }
            }
            double yv = y_slot_[ord[pos]];
            lsum += yv;
            lsumsq += yv * yv;
            ++lcnt;
            prev = v;
          }
        }
      }

      if (best_feature < 0) {
        node.feature = -1;  // leaf
        continue;
      }
      node.feature = best_feature;
      node.threshold = best_threshold;

      // Stable partition of every feature order by the chosen split.
      size_t n_left = 0;
      {
        const auto& ord = order_[static_cast<size_t>(best_feature)];
        for (size_t pos = it.begin; pos < it.end; ++pos)
          if (x_[sample_[ord[pos]]][static_cast<size_t>(best_feature)] <= best_threshold) ++n_left;
      }
      for (size_t j = 0; j < p_; ++j) {
        auto& ord = order_[j];
        size_t l = 0, r = n_left;
        for (size_t pos = it.begin; pos < it.end; ++pos) {
          uint32_t slot = ord[pos];
          if (x_[sample_[slot]][static_cast<size_t>(best_feature)] <= best_threshold)
            scratch[l++] = slot;
          else
            scratch[r++] = slot;
        }
        for (size_t pos = 0; pos < cnt; ++pos) ord[it.begin + pos] = scratch[pos];
      }

      uint32_t left_id = static_cast<uint32_t>(tree.nodes.size());
      tree.nodes.push_back({});
      uint32_t right_id = static_cast<uint32_t>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes[it.node].left = left_id;
      tree.nodes[it.node].right = right_id;
      queue.push_back({it.begin, it.begin + n_left, it.depth + 1, left_id});
      queue.push_back({it.begin + n_left, it.end, it.depth + 1, right_id});
    }
    return tree;
  }

 private:
  const Rows& x_;
  TreeOptions opt_;
  std::vector<uint32_t> sample_;
  Presort order_;
  Rng* rng_;
  std::vector<double> y_slot_;
  size_t p_ = 0, n_ = 0, n_candidates_ = 0;
};

inline std::vector<uint32_t> identity_sample(size_t n) {
  std::vector<uint32_t> s(n);
  for (uint32_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

}  // namespace detail

struct TreeModel {
  Tree tree;
  TreeOptions options;
  size_t n_features = 0;
};

inline TreeModel fit_tree(const Rows& x, const std::vector<double>& y, const TreeOptions& opt = {}) {
  detail::check_xy(x, y);
  if (opt.min_samples_leaf < 1 || opt.min_samples_split < 2)
    throw DomainError("tree requires min_samples_leaf >= 1 and min_samples_split >= 2");
  auto sample = detail::identity_sample(x.size());
  detail::TreeBuilder builder(x, y, sample, opt, detail::build_presort(x, sample));
  return TreeModel{builder.build(), opt, x.front().size()};
}

// ---------------------------------------------------------- ensemble models

struct ForestOptions {
  size_t n_trees = 1000;
  TreeOptions tree;
  double feature_subsample = 1.0 / 3.0;  // candidate share per split
  bool bootstrap = true;
  uint64_t seed = 0;
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestOptions options;
  size_t n_features = 0;

  double predict_row(const std::vector<double>& r) const {
    double s = 0;
    for (const auto& t : trees) s += t.predict_row(r);
    return s / static_cast<double>(trees.size());
  }
};

inline ForestModel fit_forest(const Rows& x, const std::vector<double>& y, const ForestOptions& opt = {}) {
  detail::check_xy(x, y);
  if (opt.n_trees == 0) throw DomainError("forest requires at least one tree");
  if (opt.feature_subsample <= 0 || opt.feature_subsample > 1)
    throw DomainError("forest feature_subsample must be in (0, 1]");
  ForestModel m;
  m.options = opt;
  m.n_features = x.front().size();
  Rng root(opt.seed);
  std::shared_ptr<detail::Presort> shared_presort;
  if (!opt.bootstrap)
    shared_presort = std::make_shared<detail::Presort>(detail::build_presort(x, detail::identity_sample(x.size())));
  for (size_t t = 0; t < opt.n_trees; ++t) {
    Rng tree_rng = root.child("tree_" + std::to_string(t));
    std::vector<uint32_t> sample;
    if (opt.bootstrap) {
      sample.resize(x.size());
      for (auto& s : sample) s = static_cast<uint32_t>(tree_rng.uniform_index(x.size()));
    } else {
      sample = detail::identity_sample(x.size());
    }
    detail::Presort presort = opt.bootstrap ? detail::build_presort(x, sample) : *shared_presort;
    detail::TreeBuilder builder(x, y, std::move(sample), opt.tree, std::move(presort),
                                opt.feature_subsample < 1.0 ? &tree_rng : nullptr, opt.feature_subsample);
    m.trees.push_back(builder.build());
  }
  return m;
}

struct GbmOptions {
  size_t n_stages = 2000;
  double learning_rate = 0.1;
  TreeOptions tree{.max_depth = 5};
  double early_stop_tol = 1e-12;  // minimum RMSE improvement
  size_t early_stop_patience = 10;
};

struct GbmModel {
  double base_score = 0;
  double learning_rate = 0.1;
  std::vector<Tree> trees;
  std::vector<double> stage_rmse;  // training RMSE after each kept stage
  GbmOptions options;
  size_t n_features = 0;

  double predict_row(const std::vector<double>& r) const {
    double s = base_score;
    for (const auto& t : trees) s += learning_rate * t.predict_row(r);
    return s;
  }
};

// Least-squares gradient boosting: starts from the training mean and adds
// shrunken regression trees fitted to the current residuals. Training RMSE
// is recorded per stage and is non-increasing; fitting stops early once the
// improvement stays below tolerance for `early_stop_patience` stages.
inline GbmModel fit_gbm(const Rows& x, const std::vector<double>& y, const GbmOptions& opt = {}) {
  detail::check_xy(x, y);
  if (opt.learning_rate <= 0 || opt.learning_rate > 1) throw DomainError("gbm learning rate must be in (0, 1]");
  GbmModel m;
  m.options = opt;
  m.learning_rate = opt.learning_rate;
  m.n_features = x.front().size();
  size_t n = x.size();
  double mean = 0;
  for (double v : y) mean += v;
  m.base_score = mean / static_cast<double>(n);

  std::vector<double> pred(n, m.base_score), resid(n);
  auto sample = detail::identity_sample(n);
  detail::Presort base_presort = detail::build_presort(x, sample);

  size_t stagnant = 0;
  double last_rmse = std::numeric_limits<double>::infinity();
  for (size_t stage = 0; stage < opt.n_stages; ++stage) {
    for (size_t i = 0; i < n; ++i) resid[i] = y[i] - pred[i];
    detail::TreeBuilder builder(x, resid, sample, opt.tree, base_presort);
    Tree tree = builder.build();
    double sse = 0;
    for (size_t i = 0; i < n; ++i) {
      pred[i] += opt.learning_rate * tree.predict_row(x[i]);
      double e = y[i] - pred[i];
      sse += e * e;
    }
    m.trees.push_back(std::move(tree));
    double rmse = std::sqrt(sse / static_cast<double>(n));
    m.stage_rmse.push_back(rmse);
    if (last_rmse - rmse < opt.early_stop_tol) {
      if (++stagnant >= opt.early_stop_patience) break;
    } else {
      stagnant = 0;
    }
    last_rmse = rmse;
  }
  return m;
}

// ----------------------------------------------------------------- kNN

struct KnnModel {
  size_t k = 5;
  Rows train_x;
  std::vector<double> train_y;

  double predict_row(const std::vector<double>& r) const {
    std::vector<std::pair<double, size_t>> d(train_x.size());
    for (size_t i = 0; i < train_x.size(); ++i) {
      double s = 0;
      for (size_t j = 0; j < r.size(); ++j) {
        double diff = train_x[i][j] - r[j];
        s += diff * diff;
      }
      d[i] = {s, i};
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<long>(k), d.end());  // ties by training-row index
    double sum = 0;
    for (size_t i = 0; i < k; ++i) sum += train_y[d[i].second];
    return sum / static_cast<double>(k);
  }
};

inline KnnModel fit_knn(const Rows& x, const std::vector<double>& y, size_t k) {
  detail::check_xy(x, y);
  if (k == 0 || k > x.size())
    throw DomainError("knn requires 1 <= k <= number of training rows, got k=" + std::to_string(k) + " with " +
                      std::to_string(x.size()) + " rows");
  return KnnModel{k, x, y};
}

// ------------------------------------------------------------ model facade

using Model = std::variant<LinearModel, TreeModel, ForestModel, GbmModel, KnnModel>;

inline std::string model_kind(const Model& m) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearModel>) return v.kind;
        if constexpr (std::is_same_v<T, TreeModel>) return "decision_tree";
        if constexpr (std::is_same_v<T, ForestModel>) return "random_forest";
        if constexpr (std::is_same_v<T, GbmModel>) return "gradient_boosting";
        if constexpr (std::is_same_v<T, KnnModel>) return "knn";
      },
      m);
}

inline size_t model_n_features(const Model& m) {
  return std::visit(
      [](const auto& v) -> size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearModel>) return v.n_features();
        if constexpr (std::is_same_v<T, TreeModel>) return v.n_features;
        if constexpr (std::is_same_v<T, ForestModel>) return v.n_features;
        if constexpr (std::is_same_v<T, GbmModel>) return v.n_features;
        if constexpr (std::is_same_v<T, KnnModel>) return v.train_x.empty() ? 0 : v.train_x.front().size();
      },
      m);
}

inline std::vector<double> predict(const Model& m, const Rows& x) {
  detail::check_predict(model_n_features(m), x);
  std::vector<double> out;
  out.reserve(x.size());
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        for (const auto& r : x) {
          if constexpr (std::is_same_v<T, TreeModel>)
            out.push_back(v.tree.predict_row(r));
          else
            out.push_back(v.predict_row(r));
        }
      },
      m);
  return out;
}

// ------------------------------------------------------------ persistence

constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::ordered_json tree_to_json(const Tree& t) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const auto& n : t.nodes) {
    nlohmann::ordered_json nj;
    nj["f"] = n.feature;
    nj["t"] = n.threshold;
    nj["l"] = n.left;
    nj["r"] = n.right;
    nj["v"] = n.value;
    nj["c"] = n.cover;
    nodes.push_back(nj);
  }
  return nodes;
}

inline Tree tree_from_json(const nlohmann::json& j) {
  Tree t;
  for (const auto& nj : j) {
    TreeNode n;
    n.feature = nj.at("f").get<int32_t>();
    n.threshold = nj.at("t").get<double>();
    n.left = nj.at("l").get<uint32_t>();
    n.right = nj.at("r").get<uint32_t>();
    n.value = nj.at("v").get<double>();
    n.cover = nj.at("c").get<double>();
    t.nodes.push_back(n);
  }
  if (t.nodes.empty()) throw FormatError("model file holds an empty tree");
  return t;
}

inline nlohmann::ordered_json tree_options_to_json(const TreeOptions& o) {
  return {{"max_depth", o.max_depth}, {"min_samples_split", o.min_samples_split}, {"min_samples_leaf", o.min_samples_leaf}};
}

inline TreeOptions tree_options_from_json(const nlohmann::json& j) {
  TreeOptions o;
  o.max_depth = j.at("max_depth").get<int>();
  o.min_samples_split = j.at("min_samples_split").get<size_t>();
  o.min_samples_leaf = j.at("min_samples_leaf").get<size_t>();
  return o;
}

}  // namespace detail

inline void save_model(const std::string& path, const Model& m) {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = model_kind(m);
  j["n_features"] = model_n_features(m);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["hyperparameters"] = {{"lambda", v.lambda}, {"alpha", v.alpha}};
          j["intercept"] = v.intercept;
          j["coefficients"] = v.coef;
          j["train_feature_means"] = v.train_feature_means;
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          j["hyperparameters"] = detail::tree_options_to_json(v.options);
          j["trees"] = nlohmann::ordered_json::array({detail::tree_to_json(v.tree)});
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          j["hyperparameters"] = {{"n_trees", v.options.n_trees},
                                  {"feature_subsample", v.options.feature_subsample},
                                  {"bootstrap", v.options.bootstrap},
                                  {"tree", detail::tree_options_to_json(v.options.tree)}};
          j["seed"] = v.options.seed;
          nlohmann::ordered_json trees = nlohmann::ordered_json::array();
          for (const auto& t : v.trees) trees.push_back(detail::tree_to_json(t));
          j["trees"] = trees;
        } else if constexpr (std::is_same_v<T, GbmModel>) {
          j["hyperparameters"] = {{"n_stages", v.options.n_stages},
                                  {"learning_rate", v.options.learning_rate},
                                  {"early_stop_tol", v.options.early_stop_tol},
                                  {"early_stop_patience", v.options.early_stop_patience},
                                  {"tree", detail::tree_options_to_json(v.options.tree)}};
          j["base_score"] = v.base_score;
          j["stage_rmse"] = v.stage_rmse;
          nlohmann::ordered_json trees = nlohmann::ordered_json::array();
          for (const auto& t : v.trees) trees.push_back(detail::tree_to_json(t));
          j["trees"] = trees;
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          j["hyperparameters"] = {{"k", v.k}};
          j["train_x"] = v.train_x;
          j["train_y"] = v.train_y;
        }
      },
      m);
  util::write_file(path, j.dump(1) + "\n");
}

inline Model load_model(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(util::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model file is not valid JSON (truncated or corrupt): " + std::string(e.what()));
  }
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw FormatError("unsupported model format version");
    std::string kind = j.at("kind").get<std::string>();
    size_t n_features = j.at("n_features").get<size_t>();
    if (kind == "linear_regression" || kind == "ridge" || kind == "lasso" || kind == "elastic_net") {
      LinearModel m;
      m.kind = kind;
      m.lambda = j.at("hyperparameters").at("lambda").get<double>();
      m.alpha = j.at("hyperparameters").at("alpha").get<double>();
      m.intercept = j.at("intercept").get<double>();
      m.coef = j.at("coefficients").get<std::vector<double>>();
      m.train_feature_means = j.at("train_feature_means").get<std::vector<double>>();
      if (m.coef.size() != n_features) throw FormatError("model coefficient count mismatch");
      return m;
    }
    if (kind == "decision_tree") {
      TreeModel m;
      m.options = detail::tree_options_from_json(j.at("hyperparameters"));
      m.tree = detail::tree_from_json(j.at("trees").at(0));
      m.n_features = n_features;
      return m;
    }
    if (kind == "random_forest") {
      ForestModel m;
      m.options.n_trees = j.at("hyperparameters").at("n_trees").get<size_t>();
      m.options.feature_subsample = j.at("hyperparameters").at("feature_subsample").get<double>();
      m.options.bootstrap = j.at("hyperparameters").at("bootstrap").get<bool>();
      m.options.tree = detail::tree_options_from_json(j.at("hyperparameters").at("tree"));
      m.options.seed = j.at("seed").get<uint64_t>();
      for (const auto& tj : j.at("trees")) m.trees.push_back(detail::tree_from_json(tj));
      if (m.trees.empty()) throw FormatError("forest model holds no trees");
      m.n_features = n_features;
      return m;
    }
    if (kind == "gradient_boosting") {
      GbmModel m;
      m.options.n_stages = j.at("hyperparameters").at("n_stages").get<size_t>();
      m.options.learning_rate = j.at("hyperparameters").at("learning_rate").get<double>();
      m.options.early_stop_tol = j.at("hyperparameters").at("early_stop_tol").get<double>();
      m.options.early_stop_patience = j.at("hyperparameters").at("early_stop_patience").get<size_t>();
      m.options.tree = detail::tree_options_from_json(j.at("hyperparameters").at("tree"));
      m.learning_rate = m.options.learning_rate;
      m.base_score = j.at("base_score").get<double>();
      m.stage_rmse = j.at("stage_rmse").get<std::vector<double>>();
      for (const auto& tj : j.at("trees")) m.trees.push_back(detail::tree_from_json(tj));
      m.n_features = n_features;
      return m;
    }
    if (kind == "knn") {
      KnnModel m;
      m.k = j.at("hyperparameters").at("k").get<size_t>();
      m.train_x = j.at("train_x").get<Rows>();
      m.train_y = j.at("train_y").get<std::vector<double>>();
      if (m.k == 0 || m.k > m.train_x.size()) throw FormatError("knn model has invalid k");
      return m;
    }
    throw FormatError("unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model file is missing required fields: " + std::string(e.what()));
  }
}

}  // namespace flowcast
