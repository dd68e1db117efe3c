#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "flowcast/common.hpp"

namespace flowcast {

// Point-forecast error metrics. MAPE averages |error / actual| only over
// rows whose actual value is nonzero and reports how many rows were
// excluded; with no usable rows it is NaN.
struct Metrics {
  double mae = 0;
  double mse = 0;
  double rmse = 0;
  double mape = 0;  // percent
  size_t n = 0;
  size_t mape_excluded = 0;
};

inline Metrics compute_metrics(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.size() != y_pred.size()) throw ShapeError("metrics: prediction and target lengths differ");
  if (y_true.empty()) throw DomainError("metrics require at least one row");
  Metrics m;
  m.n = y_true.size();
  double abs_sum = 0, sq_sum = 0, pct_sum = 0;
  size_t pct_n = 0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    double e = y_pred[i] - y_true[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    if (y_true[i] != 0.0) {
      pct_sum += std::abs(e / y_true[i]);
      ++pct_n;
    }
  }
  m.mae = abs_sum / static_cast<double>(m.n);
  m.mse = sq_sum / static_cast<double>(m.n);
  m.rmse = std::sqrt(m.mse);
  m.mape_excluded = m.n - pct_n;
  m.mape = pct_n > 0 ? 100.0 * pct_sum / static_cast<double>(pct_n) : std::nan("");
  return m;
}

}  // namespace flowcast
