#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowcast/common.hpp"
#include "flowcast/flowgraph.hpp"
#include "flowcast/linalg.hpp"
#include "flowcast/timeutil.hpp"
#include "flowcast/trips.hpp"

namespace flowcast {

constexpr double kWeekSeconds = 7.0 * 86400.0;
constexpr double kYearSeconds = 365.25 * 86400.0;

struct SeasonalOptions {
  int n_changepoints = 10;  // piecewise-linear trend knots at uniform quantiles
  int weekly_order = 3;     // Fourier harmonics for the weekly cycle
  int yearly_order = 10;    // Fourier harmonics for the yearly cycle
  double ridge_lambda = 1e-3;
};

// Additive decomposition of a citywide demand series:
//   yhat(t) = trend(t) + weekly(t) + yearly(t) + holiday(t)
// fitted jointly by ridge regression on history strictly before a cutoff.
// Components whose cycle cannot be identified from the history (too short a
// span, or bucket spacing too coarse to sample the cycle) are dropped with a
// warning and evaluate to zero.
struct SeasonalModel {
  Timestamp t0 = 0;   // first training timestamp
  double span_s = 1;  // training span in seconds (>= 1)

  double intercept = 0;
  double slope = 0;
  std::vector<double> changepoints;  // scaled to (0, 1)
  std::vector<double> deltas;        // slope adjustments, one per changepoint

  bool has_weekly = false;
  std::vector<int> weekly_harmonics;
  std::vector<double> weekly_coefs;  // sin, cos per harmonic
  bool has_yearly = false;
  std::vector<int> yearly_harmonics;
  std::vector<double> yearly_coefs;

  bool has_holiday = false;
  double holiday_coef = 0;
  std::set<Timestamp> holiday_days;  // day starts, copied from the calendar

  bool is_holiday(Timestamp t) const { return holiday_days.count(truncate_to_scale(t, Scale::Daily)) > 0; }
};

struct SeasonalComponents {
  double trend = 0, weekly = 0, yearly = 0, holiday = 0;
  double yhat = 0;  // sum of the four components
};

namespace detail {

// Worst-case spacing between consecutive buckets of a scale, used to decide
// whether a harmonic is observable (its half-period must cover the spacing).
inline double bucket_spacing_seconds(Scale scale) {
  switch (scale) {
    case Scale::Hourly: return 3600.0;
    case Scale::Daily: return 86400.0;
    case Scale::Monthly: return 31.0 * 86400.0;
  }
  return 86400.0;
}

inline std::vector<int> observable_harmonics(int order, double period_s, double spacing_s) {
  std::vector<int> out;
  for (int k = 1; k <= order; ++k)
    if (period_s / k >= 2.0 * spacing_s) out.push_back(k);
  return out;
}

}  // namespace detail

inline SeasonalModel fit_seasonal(const std::map<Timestamp, double>& history, const HolidayCalendar* holidays,
                                  Timestamp cutoff, Scale scale, const SeasonalOptions& opt = {},
                                  util::WarningSink* sink = nullptr) {
  std::vector<Timestamp> ts;
  std::vector<double> y;
  for (const auto& [t, v] : history) {
    if (t >= cutoff) continue;
    ts.push_back(t);
    y.push_back(v);
  }
  size_t m = ts.size();
  if (m == 0) throw DomainError("seasonal fit requires non-empty training history before the cutoff");

  SeasonalModel model;
  model.t0 = ts.front();
  model.span_s = std::max<double>(static_cast<double>(ts.back() - ts.front()), 1.0);

  // Trend changepoints at uniform quantiles of the training timestamps.
  {
    int k_req = std::max(0, opt.n_changepoints);
    int k_max = static_cast<int>(m) - 2;
    int k = std::max(0, std::min(k_req, k_max));
    std::set<double> cps;
    for (int j = 1; j <= k; ++j) {
      size_t idx = static_cast<size_t>(std::llround(static_cast<double>(j) * (m - 1) / (k + 1)));
      double c = static_cast<double>(ts[idx] - model.t0) / model.span_s;
      if (c > 0.0 && c < 1.0) cps.insert(c);
    }
    model.changepoints.assign(cps.begin(), cps.end());
  }

  double spacing = detail::bucket_spacing_seconds(scale);
  if (model.span_s >= 2.0 * kWeekSeconds) {
    model.weekly_harmonics = detail::observable_harmonics(opt.weekly_order, kWeekSeconds, spacing);
    model.has_weekly = !model.weekly_harmonics.empty();
    if (!model.has_weekly && sink)
      sink->warn("seasonal: weekly cycle dropped, bucket spacing too coarse to sample it");
  } else if (sink && opt.weekly_order > 0) {
    sink->warn("seasonal: weekly cycle dropped, training span shorter than two weeks");
  }
  if (model.span_s >= 365.0 * 86400.0) {
    model.yearly_harmonics = detail::observable_harmonics(opt.yearly_order, kYearSeconds, spacing);
    model.has_yearly = !model.yearly_harmonics.empty();
    if (!model.has_yearly && sink)
      sink->warn("seasonal: yearly cycle dropped, bucket spacing too coarse to sample it");
  } else if (sink && opt.yearly_order > 0) {
    sink->warn("seasonal: yearly cycle dropped, training span shorter than one year");
  }
  if (holidays) {
    for (const auto& [day, label] : holidays->days()) model.holiday_days.insert(day);
    bool any = false;
    for (Timestamp t : ts) any = any || model.is_holiday(t);
    model.has_holiday = any;
    if (!any && sink && holidays->size() > 0)
      sink->warn("seasonal: holiday term dropped, no holiday falls in the training history");
  }

  // Design matrix: intercept | scaled time | hinges | Fourier pairs | holiday.
  size_t n_cols = 2 + model.changepoints.size() + 2 * model.weekly_harmonics.size() +
                  2 * model.yearly_harmonics.size() + (model.has_holiday ? 1 : 0);
  linalg::Matrix x(m, n_cols);
  for (size_t i = 0; i < m; ++i) {
    size_t c = 0;
    double xs = static_cast<double>(ts[i] - model.t0) / model.span_s;
    x(i, c++) = 1.0;
    x(i, c++) = xs;
    for (double cp : model.changepoints) x(i, c++) = std::max(0.0, xs - cp);
    for (int k : model.weekly_harmonics) {
      double a = 2.0 * std::numbers::pi * k * static_cast<double>(ts[i]) / kWeekSeconds;
      x(i, c++) = std::sin(a);
      x(i, c++) = std::cos(a);
    }
    for (int k : model.yearly_harmonics) {
      double a = 2.0 * std::numbers::pi * k * static_cast<double>(ts[i]) / kYearSeconds;
      x(i, c++) = std::sin(a);
      x(i, c++) = std::cos(a);
    }
    if (model.has_holiday) x(i, c++) = model.is_holiday(ts[i]) ? 1.0 : 0.0;
  }

  linalg::Matrix a = linalg::gram(x);
  for (size_t j = 1; j < n_cols; ++j) a(j, j) += opt.ridge_lambda;  // intercept unpenalized
  std::vector<double> beta = linalg::cholesky_solve(linalg::cholesky(a), linalg::xty(x, y));

  size_t c = 0;
  model.intercept = beta[c++];
  model.slope = beta[c++];
  model.deltas.assign(beta.begin() + c, beta.begin() + c + model.changepoints.size());
  c += model.changepoints.size();
  model.weekly_coefs.assign(beta.begin() + c, beta.begin() + c + 2 * model.weekly_harmonics.size());
  c += 2 * model.weekly_harmonics.size();
  model.yearly_coefs.assign(beta.begin() + c, beta.begin() + c + 2 * model.yearly_harmonics.size());
  c += 2 * model.yearly_harmonics.size();
  if (model.has_holiday) model.holiday_coef = beta[c++];
  return model;
}

// Evaluates the decomposition at any timestamp; the trend extrapolates
// linearly past the last changepoint.
inline SeasonalComponents seasonal_components(const SeasonalModel& model, Timestamp t) {
  SeasonalComponents out;
  double xs = static_cast<double>(t - model.t0) / model.span_s;
  out.trend = model.intercept + model.slope * xs;
  for (size_t j = 0; j < model.changepoints.size(); ++j)
    out.trend += model.deltas[j] * std::max(0.0, xs - model.changepoints[j]);
  for (size_t j = 0; j < model.weekly_harmonics.size(); ++j) {
    double a = 2.0 * std::numbers::pi * model.weekly_harmonics[j] * static_cast<double>(t) / kWeekSeconds;
    out.weekly += model.weekly_coefs[2 * j] * std::sin(a) + model.weekly_coefs[2 * j + 1] * std::cos(a);
  }
  for (size_t j = 0; j < model.yearly_harmonics.size(); ++j) {
    double a = 2.0 * std::numbers::pi * model.yearly_harmonics[j] * static_cast<double>(t) / kYearSeconds;
    out.yearly += model.yearly_coefs[2 * j] * std::sin(a) + model.yearly_coefs[2 * j + 1] * std::cos(a);
  }
  if (model.has_holiday && model.is_holiday(t)) out.holiday = model.holiday_coef;
  out.yhat = out.trend + out.weekly + out.yearly + out.holiday;
  return out;
}

// Citywide bucket totals (the series a seasonal model is fitted on).
inline std::map<Timestamp, double> citywide_totals(const std::map<Timestamp, FlowGraph>& graphs) {
  std::map<Timestamp, double> out;
  for (const auto& [t, g] : graphs) out[t] = static_cast<double>(g.total_weight());
  return out;
}

}  // namespace flowcast
