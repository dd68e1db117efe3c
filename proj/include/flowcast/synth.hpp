#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowcast/common.hpp"
#include "flowcast/geometry.hpp"
#include "flowcast/io.hpp"
#include "flowcast/numio.hpp"
#include "flowcast/partition.hpp"
#include "flowcast/rng.hpp"
#include "flowcast/timeutil.hpp"
#include "flowcast/trips.hpp"

namespace flowcast {

// Seeded synthetic city: a square grid of zones whose origin-destination
// demand follows a gravity model modulated by weekly and yearly cycles,
// Markov-chain rain, and holidays. Trip counts are Poisson draws around the
// planted intensities, so the generator also knows the best achievable
// forecast error. Two of the shipped covariates (mobility_trend, brent_usd)
// are deliberate red herrings with no causal effect, and temp_c only
// mirrors the yearly cycle without driving demand.
struct CityScenario {
  uint64_t seed = 42;
  size_t grid_side = 3;        // zones form a grid_side x grid_side square
  double zone_side_m = 500.0;  // zone edge length
  std::vector<double> masses;  // per-zone attraction; empty = built-in ramp
  double gravity_beta = 1.5;   // distance decay exponent
  double base_daily_trips = 1200.0;
  double weekly_amplitude = 0.25;  // in [0, 1)
  double yearly_amplitude = 0.3;   // in [0, 1)
  double rain_multiplier = 0.6;    // demand factor at >= 10 mm rain, in (0, 1]
  double holiday_multiplier = 1.4;
  std::string start_date = "2022-01-01";
  size_t n_days = 365;
  double duration_mean_s = 840.0;
  double duration_sd_s = 300.0;
  double duration_min_s = 60.0;
  double duration_max_s = 3600.0;
  double p_rain_after_rain = 0.5;
  double p_rain_after_dry = 0.12;
  double rain_mean_mm = 6.0;

  size_t n_zones() const { return grid_side * grid_side; }

  void validate() const {
    if (grid_side < 1) throw DomainError("scenario: grid_side must be at least 1");
    if (zone_side_m <= 0) throw DomainError("scenario: zone_side_m must be positive");
    if (!masses.empty() && masses.size() != n_zones())
      throw DomainError("scenario: masses must be empty or have one entry per zone");
    for (double m : masses)
      if (m <= 0) throw DomainError("scenario: masses must be positive");
    if (base_daily_trips <= 0) throw DomainError("scenario: base_daily_trips must be positive");
    if (weekly_amplitude < 0 || weekly_amplitude >= 1 || yearly_amplitude < 0 || yearly_amplitude >= 1)
      throw DomainError("scenario: seasonal amplitudes must lie in [0, 1)");
    if (rain_multiplier <= 0 || rain_multiplier > 1)
      throw DomainError("scenario: rain_multiplier must lie in (0, 1]");
    if (holiday_multiplier <= 0) throw DomainError("scenario: holiday_multiplier must be positive");
    if (n_days < 1) throw DomainError("scenario: n_days must be at least 1");
    if (duration_sd_s <= 0 || duration_min_s <= 0 || duration_min_s >= duration_max_s)
      throw DomainError("scenario: trip duration range is degenerate");
    if (p_rain_after_rain < 0 || p_rain_after_rain > 1 || p_rain_after_dry < 0 || p_rain_after_dry > 1)
      throw DomainError("scenario: rain transition probabilities must lie in [0, 1]");
    if (rain_mean_mm <= 0) throw DomainError("scenario: rain_mean_mm must be positive");
  }

  std::vector<double> effective_masses() const {
    if (!masses.empty()) return masses;
    std::vector<double> m(n_zones());
    for (size_t i = 0; i < m.size(); ++i) m[i] = 1.0 + 0.25 * static_cast<double>(i);
    return m;
  }
};

struct SynthCity {
  std::vector<TripRecord> trips;
  SpatialPartition zones;
  std::vector<std::string> zone_ids;
  std::vector<CovariateSeries> covariates;  // rain_mm, temp_c, mobility_trend, brent_usd
  HolidayCalendar holidays;
  Timestamp start_ts = 0;
  std::map<Timestamp, std::vector<double>> lambda;  // day -> flattened n x n intensity
  std::map<Timestamp, double> rain_mm;
};

// Mean absolute deviation of a Poisson(lambda) variable from lambda itself:
// the error floor of a forecaster that knows the exact intensity.
inline double poisson_mae_floor(double lambda) {
  if (lambda < 0) throw DomainError("poisson_mae_floor: lambda must be >= 0");
  if (lambda == 0) return 0.0;
  double k = std::floor(lambda);
  return 2.0 * std::exp((k + 1.0) * std::log(lambda) - lambda - std::lgamma(k + 2.0)) * (k + 1.0);
}

namespace detail {

// Fixed month/day holiday list, applied to every year in range.
inline const std::vector<std::pair<int, int>>& holiday_month_days() {
  static const std::vector<std::pair<int, int>> days = {
      {1, 1}, {5, 1}, {7, 4}, {8, 15}, {10, 3}, {11, 24}, {12, 25}, {12, 26},
  };
  return days;
}

inline double uniform_inside(Rng& rng, double lo, double hi) {
  double v = lo + rng.uniform() * (hi - lo);
  if (v <= lo) v = std::nextafter(lo, hi);
  if (v >= hi) v = std::nextafter(hi, lo);
  return v;
}

}  // namespace detail

inline SynthCity generate_city(const CityScenario& sc) {
  sc.validate();
  SynthCity city;
  size_t n = sc.n_zones();
  city.start_ts = parse_iso8601(sc.start_date + "T00:00:00Z");

  // Square zones on a grid; ids z0..z(n-1) scan rows south to north.
  std::vector<Zone> zones;
  std::vector<geom::Point> centroids;
  for (size_t i = 0; i < n; ++i) {
    size_t row = i / sc.grid_side, col = i % sc.grid_side;
    double x0 = static_cast<double>(col) * sc.zone_side_m, y0 = static_cast<double>(row) * sc.zone_side_m;
    Zone z;
    z.zone_id = "z" + std::to_string(i);
    z.level = "zones";
    z.boundary = {{x0, y0}, {x0 + sc.zone_side_m, y0}, {x0 + sc.zone_side_m, y0 + sc.zone_side_m},
                  {x0, y0 + sc.zone_side_m}};
    zones.push_back(z);
    centroids.push_back({x0 + sc.zone_side_m / 2.0, y0 + sc.zone_side_m / 2.0});
    city.zone_ids.push_back(z.zone_id);
  }
  city.zones = SpatialPartition("zones", zones);

  // Gravity shares: w_ij = m_i m_j / d_ij^beta, self-distance = side / 2.
  std::vector<double> masses = sc.effective_masses();
  std::vector<double> weight(n * n, 0.0);
  double z_norm = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      double d = i == j ? sc.zone_side_m / 2.0
                        : std::hypot(centroids[i].x - centroids[j].x, centroids[i].y - centroids[j].y);
      weight[i * n + j] = masses[i] * masses[j] / std::pow(d, sc.gravity_beta);
      z_norm += weight[i * n + j];
    }

  Rng root(sc.seed);
  Rng rain_rng = root.child("rain");
  Rng temp_rng = root.child("temp");
  Rng mobility_rng = root.child("mobility");
  Rng brent_rng = root.child("brent");
  Rng trips_rng = root.child("trips");

  CovariateSeries rain{"rain_mm", Cadence::Daily, CovariateKind::Forecastable, {}};
  CovariateSeries temp{"temp_c", Cadence::Daily, CovariateKind::Forecastable, {}};
  CovariateSeries mobility{"mobility_trend", Cadence::Daily, CovariateKind::LagOnly, {}};
  CovariateSeries brent{"brent_usd", Cadence::Daily, CovariateKind::LagOnly, {}};

  std::set<std::pair<int, int>> holiday_set(detail::holiday_month_days().begin(),
                                            detail::holiday_month_days().end());

  bool raining = false;
  double mobility_level = 100.0, brent_level = 80.0;
  size_t trip_counter = 0;
  for (size_t d = 0; d < sc.n_days; ++d) {
    Timestamp day_ts = city.start_ts + static_cast<Timestamp>(d) * kSecondsPerDay;
    auto [yy, mm, dd] = ymd_of(day_ts);
    int dow = day_of_week(day_ts);
    Timestamp year_start = parse_iso8601(std::to_string(yy) + "-01-01T00:00:00Z");
    double doy = static_cast<double>((day_ts - year_start) / kSecondsPerDay) + 1.0;

    // Weather chain and covariates.
    double p = raining ? sc.p_rain_after_rain : sc.p_rain_after_dry;
    raining = rain_rng.uniform() < p;
    double mm_today = raining ? rain_rng.exponential(sc.rain_mean_mm) : 0.0;
    rain.values[day_ts] = mm_today;
    city.rain_mm[day_ts] = mm_today;
    temp.values[day_ts] = 10.0 + 12.0 * std::cos(2.0 * std::numbers::pi * (doy - 202.0) / 365.25) +
                          temp_rng.normal(0.0, 2.0);
    mobility_level += mobility_rng.normal(0.0, 0.5);
    mobility.values[day_ts] = mobility_level;
    brent_level = std::max(20.0, brent_level + brent_rng.normal(0.0, 1.2));
    brent.values[day_ts] = brent_level;

    bool is_holiday = holiday_set.count({mm, dd}) > 0;
    if (is_holiday) city.holidays.add(day_ts, "public_holiday");

    double weekly = 1.0 + sc.weekly_amplitude * std::sin(2.0 * std::numbers::pi * (dow + 1.0) / 7.0);
    double yearly = 1.0 + sc.yearly_amplitude * std::cos(2.0 * std::numbers::pi * (doy - 172.0) / 365.25);
    double weather = std::pow(sc.rain_multiplier, std::min(mm_today, 10.0) / 10.0);
    double holiday = is_holiday ? sc.holiday_multiplier : 1.0;
    double day_total = sc.base_daily_trips * weekly * yearly * weather * holiday;

    std::vector<double>& lam = city.lambda[day_ts];
    lam.resize(n * n);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        double l = day_total * weight[i * n + j] / z_norm;
        lam[i * n + j] = l;
        int64_t count = trips_rng.poisson(l);
        for (int64_t t = 0; t < count; ++t) {
          TripRecord trip;
          trip.trip_id = "syn-" + std::to_string(trip_counter++);
          trip.start_ts = day_ts + static_cast<Timestamp>(trips_rng.uniform_index(kSecondsPerDay));
          double dur = std::clamp(trips_rng.normal(sc.duration_mean_s, sc.duration_sd_s), sc.duration_min_s,
                                  sc.duration_max_s);
          trip.duration_s = std::llround(dur);
          trip.end_ts = trip.start_ts + trip.duration_s;
          size_t ri = i / sc.grid_side, ci = i % sc.grid_side;
          size_t rj = j / sc.grid_side, cj = j % sc.grid_side;
          trip.origin.x = detail::uniform_inside(trips_rng, static_cast<double>(ci) * sc.zone_side_m,
                                                 static_cast<double>(ci + 1) * sc.zone_side_m);
          trip.origin.y = detail::uniform_inside(trips_rng, static_cast<double>(ri) * sc.zone_side_m,
                                                 static_cast<double>(ri + 1) * sc.zone_side_m);
          trip.destination.x = detail::uniform_inside(trips_rng, static_cast<double>(cj) * sc.zone_side_m,
                                                      static_cast<double>(cj + 1) * sc.zone_side_m);
          trip.destination.y = detail::uniform_inside(trips_rng, static_cast<double>(rj) * sc.zone_side_m,
                                                      static_cast<double>(rj + 1) * sc.zone_side_m);
          city.trips.push_back(std::move(trip));
        }
      }
    }
  }

  city.covariates = {rain, temp, mobility, brent};
  return city;
}

// ------------------------------------------------------------ ground truth

// Everything a grader needs to verify what the pipeline should discover:
// the exact planted intensities, the seasonal structure, which covariates
// matter, and the error floor of a perfect forecaster. The pipeline itself
// must never read this file.
inline nlohmann::ordered_json planted_answers(const SynthCity& city, const CityScenario& sc, Timestamp cutoff) {
  nlohmann::ordered_json j;
  j["scenario"] = {{"seed", sc.seed},
                   {"grid_side", sc.grid_side},
                   {"zone_side_m", sc.zone_side_m},
                   {"gravity_beta", sc.gravity_beta},
                   {"base_daily_trips", sc.base_daily_trips},
                   {"weekly_amplitude", sc.weekly_amplitude},
                   {"yearly_amplitude", sc.yearly_amplitude},
                   {"rain_multiplier", sc.rain_multiplier},
                   {"holiday_multiplier", sc.holiday_multiplier},
                   {"start_date", sc.start_date},
                   {"n_days", sc.n_days}};
  j["zone_ids"] = city.zone_ids;
  j["masses"] = sc.effective_masses();
  nlohmann::ordered_json weekly = nlohmann::ordered_json::array();
  for (int dow = 0; dow < 7; ++dow)
    weekly.push_back(1.0 + sc.weekly_amplitude * std::sin(2.0 * std::numbers::pi * (dow + 1.0) / 7.0));
  j["seasonal"] = {{"weekly_factor_by_dow", weekly}, {"yearly_peak_day_of_year", 172}};
  j["true_dependencies"] =
      nlohmann::ordered_json::array({"gravity_masses", "weekly_cycle", "yearly_cycle", "rain_mm", "holidays"});
  j["red_herrings"] = nlohmann::ordered_json::array({"temp_c", "mobility_trend", "brent_usd"});

  nlohmann::ordered_json holidays = nlohmann::ordered_json::array();
  for (const auto& [day, label] : city.holidays.days()) holidays.push_back(format_iso_date(day));
  j["holiday_days"] = holidays;

  nlohmann::ordered_json lam;
  for (const auto& [day, values] : city.lambda) lam[format_iso_date(day)] = values;
  j["lambda_by_day"] = lam;
  nlohmann::ordered_json rain;
  for (const auto& [day, mm] : city.rain_mm) rain[format_iso_date(day)] = mm;
  j["rain_mm_by_day"] = rain;

  // Error floor of a forecaster that knows every intensity exactly.
  double train_floor = 0, test_floor = 0;
  size_t train_n = 0, test_n = 0;
  for (const auto& [day, values] : city.lambda) {
    for (double l : values) {
      double f = poisson_mae_floor(l);
      if (day < cutoff) {
        train_floor += f;
        ++train_n;
      } else {
        test_floor += f;
        ++test_n;
      }
    }
  }
  j["perfect_mae"] = {{"cutoff", format_iso8601(cutoff)},
                      {"train_mae_floor", train_n ? train_floor / static_cast<double>(train_n) : 0.0},
                      {"test_mae_floor", test_n ? test_floor / static_cast<double>(test_n) : 0.0}};
  return j;
}

// Writes the generated dataset in the layout the ingestion stages expect:
//   <dir>/trips.csv, zones.json, covariates.csv, covariates.manifest,
//   holidays.csv, and ground_truth/answers.json (grader-only).
inline void save_city(const std::string& dir, const SynthCity& city, const CityScenario& sc, Timestamp cutoff) {
  std::filesystem::create_directories(dir);
  std::filesystem::create_directories(dir + "/ground_truth");
  save_trips(dir + "/trips.csv", city.trips);
  save_partition(dir + "/zones.json", city.zones);
  save_covariates(dir + "/covariates.csv", dir + "/covariates.manifest", city.covariates);
  save_holidays(dir + "/holidays.csv", city.holidays);
  util::write_file(dir + "/ground_truth/answers.json", planted_answers(city, sc, cutoff).dump(1) + "\n");
}

}  // namespace flowcast
