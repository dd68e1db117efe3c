#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowcast/flowgraph.hpp"
#include "flowcast/synth.hpp"

using namespace flowcast;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("flowcast_synth_" + std::to_string(::getpid()) + "_" +
                                                      std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

CityScenario small_scenario(uint64_t seed = 42, size_t n_days = 60) {
  CityScenario sc;
  sc.seed = seed;
  sc.n_days = n_days;
  sc.base_daily_trips = 400.0;  // keep unit tests quick
  return sc;
}

// Brute-force E|X - lambda| by summing the Poisson pmf far into the tail.
double mae_floor_by_summation(double lambda) {
  double total = 0, logpmf_base = -lambda;
  int horizon = static_cast<int>(lambda + 40.0 * std::sqrt(lambda + 1.0)) + 20;
  for (int x = 0; x <= horizon; ++x) {
    double logpmf = logpmf_base + x * std::log(lambda) - std::lgamma(x + 1.0);
    total += std::abs(x - lambda) * std::exp(logpmf);
  }
  return total;
}

}  // namespace

TEST(PoissonFloor, MatchesDirectSummation) {
  for (double lambda : {0.3, 1.0, 2.5, 7.0, 24.7, 120.0})
    EXPECT_NEAR(poisson_mae_floor(lambda), mae_floor_by_summation(lambda), 1e-9) << "lambda " << lambda;
  EXPECT_EQ(poisson_mae_floor(0.0), 0.0);
  EXPECT_THROW(poisson_mae_floor(-1.0), DomainError);
}

TEST(Synth, DeterministicPerSeed) {
  SynthCity a = generate_city(small_scenario(7, 20));
  SynthCity b = generate_city(small_scenario(7, 20));
  ASSERT_EQ(a.trips.size(), b.trips.size());
  for (size_t i = 0; i < a.trips.size(); ++i) {
    EXPECT_EQ(a.trips[i].trip_id, b.trips[i].trip_id);
    EXPECT_EQ(a.trips[i].start_ts, b.trips[i].start_ts);
    EXPECT_EQ(std::memcmp(&a.trips[i].origin.x, &b.trips[i].origin.x, sizeof(double)), 0);
  }
  EXPECT_EQ(a.rain_mm, b.rain_mm);
  ASSERT_EQ(a.covariates.size(), 4u);
  for (size_t s = 0; s < 4; ++s) EXPECT_EQ(a.covariates[s].values, b.covariates[s].values);

  SynthCity c = generate_city(small_scenario(8, 20));
  EXPECT_NE(a.trips.size(), c.trips.size());
}

TEST(Synth, LambdaHasExactMultiplicativeStructure) {
  CityScenario sc = small_scenario(42, 30);
  SynthCity city = generate_city(sc);
  ASSERT_EQ(city.lambda.size(), 30u);

  for (const auto& [day, lam] : city.lambda) {
    ASSERT_EQ(lam.size(), 81u);
    double total = std::accumulate(lam.begin(), lam.end(), 0.0);
    int dow = day_of_week(day);
    auto [yy, mm, dd] = ymd_of(day);
    Timestamp year_start = parse_iso8601(std::to_string(yy) + "-01-01T00:00:00Z");
    double doy = static_cast<double>((day - year_start) / kSecondsPerDay) + 1.0;
    double weekly = 1.0 + sc.weekly_amplitude * std::sin(2.0 * std::numbers::pi * (dow + 1.0) / 7.0);
    double yearly = 1.0 + sc.yearly_amplitude * std::cos(2.0 * std::numbers::pi * (doy - 172.0) / 365.25);
    double weather = std::pow(sc.rain_multiplier, std::min(city.rain_mm.at(day), 10.0) / 10.0);
    double holiday = city.holidays.is_holiday(day) ? sc.holiday_multiplier : 1.0;
    EXPECT_NEAR(total, sc.base_daily_trips * weekly * yearly * weather * holiday, 1e-8)
        << format_iso_date(day);
  }

  // New Year's Day is planted as a holiday and must carry the multiplier.
  Timestamp jan1 = city.start_ts;
  EXPECT_TRUE(city.holidays.is_holiday(jan1));
}

TEST(Synth, GravitySharesAreStableAcrossDays) {
  SynthCity city = generate_city(small_scenario(42, 10));
  const std::vector<double>& first = city.lambda.begin()->second;
  double first_total = std::accumulate(first.begin(), first.end(), 0.0);
  for (const auto& [day, lam] : city.lambda) {
    double total = std::accumulate(lam.begin(), lam.end(), 0.0);
    for (size_t k = 0; k < lam.size(); ++k)
      ASSERT_NEAR(lam[k] / total, first[k] / first_total, 1e-12) << "pair slot " << k;
  }
}

TEST(Synth, TripsStayInsideTheirZonesAndDurationsAreClipped) {
  CityScenario sc = small_scenario(42, 15);
  SynthCity city = generate_city(sc);
  ASSERT_GT(city.trips.size(), 1000u);
  size_t checked = 0;
  for (const auto& t : city.trips) {
    ASSERT_GE(t.duration_s, 60);
    ASSERT_LE(t.duration_s, 3600);
    ASSERT_EQ(t.end_ts - t.start_ts, t.duration_s);
    auto zone_o = city.zones.assign(t.origin);
    auto zone_d = city.zones.assign(t.destination);
    ASSERT_TRUE(zone_o.has_value());
    ASSERT_TRUE(zone_d.has_value());
    // Strictly interior: never exactly on a shared boundary.
    double gx = std::fmod(t.origin.x, sc.zone_side_m);
    ASSERT_NE(gx, 0.0);
    ++checked;
  }
  EXPECT_EQ(checked, city.trips.size());
}

TEST(Synth, TotalTripCountTracksPlannedIntensity) {
  SynthCity city = generate_city(small_scenario(42, 60));
  double planned = 0;
  for (const auto& [day, lam] : city.lambda) planned += std::accumulate(lam.begin(), lam.end(), 0.0);
  double sd = std::sqrt(planned);
  EXPECT_NEAR(static_cast<double>(city.trips.size()), planned, 5.0 * sd);
}

TEST(Synth, MonthlyAggregationCoversAllPairsAndConservesTrips) {
  SynthCity city = generate_city(small_scenario(42, 60));
  AssignResult assigned = assign_trips(city.trips, city.zones);
  EXPECT_EQ(assigned.n_unassigned, 0u);
  size_t dropped = 0;
  std::map<Timestamp, FlowGraph> graphs = aggregate_od(assigned.trips, Scale::Monthly, "zones", &dropped);
  EXPECT_EQ(dropped, 0u);
  ASSERT_EQ(graphs.size(), 2u);  // 60 days from Jan 1 span two months
  int64_t total_weight = 0;
  for (const auto& [bucket, g] : graphs) {
    EXPECT_EQ(g.size(), 9u);
    EXPECT_EQ(g.num_edges(), 81u);
    total_weight += g.total_weight();
  }
  EXPECT_EQ(total_weight, static_cast<int64_t>(city.trips.size()));
}

TEST(Synth, RainChainHasPlausibleDynamics) {
  SynthCity city = generate_city(small_scenario(42, 365));
  size_t rainy = 0, rain_after_rain = 0, rain_days_with_next = 0;
  Timestamp prev = 0;
  bool prev_rain = false;
  for (const auto& [day, mm] : city.rain_mm) {
    bool r = mm > 0;
    rainy += r;
    if (prev != 0 && prev_rain) {
      ++rain_days_with_next;
      rain_after_rain += r;
    }
    prev = day;
    prev_rain = r;
  }
  double frac = static_cast<double>(rainy) / 365.0;
  EXPECT_GT(frac, 0.10);  // stationary share is ~0.19
  EXPECT_LT(frac, 0.30);
  double persistence = static_cast<double>(rain_after_rain) / static_cast<double>(rain_days_with_next);
  EXPECT_NEAR(persistence, 0.5, 0.18);
}

TEST(Synth, CovariateKindsAndRedHerringsAreLabeled) {
  SynthCity city = generate_city(small_scenario(42, 10));
  ASSERT_EQ(city.covariates.size(), 4u);
  EXPECT_EQ(city.covariates[0].name, "rain_mm");
  EXPECT_EQ(city.covariates[0].kind, CovariateKind::Forecastable);
  EXPECT_EQ(city.covariates[1].name, "temp_c");
  EXPECT_EQ(city.covariates[1].kind, CovariateKind::Forecastable);
  EXPECT_EQ(city.covariates[2].name, "mobility_trend");
  EXPECT_EQ(city.covariates[2].kind, CovariateKind::LagOnly);
  EXPECT_EQ(city.covariates[3].name, "brent_usd");
  EXPECT_EQ(city.covariates[3].kind, CovariateKind::LagOnly);
  for (const auto& s : city.covariates) EXPECT_EQ(s.values.size(), 10u);
}

TEST(Synth, ParameterErrors) {
  auto expect_bad = [](CityScenario sc) { EXPECT_THROW(generate_city(sc), DomainError); };
  CityScenario sc = small_scenario();
  sc.grid_side = 0;
  expect_bad(sc);
  sc = small_scenario();
  sc.rain_multiplier = 0.0;
  expect_bad(sc);
  sc = small_scenario();
  sc.rain_multiplier = 1.5;
  expect_bad(sc);
  sc = small_scenario();
  sc.masses = {1.0, 2.0};  // wrong length for 9 zones
  expect_bad(sc);
  sc = small_scenario();
  sc.duration_min_s = 500.0;
  sc.duration_max_s = 100.0;
  expect_bad(sc);
  sc = small_scenario();
  sc.weekly_amplitude = 1.0;
  expect_bad(sc);
  sc = small_scenario();
  sc.n_days = 0;
  expect_bad(sc);
  sc = small_scenario();
  sc.base_daily_trips = -5.0;
  expect_bad(sc);
}

TEST(Synth, PlantedAnswersExposeTruthAndFloor) {
  CityScenario sc = small_scenario(42, 40);
  SynthCity city = generate_city(sc);
  Timestamp cutoff = city.start_ts + 30 * kSecondsPerDay;
  nlohmann::ordered_json j = planted_answers(city, sc, cutoff);

  EXPECT_EQ(j.at("lambda_by_day").size(), 40u);
  EXPECT_EQ(j.at("zone_ids").size(), 9u);
  EXPECT_EQ(j.at("red_herrings").size(), 3u);
  EXPECT_EQ(j.at("seasonal").at("weekly_factor_by_dow").size(), 7u);

  double test_floor = j.at("perfect_mae").at("test_mae_floor").get<double>();
  double direct = 0;
  size_t n = 0;
  for (const auto& [day, lam] : city.lambda) {
    if (day < cutoff) continue;
    for (double l : lam) {
      direct += poisson_mae_floor(l);
      ++n;
    }
  }
  EXPECT_NEAR(test_floor, direct / static_cast<double>(n), 1e-12);
  EXPECT_GT(test_floor, 0.0);
}

TEST(Synth, SaveCityWritesPipelineLayoutAndGraderFile) {
  TempDir dir;
  CityScenario sc = small_scenario(42, 12);
  SynthCity city = generate_city(sc);
  save_city(dir.file("city"), city, sc, city.start_ts + 9 * kSecondsPerDay);

  for (const char* f : {"trips.csv", "zones.json", "covariates.csv", "covariates.manifest", "holidays.csv",
                        "ground_truth/answers.json"})
    EXPECT_TRUE(util::file_exists(dir.file(std::string("city/") + f))) << f;

  util::WarningSink sink;
  TripSchema schema;
  auto loaded = load_trips(dir.file("city/trips.csv"), schema, sink);
  EXPECT_EQ(loaded.trips.size(), city.trips.size());

  std::string manifest = util::read_file(dir.file("city/covariates.manifest"));
  EXPECT_NE(manifest.find("mobility_trend = daily lag-only"), std::string::npos);
  EXPECT_NE(manifest.find("rain_mm = daily forecastable"), std::string::npos);
}
