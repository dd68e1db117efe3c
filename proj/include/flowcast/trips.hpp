#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowcast/csv.hpp"
#include "flowcast/geometry.hpp"
#include "flowcast/io.hpp"
#include "flowcast/numio.hpp"
#include "flowcast/timeutil.hpp"

namespace flowcast {

// ----------------------------------------------------------------- trips

// One micromobility ride. Coordinates are planar projected meters; callers
// must pre-project (no geodesy here). Missing endpoint coordinates are
// represented as NaN and removed by clean_trips.
struct TripRecord {
  std::string trip_id;
  Timestamp start_ts = 0;
  Timestamp end_ts = 0;
  geom::Point origin;
  geom::Point destination;
  int64_t duration_s = 0;  // always recomputed as end_ts - start_ts

  bool has_coordinates() const {
    return !std::isnan(origin.x) && !std::isnan(origin.y) && !std::isnan(destination.x) &&
           !std::isnan(destination.y);
  }
};

// Duration window for abnormal-trip removal.
struct CleaningPolicy {
  int64_t t_min_s = 30;
  int64_t t_max_s = 7200;

  void validate() const {
    if (t_min_s < 0 || t_min_s >= t_max_s)
      throw DomainError("cleaning policy requires 0 <= t_min_s < t_max_s, got [" + std::to_string(t_min_s) +
                        ", " + std::to_string(t_max_s) + "]");
  }
};

// Column mapping for trip CSV files. trip_id and duration are optional in
// the file; ids are synthesized from row numbers when absent and duration is
// always recomputed from the timestamps.
struct TripSchema {
  std::string trip_id = "trip_id";
  std::string start_ts = "start_ts";
  std::string end_ts = "end_ts";
  std::string origin_x = "origin_x";
  std::string origin_y = "origin_y";
  std::string dest_x = "dest_x";
  std::string dest_y = "dest_y";
};

struct TripLoadResult {
  std::vector<TripRecord> trips;
  int64_t n_rejected = 0;  // unparseable required fields or end_ts < start_ts
};

namespace detail {
inline double parse_coord(const std::string& field) {
  if (util::trim(field).empty()) return std::numeric_limits<double>::quiet_NaN();  // missing coordinate
  return util::parse_double(util::trim(field));
}
}  // namespace detail

// Parses a trips CSV. Rows with unparseable required fields (or end before
// start) are counted and reported through the sink, never returned; order of
// valid rows is preserved.
inline TripLoadResult load_trips(const std::string& path, const TripSchema& schema, util::WarningSink& sink) {
  csv::Table t = csv::load_table(path);
  size_t c_start = t.column(schema.start_ts);
  size_t c_end = t.column(schema.end_ts);
  size_t c_ox = t.column(schema.origin_x);
  size_t c_oy = t.column(schema.origin_y);
  size_t c_dx = t.column(schema.dest_x);
  size_t c_dy = t.column(schema.dest_y);
  std::optional<size_t> c_id;
  if (t.has_column(schema.trip_id)) c_id = t.column(schema.trip_id);

  TripLoadResult out;
  out.trips.reserve(t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    TripRecord r;
    try {
      r.start_ts = parse_iso8601(util::trim(row[c_start]));
      r.end_ts = parse_iso8601(util::trim(row[c_end]));
      r.origin = {detail::parse_coord(row[c_ox]), detail::parse_coord(row[c_oy])};
      r.destination = {detail::parse_coord(row[c_dx]), detail::parse_coord(row[c_dy])};
    } catch (const ParseError& e) {
      ++out.n_rejected;
      sink.warn("trips row " + std::to_string(i + 2) + " rejected: " + e.what());
      continue;
    }
    if (r.end_ts < r.start_ts) {
      ++out.n_rejected;
      sink.warn("trips row " + std::to_string(i + 2) + " rejected: end precedes start");
      continue;
    }
    r.trip_id = c_id ? row[*c_id] : "row_" + std::to_string(i + 2);
    r.duration_s = r.end_ts - r.start_ts;
    out.trips.push_back(std::move(r));
  }
  if (!out.trips.empty() || out.n_rejected == 0) return out;
  sink.warn("all " + std::to_string(out.n_rejected) + " trip rows were rejected: " + path);
  return out;
}

struct CleanResult {
  std::vector<TripRecord> kept;
  int64_t removed_too_short = 0;
  int64_t removed_too_long = 0;
  int64_t removed_missing_coords = 0;

  int64_t removed_total() const { return removed_too_short + removed_too_long + removed_missing_coords; }
};

// Removes abnormal trips: duration outside [t_min_s, t_max_s] or missing
// endpoint coordinates. Order preserved; retained records untouched;
// idempotent.
inline CleanResult clean_trips(const std::vector<TripRecord>& trips, const CleaningPolicy& policy) {
  policy.validate();
  CleanResult res;
  res.kept.reserve(trips.size());
  for (const auto& t : trips) {
    if (!t.has_coordinates()) {
      ++res.removed_missing_coords;
    } else if (t.duration_s < policy.t_min_s) {
      ++res.removed_too_short;
    } else if (t.duration_s > policy.t_max_s) {
      ++res.removed_too_long;
    } else {
      res.kept.push_back(t);
    }
  }
  return res;
}

inline void save_trips(const std::string& path, const std::vector<TripRecord>& trips) {
  std::vector<std::string> header{"trip_id", "start_ts", "end_ts", "origin_x", "origin_y", "dest_x", "dest_y",
                                  "duration_s"};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trips.size());
  for (const auto& t : trips) {
    rows.push_back({t.trip_id, format_iso8601(t.start_ts), format_iso8601(t.end_ts), util::format_double(t.origin.x),
                    util::format_double(t.origin.y), util::format_double(t.destination.x),
                    util::format_double(t.destination.y), std::to_string(t.duration_s)});
  }
  csv::save_table(path, header, rows);
}

// ------------------------------------------------------------- covariates

enum class CovariateKind { Forecastable, LagOnly };

inline const char* covariate_kind_name(CovariateKind k) {
  return k == CovariateKind::Forecastable ? "forecastable" : "lag-only";
}

inline CovariateKind covariate_kind_from_name(std::string_view s) {
  if (s == "forecastable") return CovariateKind::Forecastable;
  if (s == "lag-only" || s == "lag_only" || s == "lagonly") return CovariateKind::LagOnly;
  throw ParseError("unknown covariate kind: " + std::string(s));
}

// An exogenous time series keyed by cadence-aligned bucket starts. Gaps are
// absent keys; imputation happens downstream. `kind` encodes the leakage
// rule: lag-only series may only be read at keys strictly before the feature
// row's bucket.
struct CovariateSeries {
  std::string name;
  Cadence cadence = Cadence::Daily;
  CovariateKind kind = CovariateKind::Forecastable;
  std::map<Timestamp, double> values;

  // Lookup with access recording. row_bucket is the bucket of the feature row
  // being built (pass 0 outside row context); the access log uses it to catch
  // lag-only reads at or after the row's own bucket.
  std::optional<double> at(Timestamp key, Timestamp row_bucket = 0) const {
    track::AccessLog::instance().record_covariate(name, key, row_bucket);
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }

  // Latest value at or before `key` (forward-fill semantics); recorded as an
  // access at the key actually read.
  std::optional<double> at_or_before(Timestamp key, Timestamp row_bucket = 0) const {
    auto it = values.upper_bound(key);
    if (it == values.begin()) {
      track::AccessLog::instance().record_covariate(name, key, row_bucket);
      return std::nullopt;
    }
    --it;
    track::AccessLog::instance().record_covariate(name, it->first, row_bucket);
    return it->second;
  }
};

// Parses the covariate manifest: one `column = cadence kind` line per series
// ('#' starts a comment; separators may be spaces or a comma).
inline std::map<std::string, std::pair<Cadence, CovariateKind>> load_covariate_manifest(const std::string& path) {
  std::string content = util::read_file(path);
  std::map<std::string, std::pair<Cadence, CovariateKind>> out;
  auto lines = util::split(content, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string line = util::trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("covariate manifest line " + std::to_string(i + 1) + " is not 'name = cadence kind'");
    std::string name = util::trim(line.substr(0, eq));
    std::string rest = util::trim(line.substr(eq + 1));
    for (auto& c : rest)
      if (c == ',') c = ' ';
    std::vector<std::string> parts;
    for (auto& p : util::split(rest, ' '))
      if (!util::trim(p).empty()) parts.push_back(util::trim(p));
    if (name.empty() || parts.size() != 2)
      throw ConfigError("covariate manifest line " + std::to_string(i + 1) + " is not 'name = cadence kind'");
    if (out.count(name)) throw ConfigError("covariate manifest declares column twice: " + name);
    out[name] = {cadence_from_name(parts[0]), covariate_kind_from_name(parts[1])};
  }
  return out;
}

// Loads a date-keyed wide covariate table plus its manifest. Every non-date
// CSV column must be declared; empty cells are gaps; keys must align to the
// declared cadence.
inline std::vector<CovariateSeries> load_covariates(const std::string& csv_path, const std::string& manifest_path,
                                                    util::WarningSink& sink) {
  auto manifest = load_covariate_manifest(manifest_path);
  csv::Table t = csv::load_table(csv_path);
  size_t c_date = t.column("date");

  std::vector<CovariateSeries> series;
  std::vector<size_t> col_index;
  for (size_t c = 0; c < t.header.size(); ++c) {
    if (c == c_date) continue;
    auto it = manifest.find(t.header[c]);
    if (it == manifest.end())
      throw SchemaError("covariate column not declared in manifest: " + t.header[c]);
    CovariateSeries s;
    s.name = t.header[c];
    s.cadence = it->second.first;
    s.kind = it->second.second;
    series.push_back(std::move(s));
    col_index.push_back(c);
  }
  for (const auto& [name, _] : manifest) {
    if (!t.has_column(name)) sink.warn("covariate manifest entry has no CSV column: " + name);
  }

  for (size_t i = 0; i < t.rows.size(); ++i) {
    Timestamp key;
    try {
      key = parse_iso8601(util::trim(t.rows[i][c_date]));
    } catch (const ParseError& e) {
      throw ParseError("covariates row " + std::to_string(i + 2) + ": " + e.what());
    }
    for (size_t k = 0; k < series.size(); ++k) {
      const std::string& cell = t.rows[i][col_index[k]];
      if (util::trim(cell).empty()) continue;  // gap
      if (truncate_to_cadence(key, series[k].cadence) != key)
        throw SchemaError("covariates row " + std::to_string(i + 2) + ": key " + format_iso8601(key) +
                          " not aligned to " + cadence_name(series[k].cadence) + " cadence of " + series[k].name);
      if (series[k].values.count(key))
        throw SchemaError("covariate " + series[k].name + " has duplicate key " + format_iso8601(key));
      series[k].values[key] = util::parse_double(util::trim(cell));
    }
  }
  return series;
}

// Writes covariates in the wide format load_covariates reads; keys are the
// union of all series keys, gaps left empty.
inline void save_covariates(const std::string& csv_path, const std::string& manifest_path,
                            const std::vector<CovariateSeries>& series) {
  std::string manifest;
  for (const auto& s : series)
    manifest += s.name + " = " + std::string(cadence_name(s.cadence)) + " " + covariate_kind_name(s.kind) + "\n";
  util::write_file(manifest_path, manifest);

  std::map<Timestamp, std::vector<std::string>> rows_by_key;
  std::vector<Timestamp> keys;
  for (const auto& s : series)
    for (const auto& [k, _] : s.values) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  std::vector<std::string> header{"date"};
  for (const auto& s : series) header.push_back(s.name);
  std::vector<std::vector<std::string>> rows;
  for (Timestamp k : keys) {
    std::vector<std::string> row;
    // Hourly keys need the full timestamp form; pure dates stay compact.
    row.push_back(k % kSecondsPerDay == 0 ? format_iso_date(k) : format_iso8601(k));
    for (const auto& s : series) {
      auto it = s.values.find(k);
      row.push_back(it == s.values.end() ? "" : util::format_double(it->second));
    }
    rows.push_back(std::move(row));
  }
  csv::save_table(csv_path, header, rows);
}

// --------------------------------------------------------------- holidays

class HolidayCalendar {
 public:
  void add(Timestamp date, std::string label = "") {
    Timestamp day = truncate_to_scale(date, Scale::Daily);
    if (days_.count(day)) throw SchemaError("duplicate holiday date: " + format_iso_date(day));
    days_[day] = std::move(label);
  }

  bool is_holiday(Timestamp ts) const { return days_.count(truncate_to_scale(ts, Scale::Daily)) > 0; }

  const std::map<Timestamp, std::string>& days() const { return days_; }
  size_t size() const { return days_.size(); }

 private:
  std::map<Timestamp, std::string> days_;
};

// One ISO-8601 date per line, optional tab-separated label; '#' comments.
inline HolidayCalendar load_holidays(const std::string& path) {
  std::string content = util::read_file(path);
  HolidayCalendar cal;
  auto lines = util::split(content, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string line = util::trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    std::string date_part = line, label;
    auto tab = line.find('\t');
    if (tab != std::string::npos) {
      date_part = util::trim(line.substr(0, tab));
      label = util::trim(line.substr(tab + 1));
    }
    try {
      cal.add(parse_iso8601(date_part), label);
    } catch (const ParseError& e) {
      throw ParseError("holidays line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return cal;
}

inline void save_holidays(const std::string& path, const HolidayCalendar& cal) {
  std::string out;
  for (const auto& [day, label] : cal.days()) {
    out += format_iso_date(day);
    if (!label.empty()) out += "\t" + label;
    out += "\n";
  }
  util::write_file(path, out);
}

}  // namespace flowcast
