#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "flowcast/common.hpp"

namespace flowcast {

// All timestamps are UTC seconds since the Unix epoch; no timezone handling.
using Timestamp = int64_t;

enum class Scale { Hourly, Daily, Monthly };

// Cadence of an exogenous covariate series (weekly in addition to the three
// aggregation scales; weekly buckets start on Mondays).
enum class Cadence { Hourly, Daily, Weekly, Monthly };

inline const char* scale_name(Scale s) {
  switch (s) {
    case Scale::Hourly: return "hourly";
    case Scale::Daily: return "daily";
    case Scale::Monthly: return "monthly";
  }
  return "?";
}

inline Scale scale_from_name(std::string_view name) {
  if (name == "hourly") return Scale::Hourly;
  if (name == "daily") return Scale::Daily;
  if (name == "monthly") return Scale::Monthly;
  throw ParseError("unknown temporal scale: " + std::string(name));
}

inline const char* cadence_name(Cadence c) {
  switch (c) {
    case Cadence::Hourly: return "hourly";
    case Cadence::Daily: return "daily";
    case Cadence::Weekly: return "weekly";
    case Cadence::Monthly: return "monthly";
  }
  return "?";
}

inline Cadence cadence_from_name(std::string_view name) {
  if (name == "hourly") return Cadence::Hourly;
  if (name == "daily") return Cadence::Daily;
  if (name == "weekly") return Cadence::Weekly;
  if (name == "monthly") return Cadence::Monthly;
  throw ParseError("unknown cadence: " + std::string(name));
}

namespace civil {

// Calendar <-> day-count conversions (proleptic Gregorian, days since
// 1970-01-01). Classic era-based formulas; exact over the int range used here.
inline int64_t days_from_ymd(int y, int m, int d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

struct Ymd {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

inline Ymd ymd_from_days(int64_t z) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t y = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

}  // namespace civil

constexpr int64_t kSecondsPerDay = 86400;
constexpr int64_t kSecondsPerHour = 3600;

inline int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Day of week with Monday = 0 ... Sunday = 6 (1970-01-01 was a Thursday).
inline int day_of_week(Timestamp ts) {
  int64_t days = floor_div(ts, kSecondsPerDay);
  return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

inline civil::Ymd ymd_of(Timestamp ts) { return civil::ymd_from_days(floor_div(ts, kSecondsPerDay)); }

inline int hour_of_day(Timestamp ts) {
  int64_t s = ts - floor_div(ts, kSecondsPerDay) * kSecondsPerDay;
  return static_cast<int>(s / kSecondsPerHour);
}

inline Timestamp truncate_to_scale(Timestamp ts, Scale scale) {
  switch (scale) {
    case Scale::Hourly: return floor_div(ts, kSecondsPerHour) * kSecondsPerHour;
    case Scale::Daily: return floor_div(ts, kSecondsPerDay) * kSecondsPerDay;
    case Scale::Monthly: {
      auto ymd = ymd_of(ts);
      return civil::days_from_ymd(ymd.year, ymd.month, 1) * kSecondsPerDay;
    }
  }
  return ts;
}

inline Timestamp truncate_to_cadence(Timestamp ts, Cadence c) {
  switch (c) {
    case Cadence::Hourly: return truncate_to_scale(ts, Scale::Hourly);
    case Cadence::Daily: return truncate_to_scale(ts, Scale::Daily);
    case Cadence::Monthly: return truncate_to_scale(ts, Scale::Monthly);
    case Cadence::Weekly: {
      int64_t days = floor_div(ts, kSecondsPerDay);
      int dow = static_cast<int>(((days % 7) + 7 + 3) % 7);  // Monday = 0
      return (days - dow) * kSecondsPerDay;
    }
  }
  return ts;
}

// One aggregation bucket: start timestamp aligned to its scale boundary.
struct TimeBucket {
  Scale scale = Scale::Daily;
  Timestamp start = 0;

  bool operator==(const TimeBucket&) const = default;
  bool operator<(const TimeBucket& o) const { return start < o.start; }
};

inline TimeBucket bucket_of(Timestamp ts, Scale scale) { return {scale, truncate_to_scale(ts, scale)}; }

inline bool is_aligned(Timestamp ts, Scale scale) { return truncate_to_scale(ts, scale) == ts; }

inline Timestamp next_bucket_start(Timestamp start, Scale scale) {
  switch (scale) {
    case Scale::Hourly: return start + kSecondsPerHour;
    case Scale::Daily: return start + kSecondsPerDay;
    case Scale::Monthly: {
      auto ymd = ymd_of(start);
      int y = ymd.year, m = ymd.month + 1;
      if (m > 12) {
        m = 1;
        ++y;
      }
      return civil::days_from_ymd(y, m, 1) * kSecondsPerDay;
    }
  }
  return start;
}

inline Timestamp prev_bucket_start(Timestamp start, Scale scale) {
  switch (scale) {
    case Scale::Hourly: return start - kSecondsPerHour;
    case Scale::Daily: return start - kSecondsPerDay;
    case Scale::Monthly: {
      auto ymd = ymd_of(start);
      int y = ymd.year, m = ymd.month - 1;
      if (m < 1) {
        m = 12;
        --y;
      }
      return civil::days_from_ymd(y, m, 1) * kSecondsPerDay;
    }
  }
  return start;
}

// Start of the cadence period immediately before the one containing
// `aligned_start` (which must already be cadence-aligned).
inline Timestamp prev_cadence_start(Timestamp aligned_start, Cadence c) {
  switch (c) {
    case Cadence::Hourly: return aligned_start - kSecondsPerHour;
    case Cadence::Daily: return aligned_start - kSecondsPerDay;
    case Cadence::Weekly: return aligned_start - 7 * kSecondsPerDay;
    case Cadence::Monthly: return prev_bucket_start(aligned_start, Scale::Monthly);
  }
  return aligned_start;
}

inline Timestamp step_buckets(Timestamp start, Scale scale, int64_t k) {
  while (k > 0) {
    start = next_bucket_start(start, scale);
    --k;
  }
  while (k < 0) {
    start = prev_bucket_start(start, scale);
    ++k;
  }
  return start;
}

namespace detail {

inline bool parse_int(std::string_view s, int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace detail

// Parses "YYYY-MM-DD" and "YYYY-MM-DD[T ]HH:MM:SS" with optional trailing "Z".
// Inputs are UTC; explicit numeric offsets are rejected.
inline Timestamp parse_iso8601(std::string_view raw) {
  std::string_view s = raw;
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw ParseError("bad ISO-8601 timestamp: " + std::string(raw));
  int y, mo, d;
  if (!detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), mo) ||
      !detail::parse_int(s.substr(8, 2), d))
    throw ParseError("bad ISO-8601 date: " + std::string(raw));
  if (mo < 1 || mo > 12 || d < 1 || d > 31) throw ParseError("out-of-range ISO-8601 date: " + std::string(raw));
  int64_t secs = civil::days_from_ymd(y, mo, d) * kSecondsPerDay;
  if (s.size() == 10) return secs;
  if (s.size() != 19 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':')
    throw ParseError("bad ISO-8601 timestamp: " + std::string(raw));
  int hh, mm, ss;
  if (!detail::parse_int(s.substr(11, 2), hh) || !detail::parse_int(s.substr(14, 2), mm) ||
      !detail::parse_int(s.substr(17, 2), ss))
    throw ParseError("bad ISO-8601 time: " + std::string(raw));
  if (hh > 23 || mm > 59 || ss > 60) throw ParseError("out-of-range ISO-8601 time: " + std::string(raw));
  return secs + hh * 3600 + mm * 60 + ss;
}

inline std::string format_iso8601(Timestamp ts) {
  auto ymd = ymd_of(ts);
  int64_t rem = ts - floor_div(ts, kSecondsPerDay) * kSecondsPerDay;
  int hh = static_cast<int>(rem / 3600), mm = static_cast<int>((rem / 60) % 60), ss = static_cast<int>(rem % 60);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", ymd.year, ymd.month, ymd.day, hh, mm, ss);
  return buf;
}

inline std::string format_iso_date(Timestamp ts) {
  auto ymd = ymd_of(ts);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", ymd.year, ymd.month, ymd.day);
  return buf;
}

}  // namespace flowcast
