#pragma once

#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "flowcast/common.hpp"

namespace flowcast {

namespace track {

// Process-wide access recorder used by tests to assert that (a) pipeline
// stages only touch their declared inputs and (b) lag-only covariates are
// never read at or after a row's own bucket. Disabled by default; recording
// costs one branch when off.
class AccessLog {
 public:
  static AccessLog& instance() {
    static AccessLog log;
    return log;
  }

  void enable(bool on) {
    std::lock_guard<std::mutex> lk(mu_);
    enabled_ = on;
  }
  bool enabled() const { return enabled_; }

  void record_read(const std::string& path) {
    if (!enabled_) return;
    std::lock_guard<std::mutex> lk(mu_);
    reads_.push_back(path);
  }
  void record_write(const std::string& path) {
    if (!enabled_) return;
    std::lock_guard<std::mutex> lk(mu_);
    writes_.push_back(path);
  }
  // One covariate lookup: series name, the bucket key requested, and the
  // bucket of the feature row being built (0 when not in row context).
  void record_covariate(const std::string& series, int64_t key_ts, int64_t row_bucket_ts) {
    if (!enabled_) return;
    std::lock_guard<std::mutex> lk(mu_);
    covariate_reads_.push_back({series, key_ts, row_bucket_ts});
  }

  void clear() {
    std::lock_guard<std::mutex> lk(mu_);
    reads_.clear();
    writes_.clear();
    covariate_reads_.clear();
  }

  struct CovariateRead {
    std::string series;
    int64_t key_ts;
    int64_t row_bucket_ts;
  };

  std::vector<std::string> reads() const {
    std::lock_guard<std::mutex> lk(mu_);
    return reads_;
  }
  std::vector<std::string> writes() const {
    std::lock_guard<std::mutex> lk(mu_);
    return writes_;
  }
  std::vector<CovariateRead> covariate_reads() const {
    std::lock_guard<std::mutex> lk(mu_);
    return covariate_reads_;
  }

 private:
  mutable std::mutex mu_;
  bool enabled_ = false;
  std::vector<std::string> reads_;
  std::vector<std::string> writes_;
  std::vector<CovariateRead> covariate_reads_;
};

}  // namespace track

namespace util {

inline std::string read_file(const std::string& path) {
  track::AccessLog::instance().record_read(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure: " + path);
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  track::AccessLog::instance().record_write(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failure: " + path);
}

inline bool file_exists(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return static_cast<bool>(in);
}

}  // namespace util
}  // namespace flowcast
