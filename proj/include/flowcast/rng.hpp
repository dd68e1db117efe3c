#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "flowcast/common.hpp"

namespace flowcast {

// Self-contained deterministic RNG (splitmix64-seeded xoshiro256++) so that
// reports are byte-identical across runs and toolchains. Standard-library
// distributions are implementation-defined, so sampling is hand-rolled here.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& si : s_) si = splitmix64(x);
  }

  // Derive an independent child stream, e.g. per tree / per day / per stage.
  Rng child(uint64_t salt) const {
    uint64_t x = s_[0] ^ (salt * 0x9E3779B97F4A7C15ull) ^ s_[3];
    return Rng(splitmix64(x));
  }
  Rng child(std::string_view tag) const { return child(util::fnv1a(tag)); }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); unbiased via rejection.
  uint64_t uniform_index(uint64_t n) {
    if (n == 0) throw DomainError("uniform_index: n must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  int64_t uniform_int(int64_t lo, int64_t hi) {  // inclusive bounds
    return lo + static_cast<int64_t>(uniform_index(static_cast<uint64_t>(hi - lo + 1)));
  }

  // Marsaglia polar method; consumes a deterministic number of draws per pair.
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return mean + stddev * u * f;
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  // Knuth product method with additive splitting for large rates.
  int64_t poisson(double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("poisson: lambda must be non-negative");
    int64_t total = 0;
    while (lambda > 500.0) {
      total += poisson_small(500.0);
      lambda -= 500.0;
    }
    return total + poisson_small(lambda);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  int64_t poisson_small(double lambda) {
    if (lambda <= 0.0) return 0;
    const double l = std::exp(-lambda);
    int64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > l);
    return k - 1;
  }

  uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace flowcast
