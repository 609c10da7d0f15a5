#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dipgnn/errors.hpp"

namespace dipgnn {

/// Seeded random stream. All sampling in the library goes through this class
/// so that a run is a pure function of (config, seed).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    if (n <= 0) throw DataError("Rng::uniform_int: n must be positive");
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    std::uint64_t mask = ~std::uint64_t{0};
    std::uint64_t v = un - 1;
    v |= v >> 1; v |= v >> 2; v |= v >> 4;
    v |= v >> 8; v |= v >> 16; v |= v >> 32;
    mask = v;
    for (;;) {
      const std::uint64_t x = next_u64() & mask;
      if (x < un) return static_cast<int>(x);
    }
  }

  /// Standard normal via Box-Muller; draws two uniforms per call.
  double normal() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[uniform_int(i + 1)]);
    }
  }

  /// k distinct integers from [0, n), uniform over k-subsets (Floyd's method).
  /// Returned in draw order, not sorted.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 engine_;
};

inline std::vector<int> Rng::sample_without_replacement(int n, int k) {
  if (k < 0 || k > n) {
    throw DataError("sample_without_replacement: need 0 <= k <= n");
  }
  std::vector<int> out;
  out.reserve(k);
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  for (int j = n - k; j < n; ++j) {
    const int t = uniform_int(j + 1);
    if (chosen[t]) {
      out.push_back(j);
      chosen[j] = true;
    } else {
      out.push_back(t);
      chosen[t] = true;
    }
  }
  return out;
}

}  // namespace dipgnn
