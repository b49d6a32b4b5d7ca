#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace mixop {

namespace detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based stream: every draw is a pure function of (key, counter).
/// Keys are derived from (base_seed, path_index, step, lane), so a path's
/// increments do not depend on how paths are scheduled across workers.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  constexpr CounterStream() = default;
  constexpr explicit CounterStream(std::uint64_t key) : key_(key) {}

  /// Key of a path's stream family; per-step keys are derived from it.
  static constexpr std::uint64_t path_key(std::uint64_t base_seed, std::uint64_t path_index) {
    return detail::mix64(detail::mix64(base_seed) ^ (path_index * 0xD1B54A32D192ED03ULL));
  }

  static constexpr CounterStream at_step(std::uint64_t path_key, std::uint64_t step, std::uint64_t lane = 0) {
    return CounterStream(detail::mix64(path_key ^ (step * 0x9E3779B97F4A7C15ULL) ^ (lane << 56)));
  }

  static constexpr CounterStream derive(std::uint64_t base_seed, std::uint64_t path_index,
                                        std::uint64_t step = 0, std::uint64_t lane = 0) {
    return at_step(path_key(base_seed, path_index), step, lane);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() { return detail::mix64(key_ ^ detail::mix64(counter_++)); }

  /// Uniform in the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal pair by the Marsaglia polar method.
  void normal_pair(double& a, double& b) {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s < 1.0 && s > 0.0) {
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        a = u * f;
        b = v * f;
        return;
      }
    }
  }

  double normal() {
    double a, b;
    normal_pair(a, b);
    return a;
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace mixop
