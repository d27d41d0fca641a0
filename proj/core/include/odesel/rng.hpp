#pragma once

#include <cmath>
#include <cstdint>

namespace odesel {

namespace detail {

// SplitMix64 finalizer; the core bit mixer behind the counter stream.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random stream: output i is a pure function of (key, i).
///
/// Stream splitting rule: `RngStream(seed, a, b, ...)` derives its key by
/// folding each path component through the SplitMix64 finalizer, so
/// (seed, cell, replication) paths yield independent streams whose draws do
/// not depend on scheduling order. Replications run in parallel therefore
/// produce the same numbers as a serial run.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(detail::mix64(seed)) {}

  template <typename... Path>
  RngStream(std::uint64_t seed, Path... path) : key_(detail::mix64(seed)) {
    (fold(static_cast<std::uint64_t>(path)), ...);
  }

  std::uint64_t next_u64() { return detail::mix64(key_ ^ (counter_++) * 0xd1342543de82ef95ULL); }

  /// Uniform double in the open interval (0, 1).
  double uniform() {
    // 53 random mantissa bits; offset by half an ulp to exclude 0.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform double in (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw via Box-Muller (two uniforms per call, no cache, so
  /// the draw sequence is independent of call interleaving).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  void fold(std::uint64_t component) { key_ = detail::mix64(key_ ^ (component + 0x9e3779b97f4a7c15ULL)); }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace odesel
