#pragma once

#include <cmath>
#include <cstdint>

namespace frest {

/// Counter-based pseudo-random generator.
///
/// Every draw is a pure function of (seed, stream, counter), so samples can be
/// generated in parallel by stream index and still be bit-reproducible. The
/// mixing function is the splitmix64 finalizer applied to a Weyl sequence.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(mix(seed ^ mix(stream * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL))) {}

  std::uint64_t next_u64() {
    return mix(base_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform double in [0, 1) with 53 significant bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal variate (Box-Muller; pairs are cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform integer in [0, bound) via rejection-free scaling (bound < 2^32
  /// keeps modulo bias below 2^-32; fine for shuffling at desk scale).
  std::uint64_t next_below(std::uint64_t bound) {
    return next_u64() % bound;
  }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t base_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace frest
