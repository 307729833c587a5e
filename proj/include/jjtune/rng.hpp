#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace jjtune {

// Counter-based randomness. Every junction/round pair gets its own stream
// derived from (seed, junction_id, round), so simulation results are
// bit-identical whether dies are processed sequentially or in parallel, and
// identical across standard libraries (std::normal_distribution is not
// portable).

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // one warm-up step decorrelates small consecutive seeds
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (two uniforms per draw, no cached state).
  double normal() {
    double u1 = uniform01();
    const double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Lognormal factor with mean exactly 1 and relative std `cv`.
  double lognormal_unit_mean(double cv) {
    if (cv <= 0.0) return 1.0;
    const double s2 = std::log(1.0 + cv * cv);
    return std::exp(-0.5 * s2 + std::sqrt(s2) * normal());
  }

  /// Fisher-Yates shuffle of indices [0, n).
  template <typename Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_u64() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

/// Stream seed for one (junction, round) pair under a master seed.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view id,
                                 int round) {
  std::uint64_t s = master ^ (fnv1a64(id) + 0x9e3779b97f4a7c15ULL *
                                                static_cast<std::uint64_t>(
                                                    round + 1));
  splitmix64(s);
  return s;
}

/// Sub-seed for a named phase (round application, die search, ...).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t s = master ^ (salt * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  splitmix64(s);
  return s;
}

} // namespace jjtune
