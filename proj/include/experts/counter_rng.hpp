#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

namespace experts {

// Stateless counter-based generator: every draw is a pure hash of
// (seed, stream, step, lane), so trials can run in any order or in parallel
// and still reproduce bit-for-bit.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t bits(std::uint64_t step, std::uint64_t lane) const {
    std::uint64_t h = mix(seed_);
    h = mix(h ^ stream_);
    h = mix(h ^ step);
    return mix(h ^ lane);
  }

  // Uniform on [0, 1).
  double uniform(std::uint64_t step, std::uint64_t lane) const {
    return static_cast<double>(bits(step, lane) >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double uniform_open_zero(std::uint64_t step, std::uint64_t lane) const {
    return static_cast<double>((bits(step, lane) >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal for coordinate `lane` at `step` (Box-Muller; coordinates
  // 2k and 2k+1 share one uniform pair).
  double gaussian(std::uint64_t step, std::uint64_t lane) const {
    const std::uint64_t pair = lane >> 1;
    const double u1 = uniform_open_zero(step, 2 * pair);
    const double u2 = uniform(step, 2 * pair + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (lane & 1) ? r * std::sin(angle) : r * std::cos(angle);
  }

  // Fills out[0..n) with the same values gaussian(step, i) would return.
  template <class Out>
  void gaussian_vector(std::uint64_t step, std::size_t n, Out& out) const {
    for (std::size_t pair = 0; 2 * pair < n; ++pair) {
      const double u1 = uniform_open_zero(step, 2 * pair);
      const double u2 = uniform(step, 2 * pair + 1);
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      out[2 * pair] = r * std::cos(angle);
      if (2 * pair + 1 < n) out[2 * pair + 1] = r * std::sin(angle);
    }
  }

  bool coin(std::uint64_t step, std::uint64_t lane) const { return (bits(step, lane) >> 63) != 0; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace experts
