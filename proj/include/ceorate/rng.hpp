#pragma once

#include <cstdint>

#include <cmath>
#include <numbers>

namespace ceorate {

namespace detail {

/// One round of the splitmix64 output function.  Used as a stateless mixer:
/// feeding it distinct inputs yields well-scrambled, decorrelated outputs.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random generator: every draw is a pure function of the seed
/// and a tuple of counters, with no hidden state.  Consumers that key their
/// draws by (trial, step, stream) indices therefore produce bit-identical
/// results regardless of evaluation order, thread count, or scheduling.
class CounterRng {
 public:
  /// Scrambles the seed and up to four counter words into one 64-bit value.
  static constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t c0,
                                     std::uint64_t c1 = 0, std::uint64_t c2 = 0,
                                     std::uint64_t c3 = 0) noexcept {
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ c0);
    h = detail::splitmix64(h ^ c1);
    h = detail::splitmix64(h ^ c2);
    h = detail::splitmix64(h ^ c3);
    return h;
  }

  /// Uniform draw on the half-open-from-zero interval (0, 1].  The +1 on the
  /// 53-bit mantissa keeps the result strictly positive, so logarithms of
  /// uniforms are always finite.
  static constexpr double uniform(std::uint64_t seed, std::uint64_t c0,
                                  std::uint64_t c1 = 0, std::uint64_t c2 = 0,
                                  std::uint64_t c3 = 0) noexcept {
    return static_cast<double>((mix(seed, c0, c1, c2, c3) >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal draw via the Box-Muller transform.  Draw `idx` consumes
  /// the uniform counters (2*idx, 2*idx + 1) in the last counter slot, so
  /// distinct indices never share entropy.
  static double normal(std::uint64_t seed, std::uint64_t c0, std::uint64_t c1,
                       std::uint64_t c2, std::uint64_t idx) noexcept {
    const double u1 = uniform(seed, c0, c1, c2, 2 * idx);
    const double u2 = uniform(seed, c0, c1, c2, 2 * idx + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }
};

}  // namespace ceorate
