#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>

namespace flockkin {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent seed for a named purpose ("initial", "perturbation", ...)
/// from one root seed.
inline constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(root ^ splitmix64(h));
}

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so results do not depend on call order and
/// stream i of a longer run equals stream i of a shorter one.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(splitmix64(seed) ^ splitmix64(stream * 0xd1342543de82ef95ULL + 1)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return splitmix64(key_ + splitmix64(counter));
  }

  /// Uniform on [0, 1).
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on counters (2c, 2c+1).
  double normal(std::uint64_t counter) const noexcept {
    double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

/// Fills `out` with a point uniform in the ball of given radius centred at 0,
/// consuming counters [first, first + out.size() + 1).
inline void uniform_in_ball(const CounterRng& rng, std::uint64_t first, double radius,
                            std::span<double> out) noexcept {
  double norm2 = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = rng.normal(first + k);
    norm2 += out[k] * out[k];
  }
  const double dim = static_cast<double>(out.size());
  const double r = radius * std::pow(rng.uniform(2 * (first + out.size()) + 7), 1.0 / dim);
  const double scale = norm2 > 0.0 ? r / std::sqrt(norm2) : 0.0;
  for (double& c : out) c *= scale;
}

}  // namespace flockkin
