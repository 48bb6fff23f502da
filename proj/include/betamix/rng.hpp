#pragma once

#include <cstdint>
#include <random>

namespace betamix {

using Rng = std::mt19937_64;

// Uniform on the open interval (0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  double u;
  do {
    u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  } while (u == 0.0);
  return u;
}

inline double gamma_draw(Rng& rng, double shape, double rate) {
  std::gamma_distribution<double> g(shape, 1.0 / rate);
  return g(rng);
}

inline double beta_draw(Rng& rng, double a, double b) {
  double x = gamma_draw(rng, a, 1.0), y = gamma_draw(rng, b, 1.0);
  return x / (x + y);
}

inline double normal_draw(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

// SplitMix64 step, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace betamix
