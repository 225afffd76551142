#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace padist {

// 64-bit FNV-1a over the component name.
constexpr uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream seed for (root, component, index). Every random consumer in the
// project derives its engine seed through this function so results do not
// depend on the order in which work items are executed.
constexpr uint64_t derive_seed(uint64_t root, std::string_view component,
                               uint64_t index = 0) {
  return splitmix64(splitmix64(root ^ fnv1a64(component)) + index);
}

using Engine = std::mt19937_64;

inline Engine make_engine(uint64_t root, std::string_view component,
                          uint64_t index = 0) {
  return Engine(derive_seed(root, component, index));
}

// Uniform double in [0, 1) from the top 53 bits; portable across standard
// libraries unlike std::uniform_real_distribution.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller, portable bit-for-bit given the engine.
inline double standard_normal(Engine& eng) {
  double u1 = uniform01(eng);
  while (u1 <= 0.0) u1 = uniform01(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_normal(Engine& eng, double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = standard_normal(eng);
  const double im = standard_normal(eng);
  return {s * re, s * im};
}

}  // namespace padist
