#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>

namespace ember::rng {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the stream identified by `seed` and a tuple of integer keys,
/// e.g. (seed, region, period, type). Order-sensitive.
constexpr std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix(seed);
  for (auto k : keys) h = mix(h ^ mix(k + 0x632be59bd9b4e019ULL));
  return h;
}

using Engine = std::mt19937_64;

inline Engine engine(std::uint64_t seed, std::initializer_list<std::uint64_t> keys = {}) {
  return Engine(derive(seed, keys));
}

/// Unbiased integer in [0, n) with a portable (library-independent) mapping.
inline std::uint64_t uniform_index(Engine& g, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do v = g(); while (v >= limit);
  return v % n;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Engine& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Fisher-Yates with the portable index mapping.
template <class T>
void shuffle(std::span<T> v, Engine& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_index(g, i));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace ember::rng
