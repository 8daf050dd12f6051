#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

// std::uniform_int_distribution and std::shuffle are implementation-defined,
// so seeded runs would differ between standard libraries. Everything that
// must be reproducible draws through these helpers instead.
namespace hhi::rng {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; derives independent stream seeds from a base seed.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  return mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL));
}

/// Uniform integer in [0, n) by rejection sampling. n must be > 0.
inline std::uint64_t below(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = Engine::max() - (Engine::max() % n + 1) % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x > limit);
  return x % n;
}

/// Uniform real in [0, 1).
inline double unit(Engine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

template <class T>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = below(eng, i);
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

/// `count` distinct indices from [0, n), in draw order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, Engine& eng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < count && i < n; ++i) {
    std::size_t j = i + below(eng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(std::min(count, n));
  return idx;
}

}  // namespace hhi::rng
