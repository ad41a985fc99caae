#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mnb {

using Rng = std::mt19937_64;

namespace detail {

// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Derives an independent engine from a master seed and a path of indices,
/// e.g. stream(seed, {q, l, kCosts}). Streams depend only on the path, never
/// on how many other streams were created, so adding a consumer does not
/// perturb the others.
inline Rng stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = detail::mix64(master);
  for (std::uint64_t p : path) h = detail::mix64(h ^ detail::mix64(p + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

/// Uniform draw on [0, 1).
template <class URBG>
double uniform01(URBG& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace mnb
