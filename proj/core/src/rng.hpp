#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace ghostsim {

// Every random draw in the library goes through std::mt19937_64, whose output
// sequence is fixed by the standard, seeded via SplitMix64. Bounded draws use
// rejection sampling because std::uniform_int_distribution is not portable.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = (std::numeric_limits<std::uint64_t>::max() / n) * n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

}  // namespace ghostsim
