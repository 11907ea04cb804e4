#pragma once

#include <cstdint>
#include <random>

namespace scalereg {

// splitmix64 step; used to derive independent substream seeds from a master
// seed plus indices so that results do not depend on thread scheduling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = master;
  std::uint64_t out = splitmix64(s);
  s ^= a * 0xff51afd7ed558ccdULL;
  out ^= splitmix64(s);
  s ^= b * 0xc4ceb9fe1a85ec53ULL;
  out ^= splitmix64(s);
  s ^= c * 0x2545f4914f6cdd1dULL;
  out ^= splitmix64(s);
  return out;
}

inline std::mt19937_64 make_rng(std::uint64_t master, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
  return std::mt19937_64(derive_seed(master, a, b, c));
}

}  // namespace scalereg
