#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace slgad {

using Rng = std::mt19937_64;

// Stream tags keep the random streams of different pipeline stages apart.
enum class Stream : std::uint64_t {
  kInit = 1,
  kTrainOrder = 2,
  kTrainView = 3,
  kTrainNegative = 4,
  kScoreView = 5,
  kScoreNegative = 6,
  kInject = 7,
  kToy = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed derived from (run seed, stream, coordinates...). Used to give every
// (epoch, target) or (round, target) its own independent stream so work can be
// split across threads without changing results.
inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                 std::initializer_list<std::uint64_t> coords = {}) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
  for (auto c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed, Stream stream,
                    std::initializer_list<std::uint64_t> coords = {}) {
  return Rng(derive_seed(seed, stream, coords));
}

}  // namespace slgad
