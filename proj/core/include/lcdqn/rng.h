#ifndef LCDQN_RNG_H_
#define LCDQN_RNG_H_

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace lcdqn {

// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. Distributions are implemented here instead of using the
// <random> adaptors, whose algorithms differ between standard libraries.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double UniformReal(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * UniformUnit(rng);
}

// Unbiased integer in [0, n) by rejection; n must be > 0.
inline std::uint64_t UniformIndex(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

// SplitMix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::string SaveRngState(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

inline void LoadRngState(Rng& rng, const std::string& state) {
  std::istringstream is(state);
  is >> rng;
}

}  // namespace lcdqn

#endif  // LCDQN_RNG_H_
