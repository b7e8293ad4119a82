#include "opm/rng.hpp"

#include <cmath>

namespace opm {

std::uint64_t Rng::DeriveSeed(std::uint64_t seed, std::uint64_t label) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (label + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::Below(std::uint64_t n) {
  // Rejection on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::int64_t Rng::Between(std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(Below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

bool Rng::Bernoulli(Ratio p) {
  // u < p with u = x / 2^53, decided in 128-bit integers.
  const unsigned __int128 x = engine_() >> 11;
  return x * static_cast<unsigned __int128>(p.den) <
         static_cast<unsigned __int128>(p.num) << 53;
}

double Rng::Normal() {
  // Box-Muller; one draw per call keeps the stream position simple.
  double u1 = Unit();
  double u2 = Unit();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace opm
