#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "opm/ratio.hpp"

namespace opm {

// Seeded generator with portable draws. std::mt19937_64's raw output is fixed by
// the standard; the distributions here are hand-rolled so replays agree across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (seed, label), via splitmix64.
  static std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t label);

  std::uint64_t Next() { return engine_(); }
  // Uniform in [0, n); n > 0.
  std::uint64_t Below(std::uint64_t n);
  // Uniform in [lo, hi].
  std::int64_t Between(std::int64_t lo, std::int64_t hi);
  // Uniform double in [0, 1) with 53 bits.
  double Unit();
  // Exact Bernoulli(p) for rational p in [0, 1].
  bool Bernoulli(Ratio p);
  bool Bernoulli(double p) { return Unit() < p; }
  double Normal();

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace opm
