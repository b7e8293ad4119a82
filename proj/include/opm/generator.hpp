#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "opm/market.hpp"
#include "opm/ratio.hpp"

namespace opm {

// Integer count drawn uniformly from [lo, hi]; lo == hi is a constant.
struct CountDist {
  std::uint32_t lo = 1;
  std::uint32_t hi = 1;
};

// Amount distribution, rounded to a multiple of `grid` (no finer than 1e-6).
//   uniform:   [a, b]
//   lognormal: exp(N(a, b^2)), a and b read as plain numbers
struct AmountDist {
  enum class Kind : std::uint8_t { kUniform, kLognormal };
  Kind kind = Kind::kUniform;
  double a = 0;
  double b = 100;
  Money grid = Money::Units(1);

  // "uniform:0:100", "lognormal:3:0.5", optionally ":grid" at the end.
  static AmountDist Parse(std::string_view text);
  std::string ToString() const;
};

struct GeneratorConfig {
  std::uint32_t mediators = 10;
  std::uint32_t advertisers = 10;
  CountDist users_per_mediator{1, 2};
  CountDist capacity{1, 2};
  AmountDist cost{AmountDist::Kind::kUniform, 0, 100, Money::Units(1)};
  AmountDist value{AmountDist::Kind::kUniform, 0, 100, Money::Units(1)};
  Ratio target_alpha{1, 1};
  std::uint64_t seed = 0;
  int max_retries = 40;
  // Grow the entity counts when tau is too small for target_alpha.
  bool scale_counts = true;
  std::size_t max_entities = 2'000'000;
};

class GeneratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic per config. The result passes ValidateInstance(target_alpha).
// Throws GeneratorError with the last validation diagnosis when the retry
// budget or the entity cap is exhausted.
Instance GenerateInstance(const GeneratorConfig& config);

// `count` instances of mixed shape (counts, user and capacity ranges, uniform
// and lognormal amounts), all valid for `alpha`. Instance i depends only on
// (seed, i).
std::vector<Instance> GenerateCorpus(std::size_t count, Ratio alpha, std::uint64_t seed,
                                     int threads = 1);

// Matched family for the ratio experiments: about 5/alpha mediators and
// advertisers, 1-3 users per mediator and slots per advertiser, uniform
// amounts on [0, 100]; tau comes out near 5/alpha.
GeneratorConfig RatioFamilyConfig(Ratio alpha, std::uint64_t seed);
std::vector<Instance> GenerateFamily(std::size_t count, Ratio alpha, std::uint64_t seed,
                                     int threads = 1);

}  // namespace opm
