#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace opm {

// Exact non-negative rational used for alpha and r.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  // Accepts "3/8", "0.0125", "1". Result is reduced.
  static Ratio Parse(std::string_view text);
  static Ratio Of(std::int64_t num, std::int64_t den);

  double ToDouble() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string ToString() const;

  std::strong_ordering operator<=>(const Ratio& o) const;
  bool operator==(const Ratio& o) const { return (*this <=> o) == 0; }
};

// Exact comparisons against roots of alpha. x must be non-negative.
// Returns the ordering of x relative to alpha^(1/3).
std::strong_ordering CompareWithCubeRoot(Ratio x, Ratio alpha);

// min{1/2, 4 * alpha^(1/6)} rounded toward zero onto the 1e-6 grid.
// Throws std::invalid_argument unless 0 < alpha <= 1.
Ratio DeriveR(Ratio alpha);

// The 1-indexed location ceil((1 - coeff * alpha^(1/3) / r) * n) of a
// canonical assignment of size n, or nullopt when the expression is <= 0.
std::optional<std::size_t> ScaledPrefixLocation(std::size_t n, int coeff, Ratio alpha,
                                                Ratio r);

// |count - r * total| <= alpha^(1/3) * tau, decided exactly.
bool WithinCubeRootBand(std::size_t count, std::size_t total, Ratio r, Ratio alpha,
                        std::size_t tau);

// coeff * alpha^(1/3) / r >= 1, decided exactly.
bool ScaledCubeRootAtLeastOne(int coeff, Ratio alpha, Ratio r);

// -7 alpha^(1/3) tau / r <= size - (1 - r) tau <= alpha^(1/3) tau, decided exactly.
bool WithinAssignableBand(std::size_t size, std::size_t tau, Ratio r, Ratio alpha);

}  // namespace opm
