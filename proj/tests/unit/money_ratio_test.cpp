#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "opm/errors.hpp"
#include "opm/money.hpp"
#include "opm/ratio.hpp"
#include "opm/rng.hpp"

using opm::Money;
using opm::Ratio;

TEST_CASE("money parses and prints on the micro grid") {
  CHECK(Money::Parse("12").micros() == 12'000'000);
  CHECK(Money::Parse("-3.25").micros() == -3'250'000);
  CHECK(Money::Parse("0.000001").micros() == 1);
  CHECK(Money::Parse("7.500000").ToString() == "7.5");
  CHECK(Money::Units(4).ToString() == "4");
  CHECK(Money::FromMicros(-1).ToString() == "-0.000001");
  CHECK_THROWS_AS(Money::Parse("0.0000001"), opm::ParseError);
  CHECK_THROWS_AS(Money::Parse("1e3"), opm::ParseError);
  CHECK_THROWS_AS(Money::Parse(""), opm::ParseError);
  CHECK_THROWS_AS(Money::Parse("1."), opm::ParseError);
  CHECK_THROWS_AS(Money::Parse("99999999999999"), opm::ParseError);
}

TEST_CASE("money round trip over random amounts") {
  opm::Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    Money m = Money::FromMicros(rng.Between(-5'000'000'000, 5'000'000'000));
    CHECK(Money::Parse(m.ToString()) == m);
  }
}

TEST_CASE("ratio parsing and ordering") {
  CHECK(Ratio::Parse("3/6") == Ratio::Of(1, 2));
  CHECK(Ratio::Parse("0.0125") == Ratio::Of(1, 80));
  CHECK(Ratio::Parse("1").ToString() == "1");
  CHECK(Ratio::Of(1, 3) < Ratio::Of(1, 2));
  CHECK_THROWS(Ratio::Parse("1/0"));
  CHECK_THROWS(Ratio::Parse("-1/2"));
  CHECK_THROWS(Ratio::Parse("abc"));
}

TEST_CASE("cube-root comparisons are exact") {
  CHECK(opm::CompareWithCubeRoot(Ratio::Of(1, 10), Ratio::Of(1, 1000)) == 0);
  CHECK(opm::CompareWithCubeRoot(Ratio::Of(1, 2), Ratio::Of(1, 8)) == 0);
  CHECK(opm::CompareWithCubeRoot(Ratio::Of(100001, 1000000), Ratio::Of(1, 1000)) > 0);
  CHECK(opm::CompareWithCubeRoot(Ratio::Of(99999, 1000000), Ratio::Of(1, 1000)) < 0);
}

TEST_CASE("deriveR") {
  CHECK(opm::DeriveR(Ratio::Of(1, 1)) == Ratio::Of(1, 2));
  CHECK(opm::DeriveR(Ratio::Of(1, 1 << 24)) == Ratio::Of(1, 4));
  CHECK(opm::DeriveR(Ratio::Of(1, 1 << 18)) == Ratio::Of(1, 2));
  CHECK_THROWS_AS(opm::DeriveR(Ratio::Of(0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(opm::DeriveR(Ratio::Of(3, 2)), std::invalid_argument);
  // Off the nice powers the result is floored onto the 1e-6 grid.
  for (std::int64_t d : {1000000000LL, 3000000000LL, 7LL << 40}) {
    const Ratio a = Ratio::Of(1, d);
    const double exact = std::min(0.5, 4 * std::pow(a.ToDouble(), 1.0 / 6));
    const Ratio r = opm::DeriveR(a);
    CHECK(r.ToDouble() <= exact);
    CHECK(r.ToDouble() > exact - 1.1e-6);
  }
}

TEST_CASE("scaled prefix location") {
  // (1 - 2 * 0.1 / 0.5) * 2 = 1.2 -> 2
  CHECK(opm::ScaledPrefixLocation(2, 2, Ratio::Of(1, 1000), Ratio::Of(1, 2)) == 2u);
  // 2 * 0.7937 / 0.5 > 1 -> nothing
  CHECK_FALSE(opm::ScaledPrefixLocation(2, 2, Ratio::Of(1, 2), Ratio::Of(1, 2)).has_value());
  // exactly zero factor: 2 * 0.25 / 0.5 = 1
  CHECK_FALSE(opm::ScaledPrefixLocation(10, 2, Ratio::Of(1, 64), Ratio::Of(1, 2)).has_value());
  // (1 - 0.4) * 10 = 6 exactly, no rounding up
  CHECK(opm::ScaledPrefixLocation(10, 2, Ratio::Of(1, 1000), Ratio::Of(1, 2)) == 6u);
  CHECK_FALSE(opm::ScaledPrefixLocation(0, 2, Ratio::Of(1, 1000), Ratio::Of(1, 2)).has_value());
}

TEST_CASE("scaled prefix location agrees with floating point away from boundaries") {
  opm::Rng rng(11);
  int compared = 0;
  for (int i = 0; i < 5000; ++i) {
    const std::size_t n = static_cast<std::size_t>(rng.Between(1, 5000));
    const Ratio alpha = Ratio::Of(1, rng.Between(1, 200000));
    const Ratio r = Ratio::Of(rng.Between(1, 500), 1000);
    const int coeff = rng.Below(2) ? 2 : 6;
    const double x = (1 - coeff * std::cbrt(alpha.ToDouble()) / r.ToDouble()) * static_cast<double>(n);
    if (std::abs(x - std::round(x)) < 1e-6) continue;
    ++compared;
    const auto got = opm::ScaledPrefixLocation(n, coeff, alpha, r);
    if (x <= 0) {
      CHECK_FALSE(got.has_value());
    } else {
      REQUIRE(got.has_value());
      CHECK(*got == static_cast<std::size_t>(std::ceil(x)));
    }
  }
  CHECK(compared > 4000);
}

TEST_CASE("cube-root band") {
  // |count - r total| <= alpha^(1/3) tau with alpha^(1/3) = 0.1, tau = 10 -> band 1
  const Ratio a = Ratio::Of(1, 1000), r = Ratio::Of(1, 2);
  CHECK(opm::WithinCubeRootBand(5, 10, r, a, 10));
  CHECK(opm::WithinCubeRootBand(6, 10, r, a, 10));
  CHECK(opm::WithinCubeRootBand(4, 10, r, a, 10));
  CHECK_FALSE(opm::WithinCubeRootBand(7, 10, r, a, 10));
  CHECK_FALSE(opm::WithinCubeRootBand(3, 10, r, a, 10));
  CHECK(opm::ScaledCubeRootAtLeastOne(16, Ratio::Of(1, 1), r));
  CHECK(opm::ScaledCubeRootAtLeastOne(5, a, r));   // 5 * 0.1 / 0.5 = 1
  CHECK_FALSE(opm::ScaledCubeRootAtLeastOne(4, a, r));
}
