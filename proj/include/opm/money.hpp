#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace opm {

// Fixed-point amount in micro-units. All arithmetic is exact.
class Money {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Money() = default;
  static constexpr Money FromMicros(std::int64_t micros) { return Money(micros); }
  static constexpr Money Units(std::int64_t units) { return Money(units * kScale); }

  // Parses "12", "-3.25", "0.000001". Rejects anything finer than the grid.
  static Money Parse(std::string_view text);

  constexpr std::int64_t micros() const { return micros_; }
  double ToDouble() const { return static_cast<double>(micros_) / kScale; }

  // Canonical decimal form: no trailing zeros, no trailing point.
  std::string ToString() const;

  constexpr Money operator+(Money o) const { return Money(micros_ + o.micros_); }
  constexpr Money operator-(Money o) const { return Money(micros_ - o.micros_); }
  constexpr Money operator-() const { return Money(-micros_); }
  constexpr Money operator*(std::int64_t k) const { return Money(micros_ * k); }
  constexpr Money& operator+=(Money o) {
    micros_ += o.micros_;
    return *this;
  }
  constexpr Money& operator-=(Money o) {
    micros_ -= o.micros_;
    return *this;
  }

  constexpr auto operator<=>(const Money&) const = default;

 private:
  constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

}  // namespace opm
