#include "opm/money.hpp"

#include <cctype>
#include <limits>
#include <stdexcept>

#include "opm/errors.hpp"

namespace opm {

Money Money::Parse(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) throw ParseError("", "empty amount");

  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool seen_point = false;
  int whole_digits = 0;
  int all_frac_digits = 0;
  constexpr std::int64_t kLimit = std::numeric_limits<std::int64_t>::max() / kScale / 10;
  for (char c : s) {
    if (c == '.') {
      if (seen_point) throw ParseError("", "malformed amount '" + std::string(text) + "'");
      seen_point = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw ParseError("", "malformed amount '" + std::string(text) + "'");
    int d = c - '0';
    (seen_point ? all_frac_digits : whole_digits)++;
    if (!seen_point) {
      if (whole > kLimit) throw ParseError("", "amount out of range '" + std::string(text) + "'");
      whole = whole * 10 + d;
    } else {
      if (frac_digits == 6) {
        if (d != 0)
          throw ParseError("", "amount '" + std::string(text) +
                                   "' is finer than the 1e-6 money grid");
        continue;
      }
      frac = frac * 10 + d;
      ++frac_digits;
    }
  }
  if (whole_digits == 0 || (seen_point && all_frac_digits == 0)) throw ParseError("", "malformed amount '" + std::string(text) + "'");
  for (int i = frac_digits; i < 6; ++i) frac *= 10;
  std::int64_t micros = whole * kScale + frac;
  return Money(negative ? -micros : micros);
}

std::string Money::ToString() const {
  std::int64_t v = micros_;
  std::string out;
  if (v < 0) {
    out.push_back('-');
    v = -v;
  }
  out += std::to_string(v / kScale);
  std::int64_t frac = v % kScale;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 6 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    out.push_back('.');
    out += digits;
  }
  return out;
}

}  // namespace opm
