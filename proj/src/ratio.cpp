#include "opm/ratio.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <numeric>
#include <stdexcept>

#include "opm/errors.hpp"

namespace opm {

namespace {

using boost::multiprecision::cpp_int;

std::strong_ordering Order(const cpp_int& a, const cpp_int& b) {
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

// Orders xn/xd against alpha^(1/3) by cubing: xn^3 * alpha.den vs alpha.num * xd^3.
std::strong_ordering CompareCube(const cpp_int& xn, const cpp_int& xd, Ratio alpha) {
  cpp_int lhs = xn * xn * xn * alpha.den;
  cpp_int rhs = cpp_int(alpha.num) * xd * xd * xd;
  return Order(lhs, rhs);
}

}  // namespace

Ratio Ratio::Of(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num < 0) throw std::invalid_argument("ratio must be non-negative with positive denominator");
  std::int64_t g = std::gcd(num, den);
  if (g == 0) g = 1;
  return Ratio{num / g, den / g};
}

Ratio Ratio::Parse(std::string_view text) {
  auto fail = [&]() -> ParseError {
    return ParseError("", "malformed rational '" + std::string(text) + "'");
  };
  if (text.empty()) throw fail();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto parse_int = [&](std::string_view s) {
      if (s.empty() || s.size() > 18) throw fail();
      std::int64_t v = 0;
      for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) throw fail();
        v = v * 10 + (c - '0');
      }
      return v;
    };
    std::int64_t n = parse_int(text.substr(0, slash));
    std::int64_t d = parse_int(text.substr(slash + 1));
    if (d == 0) throw fail();
    return Of(n, d);
  }
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool point = false;
  int digits = 0;
  for (char c : text) {
    if (c == '.') {
      if (point) throw fail();
      point = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) throw fail();
    if (++digits > 18) throw fail();
    num = num * 10 + (c - '0');
    if (point) den *= 10;
  }
  if (digits == 0) throw fail();
  return Of(num, den);
}

std::string Ratio::ToString() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

std::strong_ordering Ratio::operator<=>(const Ratio& o) const {
  return Order(cpp_int(num) * o.den, cpp_int(o.num) * den);
}

std::strong_ordering CompareWithCubeRoot(Ratio x, Ratio alpha) {
  return CompareCube(cpp_int(x.num), cpp_int(x.den), alpha);
}

Ratio DeriveR(Ratio alpha) {
  if (alpha.num <= 0 || alpha > Ratio{1, 1})
    throw std::invalid_argument("alpha must lie in (0, 1], got " + alpha.ToString());
  // Largest q with q / 1e6 <= 4 * alpha^(1/6), i.e. q^6 * alpha.den <= alpha.num * (4e6)^6.
  constexpr std::int64_t kGrid = 1'000'000;
  constexpr std::int64_t kHalf = kGrid / 2;
  const cpp_int scale = cpp_int(4 * kGrid);
  const cpp_int bound = cpp_int(alpha.num) * pow(scale, 6);
  auto fits = [&](std::int64_t q) { return pow(cpp_int(q), 6) * alpha.den <= bound; };
  if (fits(kHalf)) return Ratio{1, 2};
  std::int64_t lo = 0;
  std::int64_t hi = kHalf;  // fits(lo) holds, fits(hi) does not
  while (hi - lo > 1) {
    std::int64_t mid = lo + (hi - lo) / 2;
    (fits(mid) ? lo : hi) = mid;
  }
  if (lo == 0) throw std::invalid_argument("alpha too small: r rounds to zero on the 1e-6 grid");
  return Ratio::Of(lo, kGrid);
}

std::optional<std::size_t> ScaledPrefixLocation(std::size_t n, int coeff, Ratio alpha, Ratio r) {
  if (n == 0 || r.num == 0) return std::nullopt;
  // Positive iff r / coeff > alpha^(1/3).
  if (CompareCube(cpp_int(r.num), cpp_int(r.den) * coeff, alpha) != std::strong_ordering::greater)
    return std::nullopt;
  // ceil(n - coeff*n*alpha^(1/3)/r) = n - j, j the largest integer with
  // j * r / (coeff * n) <= alpha^(1/3).
  const cpp_int den = cpp_int(r.den) * coeff * n;
  std::size_t lo = 0;
  std::size_t hi = n;  // j = n is excluded by positivity
  while (hi - lo > 1) {
    std::size_t mid = lo + (hi - lo) / 2;
    bool ok = CompareCube(cpp_int(mid) * r.num, den, alpha) != std::strong_ordering::greater;
    (ok ? lo : hi) = mid;
  }
  return n - lo;
}

bool WithinCubeRootBand(std::size_t count, std::size_t total, Ratio r, Ratio alpha,
                        std::size_t tau) {
  cpp_int diff = cpp_int(count) * r.den - cpp_int(r.num) * total;
  if (diff < 0) diff = -diff;
  if (tau == 0) return diff == 0;
  return CompareCube(diff, cpp_int(r.den) * tau, alpha) != std::strong_ordering::greater;
}

bool ScaledCubeRootAtLeastOne(int coeff, Ratio alpha, Ratio r) {
  return CompareCube(cpp_int(r.num), cpp_int(r.den) * coeff, alpha) != std::strong_ordering::greater;
}

}  // namespace opm

namespace opm {

bool WithinAssignableBand(std::size_t size, std::size_t tau, Ratio r, Ratio alpha) {
  // d = size - (1 - r) tau, scaled by r.den
  const cpp_int d = cpp_int(size) * r.den - cpp_int(tau) * (r.den - r.num);
  if (d > 0) return CompareCube(d, cpp_int(r.den) * tau, alpha) != std::strong_ordering::greater;
  if (d < 0)
    return CompareCube(-d * r.num, cpp_int(r.den) * r.den * 7 * tau, alpha) !=
           std::strong_ordering::greater;
  return true;
}

}  // namespace opm
