#include "opm/generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "opm/canonical.hpp"
#include "opm/errors.hpp"
#include "opm/parallel.hpp"
#include "opm/rng.hpp"

namespace opm {

namespace {

constexpr double kMaxAmount = 1e9;

double ParseDouble(const std::string& s, std::string_view text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("", "bad number '" + s + "' in distribution '" + std::string(text) + "'");
  }
}

Money Draw(const AmountDist& d, Rng& rng) {
  const double grid = d.grid.ToDouble();
  if (d.kind == AmountDist::Kind::kUniform) {
    const auto lo = static_cast<std::int64_t>(std::ceil(d.a / grid - 1e-9));
    const auto hi = static_cast<std::int64_t>(std::floor(d.b / grid + 1e-9));
    return d.grid * rng.Between(std::max<std::int64_t>(lo, 0), std::max<std::int64_t>(hi, 0));
  }
  const double x = std::min(std::exp(d.a + d.b * rng.Normal()), kMaxAmount);
  return d.grid * std::llround(x / grid);
}

std::uint32_t Draw(const CountDist& d, Rng& rng) {
  return static_cast<std::uint32_t>(rng.Between(d.lo, d.hi));
}

void CheckConfig(const GeneratorConfig& c) {
  auto fail = [](const std::string& what) { throw GeneratorError("invalid generator config: " + what); };
  if (c.mediators == 0 || c.advertisers == 0) fail("need at least one mediator and one advertiser");
  if (c.users_per_mediator.lo > c.users_per_mediator.hi || c.users_per_mediator.hi == 0)
    fail("users per mediator range is empty");
  if (c.capacity.lo == 0 || c.capacity.lo > c.capacity.hi) fail("capacity range must lie in [1, inf)");
  for (const AmountDist* d : {&c.cost, &c.value}) {
    if (d->grid <= Money()) fail("amount grid must be positive");
    if (d->kind == AmountDist::Kind::kUniform && (d->a < 0 || d->b < d->a)) fail("uniform range must be 0 <= a <= b");
    if (d->kind == AmountDist::Kind::kLognormal && d->b < 0) fail("lognormal sigma must be non-negative");
  }
  if (c.target_alpha.num <= 0 || c.target_alpha > Ratio{1, 1}) fail("target alpha must lie in (0, 1]");
}

Instance Sample(const GeneratorConfig& c, std::uint32_t nm, std::uint32_t na, Rng& rng) {
  std::vector<MediatorSpec> ms(nm);
  for (auto& m : ms) {
    const std::uint32_t k = Draw(c.users_per_mediator, rng);
    for (std::uint32_t i = 0; i < k; ++i) m.user_costs.push_back(Draw(c.cost, rng));
  }
  std::vector<AdvertiserSpec> as(na);
  for (auto& a : as) {
    a.capacity = Draw(c.capacity, rng);
    a.value = Draw(c.value, rng);
  }
  auto order = RandomTieOrder(nm, na, rng.Next());
  return Instance::Create(std::move(ms), std::move(as), std::move(order));
}

// Smallest tau that the alpha promise needs for this instance's largest entity.
std::size_t RequiredTau(const Instance& inst, Ratio alpha) {
  std::size_t largest = 1;
  for (const auto& m : inst.mediators()) largest = std::max(largest, m.user_costs.size());
  for (const auto& a : inst.advertisers()) largest = std::max<std::size_t>(largest, a.capacity);
  // largest <= alpha * tau  <=>  tau >= largest * den / num
  const auto need = (static_cast<__int128>(largest) * alpha.den + alpha.num - 1) / alpha.num;
  return static_cast<std::size_t>(need);
}

}  // namespace

AmountDist AmountDist::Parse(std::string_view text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.size() < 3 || parts.size() > 4)
    throw ParseError("", "distribution '" + std::string(text) + "' must look like kind:a:b[:grid]");
  AmountDist d;
  if (parts[0] == "uniform") d.kind = Kind::kUniform;
  else if (parts[0] == "lognormal") d.kind = Kind::kLognormal;
  else throw ParseError("", "unknown distribution kind '" + parts[0] + "'");
  d.a = ParseDouble(parts[1], text);
  d.b = ParseDouble(parts[2], text);
  if (parts.size() == 4) d.grid = Money::Parse(parts[3]);
  return d;
}

std::string AmountDist::ToString() const {
  std::ostringstream os;
  os << (kind == Kind::kUniform ? "uniform" : "lognormal") << ':' << a << ':' << b << ':' << grid.ToString();
  return os.str();
}

Instance GenerateInstance(const GeneratorConfig& config) {
  CheckConfig(config);
  std::uint32_t nm = config.mediators, na = config.advertisers;
  std::string diagnosis;
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    Rng rng(Rng::DeriveSeed(config.seed, static_cast<std::uint64_t>(attempt)));
    Instance inst = Sample(config, nm, na, rng);
    const std::size_t tau = Tau(inst);
    if (tau > 0) {
      const ValidationReport v = ValidateInstance(inst, config.target_alpha);
      if (v.ok()) return inst;
      diagnosis = v.violations.front();
    } else {
      diagnosis = "no profitable trade (tau = 0)";
    }
    if (!config.scale_counts) continue;
    const std::size_t need = std::max(RequiredTau(inst, config.target_alpha), std::size_t{1});
    if (tau >= need) continue;  // an unlucky draw; resample at the same size
    const double grow = tau == 0 ? 2.0 : std::min(4.0, 1.15 * static_cast<double>(need) / static_cast<double>(tau));
    const auto nm2 = static_cast<std::uint32_t>(std::ceil(nm * grow));
    const auto na2 = static_cast<std::uint32_t>(std::ceil(na * grow));
    if (static_cast<std::size_t>(nm2) + na2 > config.max_entities)
      throw GeneratorError("cannot reach alpha " + config.target_alpha.ToString() + ": tau " +
                           std::to_string(tau) + " needs to reach " + std::to_string(need) +
                           " and the entity cap is " + std::to_string(config.max_entities));
    nm = std::max(nm2, nm + 1);
    na = std::max(na2, na + 1);
  }
  throw GeneratorError("no instance valid for alpha " + config.target_alpha.ToString() + " after " +
                       std::to_string(config.max_retries) + " attempts; last problem: " + diagnosis);
}

std::vector<Instance> GenerateCorpus(std::size_t count, Ratio alpha, std::uint64_t seed, int threads) {
  std::vector<std::optional<Instance>> slots(count);
  ParallelFor(count, threads, [&](std::size_t i) {
    Rng rng(Rng::DeriveSeed(seed, i));
    GeneratorConfig c;
    c.users_per_mediator = {1, static_cast<std::uint32_t>(rng.Between(1, 3))};
    c.capacity = {1, static_cast<std::uint32_t>(rng.Between(1, 3))};
    if (rng.Below(3) == 0) {
      c.cost = {AmountDist::Kind::kLognormal, 3.4, 0.7, Money::Units(1)};
      c.value = {AmountDist::Kind::kLognormal, 3.8, 0.7, Money::Units(1)};
    } else {
      c.cost = {AmountDist::Kind::kUniform, 0, static_cast<double>(rng.Between(40, 100)), Money::Units(1)};
      c.value = {AmountDist::Kind::kUniform, static_cast<double>(rng.Between(0, 30)), 100, Money::Units(1)};
    }
    // Start near the size the alpha promise asks for; the generator grows it.
    const double need = std::max(c.users_per_mediator.hi, c.capacity.hi) / alpha.ToDouble();
    const auto base = static_cast<std::uint32_t>(std::ceil(need * (0.9 + 0.4 * rng.Unit())));
    c.mediators = std::max<std::uint32_t>(2, base);
    c.advertisers = std::max<std::uint32_t>(2, static_cast<std::uint32_t>(base * (0.8 + 0.4 * rng.Unit())));
    c.target_alpha = alpha;
    c.seed = rng.Next();
    slots[i] = GenerateInstance(c);
  });
  std::vector<Instance> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

GeneratorConfig RatioFamilyConfig(Ratio alpha, std::uint64_t seed) {
  GeneratorConfig c;
  const auto n = static_cast<std::uint32_t>(std::lround(5 / alpha.ToDouble()));
  c.mediators = n;
  c.advertisers = n;
  c.users_per_mediator = {1, 3};
  c.capacity = {1, 3};
  c.cost = {AmountDist::Kind::kUniform, 0, 100, Money::Units(1)};
  c.value = {AmountDist::Kind::kUniform, 0, 100, Money::Units(1)};
  c.target_alpha = alpha;
  c.seed = seed;
  return c;
}

std::vector<Instance> GenerateFamily(std::size_t count, Ratio alpha, std::uint64_t seed, int threads) {
  std::vector<std::optional<Instance>> slots(count);
  ParallelFor(count, threads, [&](std::size_t i) {
    slots[i] = GenerateInstance(RatioFamilyConfig(alpha, Rng::DeriveSeed(seed, i)));
  });
  std::vector<Instance> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace opm
