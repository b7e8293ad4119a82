#include "opm/market.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "opm/canonical.hpp"
#include "opm/errors.hpp"
#include "opm/rng.hpp"

namespace opm {

std::string EntityId::ToString() const {
  return (is_mediator() ? "m" : "a") + std::to_string(index);
}

EntityId EntityId::Parse(std::string_view text) {
  if (text.size() < 2 || (text[0] != 'm' && text[0] != 'a'))
    throw ParseError("", "malformed entity id '" + std::string(text) + "'");
  std::uint64_t v = 0;
  for (char c : text.substr(1)) {
    if (c < '0' || c > '9' || v > UINT32_MAX / 10)
      throw ParseError("", "malformed entity id '" + std::string(text) + "'");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  if (v > UINT32_MAX) throw ParseError("", "entity index out of range");
  return {text[0] == 'm' ? EntityKind::kMediator : EntityKind::kAdvertiser,
          static_cast<std::uint32_t>(v)};
}

std::strong_ordering CompareKeys(const TieKey& a, const TieKey& b) { return a <=> b; }

Instance Instance::Create(std::vector<MediatorSpec> mediators,
                          std::vector<AdvertiserSpec> advertisers,
                          std::vector<EntityId> tie_order) {
  Instance inst;
  const std::size_t n = mediators.size() + advertisers.size();
  if (tie_order.size() != n)
    throw std::invalid_argument("tie order must list every entity exactly once");
  constexpr std::uint32_t kUnset = UINT32_MAX;
  inst.mediator_rank_.assign(mediators.size(), kUnset);
  inst.advertiser_rank_.assign(advertisers.size(), kUnset);
  for (std::uint32_t r = 0; r < tie_order.size(); ++r) {
    const EntityId id = tie_order[r];
    auto& ranks = id.is_mediator() ? inst.mediator_rank_ : inst.advertiser_rank_;
    if (id.index >= ranks.size() || ranks[id.index] != kUnset)
      throw std::invalid_argument("tie order entry " + id.ToString() +
                                  " is unknown or repeated");
    ranks[id.index] = r;
  }
  for (std::size_t m = 0; m < mediators.size(); ++m)
    for (Money c : mediators[m].user_costs)
      if (c < Money()) throw std::invalid_argument("negative user cost at mediator m" + std::to_string(m));
  for (std::size_t a = 0; a < advertisers.size(); ++a) {
    if (advertisers[a].capacity == 0)
      throw std::invalid_argument("advertiser a" + std::to_string(a) + " has zero capacity");
    if (advertisers[a].value < Money())
      throw std::invalid_argument("advertiser a" + std::to_string(a) + " has negative value");
  }
  inst.mediators_ = std::move(mediators);
  inst.advertisers_ = std::move(advertisers);
  inst.tie_order_ = std::move(tie_order);
  return inst;
}

std::size_t Instance::user_count() const {
  std::size_t n = 0;
  for (const auto& m : mediators_) n += m.user_costs.size();
  return n;
}

std::size_t Instance::slot_count() const {
  std::size_t n = 0;
  for (const auto& a : advertisers_) n += a.capacity;
  return n;
}

bool Instance::operator==(const Instance& o) const {
  if (mediators_.size() != o.mediators_.size() || advertisers_.size() != o.advertisers_.size() ||
      tie_order_ != o.tie_order_)
    return false;
  for (std::size_t m = 0; m < mediators_.size(); ++m)
    if (mediators_[m].user_costs != o.mediators_[m].user_costs) return false;
  for (std::size_t a = 0; a < advertisers_.size(); ++a)
    if (advertisers_[a].capacity != o.advertisers_[a].capacity ||
        advertisers_[a].value != o.advertisers_[a].value)
      return false;
  return true;
}

std::vector<EntityId> RandomTieOrder(std::size_t mediators, std::size_t advertisers,
                                     std::uint64_t seed) {
  std::vector<EntityId> order;
  order.reserve(mediators + advertisers);
  for (std::uint32_t m = 0; m < mediators; ++m) order.push_back(EntityId::Mediator(m));
  for (std::uint32_t a = 0; a < advertisers; ++a) order.push_back(EntityId::Advertiser(a));
  Rng rng(seed);
  rng.Shuffle(order);
  return order;
}

ReportProfile ReportProfile::Truthful(const Instance& instance) {
  ReportProfile p;
  p.mediators.reserve(instance.mediators().size());
  for (const auto& m : instance.mediators()) {
    MediatorReport r;
    r.users.reserve(m.user_costs.size());
    for (std::uint32_t i = 0; i < m.user_costs.size(); ++i) r.users.push_back({m.user_costs[i], i});
    p.mediators.push_back(std::move(r));
  }
  p.advertisers.reserve(instance.advertisers().size());
  for (const auto& a : instance.advertisers()) p.advertisers.push_back({a.capacity, a.value});
  return p;
}

std::vector<KeyedUser> UsersOf(const Instance& inst, const ReportProfile& reports,
                               std::span<const std::uint32_t> mediators) {
  std::vector<KeyedUser> out;
  for (std::uint32_t m : mediators)
    for (std::uint32_t i = 0; i < reports.mediators[m].users.size(); ++i) {
      UserRef u{m, i};
      out.push_back({u, UserKey(inst, reports, u)});
    }
  return out;
}

std::vector<KeyedSlot> SlotsOf(const Instance& inst, const ReportProfile& reports,
                               std::span<const std::uint32_t> advertisers) {
  std::vector<KeyedSlot> out;
  for (std::uint32_t a : advertisers)
    for (std::uint32_t s = 0; s < reports.advertisers[a].capacity; ++s) {
      SlotRef b{a, s};
      out.push_back({b, SlotKey(inst, reports, b)});
    }
  return out;
}

std::vector<KeyedUser> AllUsers(const Instance& inst, const ReportProfile& reports) {
  std::vector<std::uint32_t> all(reports.mediators.size());
  std::iota(all.begin(), all.end(), 0u);
  return UsersOf(inst, reports, all);
}

std::vector<KeyedSlot> AllSlots(const Instance& inst, const ReportProfile& reports) {
  std::vector<std::uint32_t> all(reports.advertisers.size());
  std::iota(all.begin(), all.end(), 0u);
  return SlotsOf(inst, reports, all);
}

void Assignment::Add(UserRef user, SlotRef slot) {
  for (const auto& [u, b] : pairs_)
    if (u == user || b == slot) throw std::invalid_argument("user or slot assigned twice");
  pairs_.emplace_back(user, slot);
}

Money GainFromTrade(const Assignment& assignment, const ReportProfile& reports) {
  Money total;
  for (const auto& [u, b] : assignment.pairs()) {
    if (u.mediator >= reports.mediators.size() ||
        u.user >= reports.mediators[u.mediator].users.size())
      throw std::out_of_range("dangling user reference");
    if (b.advertiser >= reports.advertisers.size() ||
        b.slot >= reports.advertisers[b.advertiser].capacity)
      throw std::out_of_range("dangling slot reference");
    total += reports.advertisers[b.advertiser].value - reports.mediators[u.mediator].users[u.user].cost;
  }
  return total;
}

ValidationReport ValidateInstance(const Instance& instance, Ratio alpha) {
  ValidationReport report;
  report.tau = Tau(instance);
  if (report.tau == 0)
    throw std::invalid_argument("optimal trade is empty (tau = 0); the mechanism needs |S_c(P,B)| > 0");
  const Ratio one{1, 1};
  const Ratio floor = Ratio::Of(1, static_cast<std::int64_t>(report.tau));
  if (alpha > one) report.violations.push_back("alpha > 1");
  if (alpha < floor) report.violations.push_back("alpha < 1/tau (tau = " + std::to_string(report.tau) + ")");
  // size <= alpha * tau  <=>  size * alpha.den <= alpha.num * tau
  auto within = [&](std::size_t size) {
    return static_cast<unsigned __int128>(size) * alpha.den <=
           static_cast<unsigned __int128>(alpha.num) * report.tau;
  };
  for (std::size_t a = 0; a < instance.advertisers().size(); ++a)
    if (!within(instance.advertisers()[a].capacity))
      report.violations.push_back("capacity of a" + std::to_string(a) + " exceeds alpha * tau");
  for (std::size_t m = 0; m < instance.mediators().size(); ++m)
    if (!within(instance.mediators()[m].user_costs.size()))
      report.violations.push_back("user count of m" + std::to_string(m) + " exceeds alpha * tau");
  return report;
}

}  // namespace opm
