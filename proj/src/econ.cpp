#include "opm/econ.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace opm {

std::string PlayerName(const Player& p) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UserPlayer>)
          return "user m" + std::to_string(v.mediator) + "." + std::to_string(v.user);
        else if constexpr (std::is_same_v<T, MediatorPlayer>)
          return "mediator m" + std::to_string(v.mediator);
        else
          return "advertiser a" + std::to_string(v.advertiser);
      },
      p);
}

bool AtLeast(const Utility& a, const Utility& b) {
  if (b.infeasible) return true;
  if (a.infeasible) return false;
  return a.value >= b.value;
}

namespace {

// Ledger accumulated event by event, with utility queries against the truth.
class Books {
 public:
  Books(const MechanismOutcome& outcome, const Instance& instance, const ReportProfile& reports)
      : outcome_(outcome),
        instance_(instance),
        reports_(reports),
        charges_(reports.advertisers.size()),
        receipts_(reports.mediators.size()),
        targets_(reports.mediators.size()),
        filled_(reports.advertisers.size(), 0),
        assigned_entries_(reports.mediators.size()) {
    for (std::size_t m = 0; m < reports.mediators.size(); ++m)
      assigned_flag_.emplace_back(reports.mediators[m].users.size(), false);
  }

  void Apply(std::size_t event) {
    const EventRecord& e = outcome_.events.at(event);
    for (std::uint32_t i = e.trades_begin; i < e.trades_end; ++i) {
      const Trade& t = outcome_.trades[i];
      charges_[t.slot.advertiser] += t.charge;
      receipts_[t.user.mediator] += t.payment;
      ++filled_[t.slot.advertiser];
      assigned_entries_[t.user.mediator].push_back(t.user.user);
      assigned_flag_[t.user.mediator][t.user.user] = true;
    }
    for (std::uint32_t i = e.updates_begin; i < e.updates_end; ++i)
      targets_[outcome_.target_updates[i].mediator] = outcome_.target_updates[i].target;
  }

  Utility Of(const Player& player) const {
    return std::visit([this](const auto& p) { return Eval(p); }, player);
  }

 private:
  Utility Eval(const UserPlayer& p) const {
    CheckMediator(p.mediator);
    if (p.user >= instance_.mediators()[p.mediator].user_costs.size())
      throw std::out_of_range("unknown user");
    const auto& entries = reports_.mediators[p.mediator].users;
    for (std::size_t j = 0; j < entries.size(); ++j)
      if (entries[j].backing == p.user) {
        if (!assigned_flag_[p.mediator][j]) return {};
        return {targets_[p.mediator] - instance_.mediators()[p.mediator].user_costs[p.user]};
      }
    return {};
  }

  Utility Eval(const MediatorPlayer& p) const {
    CheckMediator(p.mediator);
    const auto& true_costs = instance_.mediators()[p.mediator].user_costs;
    const auto& entries = reports_.mediators[p.mediator].users;
    std::vector<bool> delivered(true_costs.size(), false);
    std::size_t unfilled = 0;
    Money cost;
    for (std::uint32_t j : assigned_entries_[p.mediator]) {
      const auto& b = entries[j].backing;
      if (b && *b < true_costs.size() && !delivered[*b]) {
        delivered[*b] = true;
        cost += true_costs[*b];
      } else {
        ++unfilled;
      }
    }
    if (unfilled > 0) {
      std::vector<std::uint32_t> spare;
      for (std::uint32_t i = 0; i < true_costs.size(); ++i)
        if (!delivered[i]) spare.push_back(i);
      if (spare.size() < unfilled) return {Money(), true};
      std::stable_sort(spare.begin(), spare.end(), [&](std::uint32_t x, std::uint32_t y) {
        return true_costs[x] < true_costs[y];
      });
      for (std::size_t i = 0; i < unfilled; ++i) cost += true_costs[spare[i]];
    }
    return {receipts_[p.mediator] - cost};
  }

  Utility Eval(const AdvertiserPlayer& p) const {
    if (p.advertiser >= instance_.advertisers().size()) throw std::out_of_range("unknown advertiser");
    const auto& truth = instance_.advertisers()[p.advertiser];
    const std::int64_t useful = std::min<std::int64_t>(filled_[p.advertiser], truth.capacity);
    return {truth.value * useful - charges_[p.advertiser]};
  }

  void CheckMediator(std::uint32_t m) const {
    if (m >= instance_.mediators().size()) throw std::out_of_range("unknown mediator");
  }

  const MechanismOutcome& outcome_;
  const Instance& instance_;
  const ReportProfile& reports_;
  std::vector<Money> charges_, receipts_, targets_;
  std::vector<std::uint32_t> filled_;
  std::vector<std::vector<std::uint32_t>> assigned_entries_;
  std::vector<std::vector<bool>> assigned_flag_;
};

}  // namespace

Utility UtilityAfter(const MechanismOutcome& outcome, const Instance& instance,
                     const ReportProfile& reports, const Player& player,
                     std::size_t events_applied) {
  Books books(outcome, instance, reports);
  const std::size_t n = std::min(events_applied, outcome.events.size());
  for (std::size_t e = 0; e < n; ++e) books.Apply(e);
  return books.Of(player);
}

UtilityTrajectory ComputeTrajectory(const MechanismOutcome& outcome, const Instance& instance,
                                    const ReportProfile& reports, const Player& player) {
  UtilityTrajectory tr{player, {}};
  Books books(outcome, instance, reports);
  tr.series.reserve(outcome.events.size() + 1);
  tr.series.push_back(books.Of(player));
  for (std::size_t e = 0; e < outcome.events.size(); ++e) {
    books.Apply(e);
    tr.series.push_back(books.Of(player));
  }
  return tr;
}

IrVerdict CheckContinuousIR(const UtilityTrajectory& trajectory) {
  const auto& s = trajectory.series;
  if (s.empty()) return {};
  if (s[0].infeasible || s[0].value != Money()) return {false, 0};
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!AtLeast(s[i], s[i - 1])) return {false, i};
  return {};
}

IrSweepResult CheckAllContinuousIR(const MechanismOutcome& outcome, const Instance& instance,
                                   const ReportProfile& reports) {
  IrSweepResult result;
  Books books(outcome, instance, reports);
  std::vector<Utility> mediator_prev(instance.mediators().size());
  std::vector<std::vector<Utility>> user_prev(instance.mediators().size());
  for (std::size_t m = 0; m < instance.mediators().size(); ++m)
    user_prev[m].resize(instance.mediators()[m].user_costs.size());
  std::vector<Utility> advertiser_prev(instance.advertisers().size());
  result.players_checked = instance.mediators().size() + instance.advertisers().size() +
                           instance.user_count();

  auto check = [&](const Player& p, Utility& prev, std::size_t event) {
    Utility now = books.Of(p);
    if (!AtLeast(now, prev))
      result.violations.push_back(PlayerName(p) + " utility fell from " + prev.value.ToString() +
                                  " to " + now.value.ToString() + " at arrival " +
                                  std::to_string(event + 1));
    prev = now;
  };

  std::vector<std::uint32_t> touched_m, touched_a;
  for (std::size_t e = 0; e < outcome.events.size(); ++e) {
    books.Apply(e);
    const EventRecord& rec = outcome.events[e];
    touched_m.clear();
    touched_a.clear();
    for (std::uint32_t i = rec.trades_begin; i < rec.trades_end; ++i) {
      touched_m.push_back(outcome.trades[i].user.mediator);
      touched_a.push_back(outcome.trades[i].slot.advertiser);
    }
    for (std::uint32_t i = rec.updates_begin; i < rec.updates_end; ++i)
      touched_m.push_back(outcome.target_updates[i].mediator);
    std::sort(touched_m.begin(), touched_m.end());
    touched_m.erase(std::unique(touched_m.begin(), touched_m.end()), touched_m.end());
    std::sort(touched_a.begin(), touched_a.end());
    touched_a.erase(std::unique(touched_a.begin(), touched_a.end()), touched_a.end());
    for (std::uint32_t m : touched_m) {
      check(MediatorPlayer{m}, mediator_prev[m], e);
      for (std::uint32_t u = 0; u < user_prev[m].size(); ++u) check(UserPlayer{m, u}, user_prev[m][u], e);
    }
    for (std::uint32_t a : touched_a) check(AdvertiserPlayer{a}, advertiser_prev[a], e);
  }
  return result;
}

AuditReport CheckBudgetBalance(const MechanismOutcome& outcome, const ReportProfile& reports) {
  AuditReport report;
  for (const Trade& t : outcome.trades) {
    report.total_charges += t.charge;
    report.total_payments += t.payment;
    if (t.payment > t.charge || !(t.payment_key < t.charge_key))
      report.violations.push_back("trade at seq " + std::to_string(t.seq) + " charges " +
                                  t.charge.ToString() + " but pays " + t.payment.ToString() +
                                  " (charge key not above payment key)");
  }
  if (report.total_charges < report.total_payments)
    report.violations.push_back("total charges " + report.total_charges.ToString() +
                                " below total payments " + report.total_payments.ToString());

  // Replay trades and updates in sequence order.
  const std::size_t n_med = reports.mediators.size();
  std::vector<Money> receipts(n_med), target(n_med);
  std::vector<std::int64_t> assigned(n_med, 0);
  std::size_t ti = 0, ui = 0;
  while (ti < outcome.trades.size() || ui < outcome.target_updates.size()) {
    std::uint32_t m;
    const bool take_trade =
        ui == outcome.target_updates.size() ||
        (ti < outcome.trades.size() && outcome.trades[ti].seq < outcome.target_updates[ui].seq);
    if (take_trade) {
      const Trade& t = outcome.trades[ti++];
      m = t.user.mediator;
      receipts[m] += t.payment;
      ++assigned[m];
    } else {
      const TargetUpdate& u = outcome.target_updates[ui++];
      m = u.mediator;
      target[m] = u.target;
    }
    if (target[m] * assigned[m] > receipts[m])
      report.violations.push_back("mediator m" + std::to_string(m) + " owes " +
                                  (target[m] * assigned[m]).ToString() + " to users but received " +
                                  receipts[m].ToString());
  }
  return report;
}

AuditReport CheckSurplusInvariant(const MechanismOutcome& outcome, const Instance& instance,
                                  const ReportProfile& reports) {
  AuditReport report;
  std::vector<std::int64_t> open_users_of(reports.mediators.size(), 0);
  std::vector<std::int64_t> open_slots_of(reports.advertisers.size(), 0);
  std::int64_t open_users = 0, open_slots = 0;
  for (std::size_t e = 0; e < outcome.events.size(); ++e) {
    const EventRecord& rec = outcome.events[e];
    const EntityId id = rec.entity;
    if (id.is_mediator()) {
      std::int64_t n = 0;
      for (std::uint32_t i = 0; i < reports.mediators[id.index].users.size(); ++i)
        n += outcome.thresholds.user_assignable(UserKey(instance, reports, {id.index, i}));
      open_users_of[id.index] = n;
      open_users += n;
    } else {
      std::int64_t n = 0;
      for (std::uint32_t s = 0; s < reports.advertisers[id.index].capacity; ++s)
        n += outcome.thresholds.slot_assignable(SlotKey(instance, reports, {id.index, s}));
      open_slots_of[id.index] = n;
      open_slots += n;
    }
    for (std::uint32_t i = rec.trades_begin; i < rec.trades_end; ++i) {
      const Trade& t = outcome.trades[i];
      if (!outcome.thresholds.user_assignable(UserKey(instance, reports, t.user)) ||
          !outcome.thresholds.slot_assignable(SlotKey(instance, reports, t.slot))) {
        report.violations.push_back("trade at seq " + std::to_string(t.seq) +
                                    " uses a non-assignable user or slot");
        continue;
      }
      --open_users_of[t.user.mediator];
      --open_slots_of[t.slot.advertiser];
      --open_users;
      --open_slots;
    }
    if (open_users > 0 && open_slots > 0)
      report.violations.push_back("after arrival " + std::to_string(e + 1) + " (" + id.ToString() +
                                  "): " + std::to_string(open_users) + " assignable users and " +
                                  std::to_string(open_slots) + " assignable slots both unassigned");
  }
  return report;
}

AuditReport CheckOnlineLegality(const MechanismOutcome& outcome, const ReportProfile& reports) {
  AuditReport report;
  std::vector<int> mediator_arrival(reports.mediators.size(), -1);
  std::vector<int> advertiser_arrival(reports.advertisers.size(), -1);
  for (std::size_t e = 0; e < outcome.events.size(); ++e) {
    const EntityId id = outcome.events[e].entity;
    (id.is_mediator() ? mediator_arrival : advertiser_arrival)[id.index] = static_cast<int>(e);
  }
  std::set<UserRef> users;
  std::set<SlotRef> slots;
  for (std::size_t e = 0; e < outcome.events.size(); ++e) {
    const EventRecord& rec = outcome.events[e];
    for (std::uint32_t i = rec.trades_begin; i < rec.trades_end; ++i) {
      const Trade& t = outcome.trades[i];
      const int m_at = mediator_arrival[t.user.mediator];
      const int a_at = advertiser_arrival[t.slot.advertiser];
      const std::string where = "trade at seq " + std::to_string(t.seq);
      if (t.event != e) report.violations.push_back(where + " filed under the wrong event");
      if (m_at < 0 || a_at < 0) {
        report.violations.push_back(where + " involves an observed entity");
        continue;
      }
      const bool user_side = rec.entity == EntityId::Mediator(t.user.mediator);
      const bool slot_side = rec.entity == EntityId::Advertiser(t.slot.advertiser);
      // The counterpart must already be in sigma_E.
      if (user_side == slot_side || (user_side && a_at >= static_cast<int>(e)) ||
          (slot_side && m_at >= static_cast<int>(e)))
        report.violations.push_back(where + " does not pair the new arrival with an earlier entity");
      if (!users.insert(t.user).second) report.violations.push_back(where + " reuses a user");
      if (!slots.insert(t.slot).second) report.violations.push_back(where + " reuses a slot");
    }
  }
  return report;
}

ReportProfile ApplyDeviation(const ReportProfile& base, const DeviationCase& deviation) {
  ReportProfile out = base;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, UserPlayer>) {
          if (!deviation.misreport.user_cost) throw std::invalid_argument("user misreport without cost");
          for (auto& entry : out.mediators.at(p.mediator).users)
            if (entry.backing == p.user) entry.cost = *deviation.misreport.user_cost;
        } else if constexpr (std::is_same_v<T, MediatorPlayer>) {
          if (!deviation.misreport.mediator) throw std::invalid_argument("mediator misreport missing");
          out.mediators.at(p.mediator) = *deviation.misreport.mediator;
        } else {
          if (!deviation.misreport.advertiser) throw std::invalid_argument("advertiser misreport missing");
          out.advertisers.at(p.advertiser) = *deviation.misreport.advertiser;
        }
      },
      deviation.player);
  return out;
}

namespace {

Money Half(Money m) { return Money::FromMicros(m.micros() / 2); }
constexpr Money kExtremeHigh = Money::Units(1'000'000);
constexpr Money kMicro = Money::FromMicros(1);

// Keeps the first occurrence of each distinct misreport, drops the truth.
template <typename Key>
void AddUnique(std::vector<Misreport>& out, std::vector<Key>& seen, const Key& truth, Key key,
               Misreport m) {
  if (key == truth || std::find(seen.begin(), seen.end(), key) != seen.end()) return;
  seen.push_back(key);
  out.push_back(std::move(m));
}

std::vector<Misreport> UserCandidates(Money truth, const std::vector<Money>& hints, Rng& rng,
                                      std::size_t& structural) {
  std::vector<Misreport> out;
  std::vector<Money> seen;
  auto add = [&](Money c, std::string label) {
    if (c < Money()) return;
    Misreport m;
    m.label = std::move(label);
    m.user_cost = c;
    AddUnique(out, seen, truth, c, std::move(m));
  };
  add(Money(), "zero");
  add(truth * 2, "double");
  add(truth + kGridStep, "+1 step");
  add(truth - kGridStep, "-1 step");
  add(Half(truth), "half");
  add(truth + kGridStep * 2, "+2 steps");
  add(truth - kGridStep * 2, "-2 steps");
  add(kExtremeHigh, "extreme high");
  add(kMicro, "extreme low");
  structural = out.size();
  for (Money h : hints) {
    add(h, "hint");
    add(h + kMicro, "hint+");
    add(h - kMicro, "hint-");
  }
  (void)rng;
  return out;
}

std::vector<Misreport> AdvertiserCandidates(const AdvertiserSpec& truth,
                                            const std::vector<Money>& hints, std::size_t& structural) {
  std::vector<Misreport> out;
  std::vector<std::pair<std::uint32_t, Money>> seen;
  const std::pair<std::uint32_t, Money> t{truth.capacity, truth.value};
  auto add = [&](std::uint32_t cap, Money v, std::string label) {
    if (v < Money()) return;
    Misreport m;
    m.label = std::move(label);
    m.advertiser = AdvertiserReport{cap, v};
    AddUnique(out, seen, t, {cap, v}, std::move(m));
  };
  const std::uint32_t u = truth.capacity;
  const Money v = truth.value;
  add(u, v * 2, "value x2");
  if (u > 0) add(u - 1, v, "capacity -1");
  add(u + 1, v, "capacity +1");
  add(u, Half(v), "value x1/2");
  add(u, Money(), "value 0");
  add(0, v, "capacity 0");
  add(u * 2, v, "capacity x2");
  add(u, v + kGridStep, "value +1 step");
  add(u, v - kGridStep, "value -1 step");
  add(u, kExtremeHigh, "value extreme");
  add(u * 2, v * 2, "both x2");
  structural = out.size();
  for (Money h : hints) {
    add(u, h, "hint");
    add(u, h + kMicro, "hint+");
    add(u, h - kMicro, "hint-");
  }
  return out;
}

std::vector<Misreport> MediatorCandidates(const MediatorSpec& truth, const std::vector<Money>& hints,
                                          Rng& rng, std::size_t& structural) {
  MediatorReport base;
  for (std::uint32_t i = 0; i < truth.user_costs.size(); ++i) base.users.push_back({truth.user_costs[i], i});
  std::vector<Misreport> out;
  std::vector<MediatorReport> seen;
  auto add = [&](MediatorReport r, std::string label) {
    for (const auto& e : r.users)
      if (e.cost < Money()) return;
    Misreport m;
    m.label = std::move(label);
    m.mediator = r;
    AddUnique(out, seen, base, std::move(r), std::move(m));
  };
  const std::size_t n = base.users.size();
  Money lo = kExtremeHigh, hi;
  for (Money c : truth.user_costs) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  if (n == 0) lo = Money::Units(1);

  for (std::size_t i = 0; i < n; ++i) {
    MediatorReport r = base;
    r.users.erase(r.users.begin() + static_cast<std::ptrdiff_t>(i));
    add(std::move(r), "drop user " + std::to_string(i));
  }
  {
    MediatorReport r = base;
    r.users.push_back({Half(lo), std::nullopt});
    add(std::move(r), "fake cheap user");
    r = base;
    r.users.push_back({hi * 2 + kGridStep, std::nullopt});
    add(std::move(r), "fake expensive user");
    r = base;
    r.users.push_back({Money(), std::nullopt});
    add(std::move(r), "fake free user");
  }
  if (n > 0) {
    MediatorReport r = base;
    r.users.push_back(base.users[0]);
    add(std::move(r), "duplicate user 0");
  }
  {
    MediatorReport r = base;
    std::reverse(r.users.begin(), r.users.end());
    add(std::move(r), "reverse");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Money c = base.users[i].cost;
    const std::pair<Money, const char*> edits[] = {{c - kGridStep, "-1 step"},
                                                   {c + kGridStep, "+1 step"},
                                                   {c * 2, "x2"},
                                                   {Half(c), "x1/2"},
                                                   {Money(), "zero"}};
    for (const auto& [v, what] : edits) {
      MediatorReport r = base;
      r.users[i].cost = v;
      add(std::move(r), "user " + std::to_string(i) + " " + what);
    }
  }
  {
    MediatorReport r = base;
    for (auto& e : r.users) e.cost += kGridStep;
    add(std::move(r), "all +1 step");
    r = base;
    for (auto& e : r.users) e.cost = e.cost * 2;
    add(std::move(r), "all x2");
  }
  structural = out.size();
  for (Money h : hints) {
    if (n == 0) break;
    const std::size_t i = static_cast<std::size_t>(rng.Below(n));
    for (Money v : {h, h + kMicro, h - kMicro}) {
      MediatorReport r = base;
      r.users[i].cost = v;
      add(std::move(r), "user " + std::to_string(i) + " at hint");
    }
  }
  for (int k = 0; k < 3 && n > 1; ++k) {
    MediatorReport r = base;
    rng.Shuffle(r.users);
    add(std::move(r), "shuffle");
  }
  return out;
}

Misreport RandomMisreport(const Player& player, const Instance& truth, Money ceiling, Rng& rng) {
  Misreport m;
  m.label = "random";
  const std::int64_t top = std::max<std::int64_t>(ceiling.micros(), Money::kScale);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, UserPlayer>) {
          m.user_cost = Money::FromMicros(rng.Between(0, top));
        } else if constexpr (std::is_same_v<T, MediatorPlayer>) {
          MediatorReport r;
          const auto& costs = truth.mediators()[p.mediator].user_costs;
          for (std::uint32_t i = 0; i < costs.size(); ++i)
            if (rng.Below(4) != 0) r.users.push_back({Money::FromMicros(rng.Between(0, top)), i});
          if (rng.Below(3) == 0) r.users.push_back({Money::FromMicros(rng.Between(0, top)), std::nullopt});
          rng.Shuffle(r.users);
          m.mediator = std::move(r);
        } else {
          const auto& a = truth.advertisers()[p.advertiser];
          m.advertiser = AdvertiserReport{static_cast<std::uint32_t>(rng.Between(0, 2 * a.capacity)),
                                          Money::FromMicros(rng.Between(0, top))};
        }
      },
      player);
  return m;
}

}  // namespace

std::vector<DeviationCase> GenerateMisreports(const Player& player, const Instance& truth,
                                              const std::vector<Money>& hints, Rng& rng,
                                              std::size_t k) {
  std::size_t structural = 0;
  std::vector<Misreport> candidates = std::visit(
      [&](const auto& p) -> std::vector<Misreport> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, UserPlayer>)
          return UserCandidates(truth.mediators().at(p.mediator).user_costs.at(p.user), hints, rng,
                                structural);
        else if constexpr (std::is_same_v<T, MediatorPlayer>)
          return MediatorCandidates(truth.mediators().at(p.mediator), hints, rng, structural);
        else
          return AdvertiserCandidates(truth.advertisers().at(p.advertiser), hints, structural);
      },
      player);

  std::vector<Misreport> chosen;
  if (candidates.size() <= k) {
    chosen = std::move(candidates);
  } else {
    // Structural cases first, then a seeded sample of the rest.
    const std::size_t keep = std::min(structural, k);
    chosen.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep));
    std::vector<Misreport> rest(candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end());
    rng.Shuffle(rest);
    for (std::size_t i = 0; chosen.size() < k; ++i) chosen.push_back(std::move(rest[i]));
  }
  Money ceiling;
  for (Money h : hints) ceiling = std::max(ceiling, h);
  ceiling = ceiling * 2;
  while (chosen.size() < k) chosen.push_back(RandomMisreport(player, truth, ceiling, rng));

  std::vector<DeviationCase> out;
  out.reserve(chosen.size());
  for (auto& m : chosen) out.push_back({player, std::move(m)});
  return out;
}

std::vector<DeviationVerdict> DeviationTest(const Instance& instance, const DeviationCase& deviation,
                                            const MechanismConfig& base,
                                            const std::vector<std::uint64_t>& seeds) {
  const ReportProfile truth = ReportProfile::Truthful(instance);
  const ReportProfile deviant = ApplyDeviation(truth, deviation);
  std::vector<DeviationVerdict> verdicts;
  verdicts.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    MechanismConfig cfg = base;
    cfg.seed = seed;
    const MechanismOutcome honest = RunMechanism(instance, truth, cfg);
    const MechanismOutcome lying = RunMechanism(instance, deviant, cfg);
    DeviationVerdict v;
    v.seed = seed;
    v.truthful = UtilityAfter(honest, instance, truth, deviation.player, honest.events.size());
    v.deviant = UtilityAfter(lying, instance, deviant, deviation.player, lying.events.size());
    v.pass = AtLeast(v.truthful, v.deviant);
    verdicts.push_back(v);
  }
  return verdicts;
}

}  // namespace opm
