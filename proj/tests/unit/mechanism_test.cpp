#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "../support.hpp"
#include "opm/mechanism.hpp"

using namespace opm;
using opm::testing::Injected;
using opm::testing::Make;
using opm::testing::U;

namespace {

// Straightforward quadratic restatement of steps 4a-4d: rescans sigma_E from
// the front on every step and recomputes every target after every arrival.
struct NaiveResult {
  std::vector<std::pair<UserRef, SlotRef>> trades;
  std::vector<Money> charges, receipts, targets;
  std::vector<std::pair<std::size_t, std::size_t>> open_after;  // (users, slots) per arrival
};

NaiveResult NaiveRun(const Instance& inst, const ReportProfile& rep, const Thresholds& th,
                     const std::vector<EntityId>& order, std::size_t t) {
  NaiveResult res;
  res.charges.assign(rep.advertisers.size(), Money());
  res.receipts.assign(rep.mediators.size(), Money());
  res.targets.assign(rep.mediators.size(), Money());
  std::vector<std::vector<bool>> user_used(rep.mediators.size());
  for (std::size_t m = 0; m < rep.mediators.size(); ++m) user_used[m].assign(rep.mediators[m].users.size(), false);
  std::vector<std::uint32_t> slot_used(rep.advertisers.size(), 0);
  std::vector<EntityId> sigma;

  auto open_user = [&](std::uint32_t m) -> std::optional<std::uint32_t> {
    std::optional<std::uint32_t> best;
    for (std::uint32_t i = 0; i < rep.mediators[m].users.size(); ++i) {
      if (user_used[m][i] || !th.user_assignable(UserKey(inst, rep, {m, i}))) continue;
      if (!best || UserKey(inst, rep, {m, i}) < UserKey(inst, rep, {m, *best})) best = i;
    }
    return best;
  };
  auto open_slot = [&](std::uint32_t a) -> std::optional<std::uint32_t> {
    for (std::uint32_t s = slot_used[a]; s < rep.advertisers[a].capacity; ++s)
      if (th.slot_assignable(SlotKey(inst, rep, {a, s}))) return s;
    return std::nullopt;
  };
  auto trade = [&](std::uint32_t m, std::uint32_t u, std::uint32_t a, std::uint32_t s) {
    user_used[m][u] = true;
    slot_used[a] = s + 1;
    res.trades.push_back({{m, u}, {a, s}});
    res.charges[a] += th.slot->amount;
    res.receipts[m] += th.user->amount;
  };

  for (std::size_t i = t; i < order.size(); ++i) {
    const EntityId e = order[i];
    sigma.push_back(e);
    for (;;) {
      bool done = true;
      if (e.is_mediator()) {
        auto u = open_user(e.index);
        if (!u) break;
        for (EntityId x : sigma)
          if (!x.is_mediator())
            if (auto s = open_slot(x.index)) {
              trade(e.index, *u, x.index, *s);
              done = false;
              break;
            }
      } else {
        auto s = open_slot(e.index);
        if (!s) break;
        for (EntityId x : sigma)
          if (x.is_mediator())
            if (auto u = open_user(x.index)) {
              trade(x.index, *u, e.index, *s);
              done = false;
              break;
            }
      }
      if (done) break;
    }
    std::size_t ou = 0, os = 0;
    for (EntityId x : sigma) {
      if (x.is_mediator()) {
        bool any = false;
        for (std::uint32_t k = 0; k < rep.mediators[x.index].users.size(); ++k) {
          if (user_used[x.index][k]) any = true;
          else if (th.user_assignable(UserKey(inst, rep, {x.index, k}))) ++ou;
        }
        if (any) {
          auto u = open_user(x.index);
          res.targets[x.index] = u ? rep.mediators[x.index].users[*u].cost : th.user->amount;
        }
      } else {
        for (std::uint32_t s = slot_used[x.index]; s < rep.advertisers[x.index].capacity; ++s)
          os += th.slot_assignable(SlotKey(inst, rep, {x.index, s}));
      }
    }
    res.open_after.push_back({ou, os});
  }
  return res;
}

MechanismConfig Forced(Thresholds th, std::vector<EntityId> order, std::size_t t) {
  MechanismConfig cfg;
  cfg.alpha = Ratio::Of(1, 1000);
  cfg.r = Ratio::Of(1, 2);
  cfg.threshold_override = std::move(th);
  cfg.forced_arrival_order = std::move(order);
  cfg.forced_observation_count = t;
  return cfg;
}

}  // namespace

TEST_CASE("worked example with injected thresholds") {
  const Instance inst = opm::testing::WorkedInstance();
  const auto rep = ReportProfile::Truthful(inst);
  const auto out = RunMechanism(inst, rep, opm::testing::WorkedConfig());
  CHECK(out.used_overrides);
  REQUIRE(out.trades.size() == 2);
  CHECK(out.trades[0].user == UserRef{0, 0});
  CHECK(out.trades[1].user == UserRef{0, 1});
  CHECK(out.trades[0].slot == SlotRef{0, 0});
  CHECK(out.trades[1].slot == SlotRef{0, 1});
  for (const Trade& t : out.trades) {
    CHECK(t.charge == U(6));
    CHECK(t.payment == U(4));
    CHECK(t.event == 1);
  }
  CHECK(out.charges[0] == U(12));
  CHECK(out.receipts[0] == U(8));
  CHECK(out.targets[0] == U(4));
  REQUIRE(out.target_updates.size() == 2);
  CHECK(out.target_updates[0].target == U(3));
  CHECK(out.target_updates[1].target == U(4));
  CHECK(out.target_updates[0].seq > out.trades[0].seq);
  CHECK(out.target_updates[0].seq < out.trades[1].seq);
  CHECK(out.events.size() == 2);
  CHECK(out.events[0].trades_end == 0);  // m0 finds no advertiser yet

  const Snapshot first = SnapshotAfter(out, rep, 1);
  CHECK(first.charges[0] == Money());
  const Snapshot last = SnapshotAfter(out, rep, 2);
  CHECK(last.user_targets[0] == std::vector<Money>{U(4), U(4), Money()});
  CHECK(last.slots_filled[0] == 2);

  // Same forced run twice: bit-exact.
  CHECK(RunMechanism(inst, rep, opm::testing::WorkedConfig()) == out);
}

TEST_CASE("degenerate runs produce the empty assignment") {
  const Instance inst = opm::testing::WorkedInstance();
  const auto rep = ReportProfile::Truthful(inst);
  SUBCASE("dummy thresholds") {
    auto cfg = opm::testing::WorkedConfig();
    cfg.threshold_override = Thresholds::Dummy();
    const auto out = RunMechanism(inst, rep, cfg);
    CHECK(out.trades.empty());
    CHECK(out.target_updates.empty());
    CHECK(out.events.size() == 2);
  }
  SUBCASE("everyone observed") {
    auto cfg = opm::testing::WorkedConfig();
    cfg.forced_observation_count = 2;
    const auto out = RunMechanism(inst, rep, cfg);
    CHECK(out.trades.empty());
    CHECK(out.events.empty());
    CHECK(out.charges[0] == Money());
  }
}

TEST_CASE("thresholds from the observed sub-market") {
  const Instance inst = Make({{2, 5}}, {{2, 7}});
  const auto rep = ReportProfile::Truthful(inst);
  const std::uint32_t m[] = {0}, a[] = {0};
  const auto res = ComputeThresholds(inst, rep, m, a, Ratio::Of(1, 2), Ratio::Of(1, 1000));
  CHECK(res.observed_canonical_size == 2);
  REQUIRE_FALSE(res.thresholds.dummy());
  CHECK(res.thresholds.user->amount == U(5));
  CHECK(res.thresholds.slot->amount == U(7));
  CHECK(res.thresholds.slot->within == 0);  // slots sort by decreasing key

  CHECK(ComputeThresholds(inst, rep, m, a, Ratio::Of(1, 2), Ratio::Of(1, 2)).thresholds.dummy());
  CHECK(ComputeThresholds(inst, rep, {}, a, Ratio::Of(1, 2), Ratio::Of(1, 1000)).thresholds.dummy());
}

TEST_CASE("thresholds ignore reports of entities that were not observed") {
  Rng rng(77);
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    const Instance inst = opm::testing::RandomSmall(rng, 8, 3, 8, 3, 20);
    auto rep = ReportProfile::Truthful(inst);
    MechanismConfig cfg;
    cfg.alpha = Ratio::Of(1, 1000);
    cfg.seed = rng.Next();
    const auto base = RunMechanism(inst, rep, cfg);
    const std::size_t t = base.observation_count;
    if (t == base.arrival_order.size()) continue;
    const EntityId late = base.arrival_order[t];
    if (late.is_mediator()) {
      rep.mediators[late.index].users.push_back({U(0), std::nullopt});
      rep.mediators[late.index].users[0].cost = U(99);
    } else {
      rep.advertisers[late.index] = {5, U(50)};
    }
    const auto other = RunMechanism(inst, rep, cfg);
    CHECK(other.thresholds == base.thresholds);
    CHECK(other.arrival_order == base.arrival_order);
    CHECK(other.observation_count == t);
    ++compared;
  }
  CHECK(compared > 100);
}

TEST_CASE("engine agrees with the naive restatement") {
  Rng rng(31337);
  for (int i = 0; i < 3000; ++i) {
    const Instance inst = opm::testing::RandomSmall(rng, 6, 4, 6, 4, 10);
    ReportProfile rep = ReportProfile::Truthful(inst);
    if (rng.Below(3) == 0 && !rep.mediators.empty()) {
      // fabricated or dropped entries are legal reports
      auto& users = rep.mediators[rng.Below(rep.mediators.size())].users;
      if (rng.Below(2) == 0) users.push_back({U(rng.Between(0, 10)), std::nullopt});
      else if (!users.empty()) users.pop_back();
    }
    std::vector<EntityId> order;
    for (std::uint32_t m = 0; m < inst.mediators().size(); ++m) order.push_back(EntityId::Mediator(m));
    for (std::uint32_t a = 0; a < inst.advertisers().size(); ++a) order.push_back(EntityId::Advertiser(a));
    rng.Shuffle(order);
    const std::size_t t = static_cast<std::size_t>(rng.Between(0, static_cast<std::int64_t>(order.size()) / 2));
    const std::uint32_t ur = static_cast<std::uint32_t>(rng.Between(0, static_cast<std::int64_t>(order.size())));
    Thresholds th{TieKey{U(rng.Between(0, 10)), ur, static_cast<std::uint32_t>(rng.Below(3))},
                  TieKey{U(rng.Between(0, 10)), kInjectedRank, 0}};

    const auto out = RunMechanism(inst, rep, Forced(th, order, t));
    const auto naive = NaiveRun(inst, rep, th, order, t);
    REQUIRE(out.trades.size() == naive.trades.size());
    for (std::size_t k = 0; k < naive.trades.size(); ++k) {
      CHECK(out.trades[k].user == naive.trades[k].first);
      CHECK(out.trades[k].slot == naive.trades[k].second);
    }
    CHECK(out.charges == naive.charges);
    CHECK(out.receipts == naive.receipts);
    CHECK(out.targets == naive.targets);
  }
}

TEST_CASE("state invariants after every arrival") {
  Rng rng(4242);
  for (int i = 0; i < 500; ++i) {
    const Instance inst = opm::testing::RandomSmall(rng, 6, 4, 6, 4, 10);
    const auto rep = ReportProfile::Truthful(inst);
    const Thresholds th{Injected(rng.Between(1, 8)), Injected(rng.Between(1, 8))};
    MechanismState state(inst, rep, th);
    std::vector<EntityId> order;
    for (std::uint32_t m = 0; m < inst.mediators().size(); ++m) order.push_back(EntityId::Mediator(m));
    for (std::uint32_t a = 0; a < inst.advertisers().size(); ++a) order.push_back(EntityId::Advertiser(a));
    rng.Shuffle(order);
    const auto naive = NaiveRun(inst, rep, th, order, 0);
    std::vector<Money> last(inst.mediators().size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      state.ProcessArrival(order[k]);
      CHECK((state.open_users() == 0 || state.open_slots() == 0));
      CHECK(state.open_users() == naive.open_after[k].first);
      CHECK(state.open_slots() == naive.open_after[k].second);
      CHECK(state.RecomputeAllTargets() == state.targets());
      for (std::size_t m = 0; m < last.size(); ++m) {
        CHECK(state.targets()[m] >= last[m]);
        last[m] = state.targets()[m];
      }
    }
    CHECK_THROWS_AS(state.ProcessArrival(order[0]), std::logic_error);
    CHECK_THROWS_AS(state.Observe(order[0]), std::logic_error);
  }
}

TEST_CASE("seeded runs are reproducible and differ across seeds") {
  Rng rng(8);
  const Instance inst = opm::testing::RandomSmall(rng, 20, 3, 20, 3, 50);
  const auto rep = ReportProfile::Truthful(inst);
  MechanismConfig cfg;
  cfg.alpha = Ratio::Of(1, 100000);
  cfg.seed = 5;
  const auto a = RunMechanism(inst, rep, cfg);
  CHECK(a == RunMechanism(inst, rep, cfg));
  CHECK_FALSE(a.used_overrides);
  CHECK(a.r == DeriveR(cfg.alpha));
  cfg.seed = 6;
  CHECK(RunMechanism(inst, rep, cfg).arrival_order != a.arrival_order);
}

TEST_CASE("invalid configs are rejected") {
  const Instance inst = opm::testing::WorkedInstance();
  const auto rep = ReportProfile::Truthful(inst);
  auto cfg = opm::testing::WorkedConfig();
  auto bad = cfg;
  bad.alpha = Ratio::Of(2, 1);
  CHECK_THROWS_AS(RunMechanism(inst, rep, bad), std::invalid_argument);
  bad = cfg;
  bad.forced_observation_count = 3;
  CHECK_THROWS_AS(RunMechanism(inst, rep, bad), std::invalid_argument);
  bad = cfg;
  bad.forced_arrival_order = std::vector<EntityId>{EntityId::Mediator(0), EntityId::Mediator(0)};
  CHECK_THROWS_AS(RunMechanism(inst, rep, bad), std::invalid_argument);
  bad = cfg;
  bad.threshold_override = Thresholds{Injected(4), std::nullopt};
  CHECK_THROWS_AS(RunMechanism(inst, rep, bad), std::invalid_argument);
  ReportProfile short_rep = rep;
  short_rep.advertisers.clear();
  CHECK_THROWS_AS(RunMechanism(inst, short_rep, cfg), std::invalid_argument);
}
