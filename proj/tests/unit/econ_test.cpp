#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "../support.hpp"
#include "opm/econ.hpp"

using namespace opm;
using opm::testing::Injected;
using opm::testing::Make;
using opm::testing::U;

namespace {

std::vector<Money> Values(const UtilityTrajectory& t) {
  std::vector<Money> out;
  for (const auto& u : t.series) out.push_back(u.value);
  return out;
}

UtilityTrajectory Series(std::vector<std::int64_t> units) {
  UtilityTrajectory t{UserPlayer{}, {}};
  for (auto u : units) t.series.push_back({U(u)});
  return t;
}

}  // namespace

TEST_CASE("worked example utilities") {
  const Instance inst = opm::testing::WorkedInstance();
  const auto rep = ReportProfile::Truthful(inst);
  const auto out = RunMechanism(inst, rep, opm::testing::WorkedConfig());
  CHECK(Values(ComputeTrajectory(out, inst, rep, UserPlayer{0, 0})) == std::vector<Money>{U(0), U(0), U(3)});
  CHECK(Values(ComputeTrajectory(out, inst, rep, UserPlayer{0, 1})) == std::vector<Money>{U(0), U(0), U(1)});
  CHECK(Values(ComputeTrajectory(out, inst, rep, UserPlayer{0, 2})) == std::vector<Money>{U(0), U(0), U(0)});
  CHECK(Values(ComputeTrajectory(out, inst, rep, MediatorPlayer{0})) == std::vector<Money>{U(0), U(0), U(4)});
  CHECK(Values(ComputeTrajectory(out, inst, rep, AdvertiserPlayer{0})) == std::vector<Money>{U(0), U(0), U(2)});
  CHECK(UtilityAfter(out, inst, rep, MediatorPlayer{0}, 99).value == U(4));
  CHECK_THROWS_AS(UtilityAfter(out, inst, rep, AdvertiserPlayer{3}, 1), std::out_of_range);
  CHECK_THROWS_AS(UtilityAfter(out, inst, rep, UserPlayer{0, 3}, 1), std::out_of_range);

  const auto bb = CheckBudgetBalance(out, rep);
  CHECK(bb.ok());
  CHECK(bb.total_charges == U(12));
  CHECK(bb.total_payments == U(8));
  CHECK(CheckAllContinuousIR(out, inst, rep).ok());
  CHECK(CheckSurplusInvariant(out, inst, rep).ok());
  CHECK(CheckOnlineLegality(out, rep).ok());
}

TEST_CASE("continuous IR on series") {
  CHECK(CheckContinuousIR(Series({0, 0, 0})).pass);
  CHECK(CheckContinuousIR(Series({0, 3, 4})).pass);
  const auto v = CheckContinuousIR(Series({0, 2, 1}));
  CHECK_FALSE(v.pass);
  CHECK(v.first_violation == 2u);
  CHECK_FALSE(CheckContinuousIR(Series({1, 2})).pass);
  UtilityTrajectory fall{MediatorPlayer{}, {{}, {Money(), true}}};
  CHECK_FALSE(CheckContinuousIR(fall).pass);
}

TEST_CASE("empty outcome passes every audit") {
  const Instance inst = opm::testing::WorkedInstance();
  const auto rep = ReportProfile::Truthful(inst);
  MechanismOutcome empty;
  CHECK(CheckBudgetBalance(empty, rep).ok());
  CHECK(CheckSurplusInvariant(empty, inst, rep).ok());
  CHECK(CheckOnlineLegality(empty, rep).ok());
}

TEST_CASE("mediator fulfilment model") {
  const Instance inst = opm::testing::WorkedInstance();
  auto rep = ReportProfile::Truthful(inst);
  auto cfg = opm::testing::WorkedConfig();

  SUBCASE("a fabricated cheap user is filled by the cheapest undelivered real user") {
    rep.mediators[0].users = {{U(1), 0u}, {U(0), std::nullopt}, {U(3), 1u}};
    const auto out = RunMechanism(inst, rep, cfg);
    REQUIRE(out.trades.size() == 2);
    // entries 1 (cost 0) and 0 (cost 1) trade; the fake entry is served by true user 1 (cost 3)
    CHECK(UtilityAfter(out, inst, rep, MediatorPlayer{0}, 2).value == U(8) - U(1) - U(3));
  }
  SUBCASE("more assignments than real users is infeasible") {
    const Instance one = Make({{1}}, {{2, 7}});
    ReportProfile lie = ReportProfile::Truthful(one);
    lie.mediators[0].users.push_back({U(2), std::nullopt});
    const auto out = RunMechanism(one, lie, cfg);
    REQUIRE(out.trades.size() == 2);
    const auto u = UtilityAfter(out, one, lie, MediatorPlayer{0}, 2);
    CHECK(u.infeasible);
    CHECK(AtLeast(Utility{U(-100)}, u));
    CHECK_FALSE(AtLeast(u, Utility{U(-100)}));
  }
  SUBCASE("a dropped user earns nothing") {
    rep.mediators[0].users.erase(rep.mediators[0].users.begin());
    const auto out = RunMechanism(inst, rep, cfg);
    CHECK(UtilityAfter(out, inst, rep, UserPlayer{0, 0}, 2).value == Money());
  }
}

TEST_CASE("advertiser utility counts only true capacity") {
  const Instance inst = Make({{1, 2, 3}}, {{1, 9}});
  ReportProfile rep = ReportProfile::Truthful(inst);
  rep.advertisers[0].capacity = 3;
  auto cfg = opm::testing::WorkedConfig();
  const auto out = RunMechanism(inst, rep, cfg);
  REQUIRE(out.trades.size() == 3);
  CHECK(UtilityAfter(out, inst, rep, AdvertiserPlayer{0}, 2).value == U(9) - U(18));
}

TEST_CASE("budget audit catches the slot-price variant") {
  const Instance inst = opm::testing::WorkedInstance();
  const auto rep = ReportProfile::Truthful(inst);
  auto cfg = opm::testing::WorkedConfig();
  cfg.variant = EngineVariant::kPaySlotPrice;
  const auto out = RunMechanism(inst, rep, cfg);
  const auto bb = CheckBudgetBalance(out, rep);
  CHECK_FALSE(bb.ok());
  CHECK(bb.total_charges == bb.total_payments);
}

TEST_CASE("IR audit catches the skipped payment updates") {
  const Instance inst = opm::testing::WorkedInstance();
  const auto rep = ReportProfile::Truthful(inst);
  auto cfg = opm::testing::WorkedConfig();
  cfg.variant = EngineVariant::kSkipPaymentUpdates;
  const auto out = RunMechanism(inst, rep, cfg);
  CHECK(out.target_updates.empty());
  CHECK_FALSE(CheckAllContinuousIR(out, inst, rep).ok());
  CHECK_FALSE(CheckContinuousIR(ComputeTrajectory(out, inst, rep, UserPlayer{0, 0})).pass);
}

TEST_CASE("surplus audit catches a stalled market") {
  const Instance inst = opm::testing::WorkedInstance();
  const auto rep = ReportProfile::Truthful(inst);
  auto out = RunMechanism(inst, rep, opm::testing::WorkedConfig());
  out.trades.clear();
  out.target_updates.clear();
  for (auto& e : out.events) e = {e.entity, 0, 0, 0, 0};
  CHECK_FALSE(CheckSurplusInvariant(out, inst, rep).ok());
}

TEST_CASE("legality audit catches observed and repeated traders") {
  const Instance inst = Make({{1, 2}}, {{2, 7}});
  const auto rep = ReportProfile::Truthful(inst);
  auto cfg = opm::testing::WorkedConfig();
  auto out = RunMechanism(inst, rep, cfg);
  REQUIRE(out.trades.size() == 2);
  CHECK(CheckOnlineLegality(out, rep).ok());
  auto dup = out;
  dup.trades[1].user = dup.trades[0].user;
  CHECK_FALSE(CheckOnlineLegality(dup, rep).ok());
  auto early = out;
  early.events[0].trades_end = 1;  // m0 cannot trade before a0 arrives
  early.events[1].trades_begin = 1;
  early.trades[0].event = 0;
  CHECK_FALSE(CheckOnlineLegality(early, rep).ok());
  auto observed = out;
  observed.observation_count = 1;
  observed.events.erase(observed.events.begin());
  observed.trades[0].event = observed.trades[1].event = 0;
  CHECK_FALSE(CheckOnlineLegality(observed, rep).ok());
}

TEST_CASE("truthful audits hold on random markets") {
  Rng rng(99);
  for (int i = 0; i < 400; ++i) {
    const Instance inst = opm::testing::RandomSmall(rng, 10, 3, 10, 3, 30);
    const auto rep = ReportProfile::Truthful(inst);
    MechanismConfig cfg;
    cfg.alpha = Ratio::Of(1, 1000);
    cfg.seed = rng.Next();
    if (rng.Below(2)) {
      const auto c = rng.Between(5, 20);
      cfg.threshold_override = Thresholds{Injected(c), Injected(c + rng.Between(1, 5))};
    }
    const auto out = RunMechanism(inst, rep, cfg);
    CHECK(CheckBudgetBalance(out, rep).ok());
    CHECK(CheckAllContinuousIR(out, inst, rep).ok());
    CHECK(CheckSurplusInvariant(out, inst, rep).ok());
    CHECK(CheckOnlineLegality(out, rep).ok());
    if (!out.thresholds.dummy())
      for (const Trade& t : out.trades) CHECK(t.charge - t.payment == out.thresholds.slot->amount - out.thresholds.user->amount);
    // The touched-only IR sweep agrees with full trajectories.
    for (std::uint32_t m = 0; m < inst.mediators().size(); ++m)
      CHECK(CheckContinuousIR(ComputeTrajectory(out, inst, rep, MediatorPlayer{m})).pass);
  }
}

TEST_CASE("misreport generator contract") {
  Rng rng(1);
  const Instance inst = Make({{1, 3}, {5}}, {{2, 7}});
  auto labels_of = [](const std::vector<DeviationCase>& cases) { return cases.size(); };

  const auto user = GenerateMisreports(UserPlayer{1, 0}, inst, {}, rng, 20);
  CHECK(labels_of(user) == 20);
  auto has_cost = [&](Money c) {
    return std::any_of(user.begin(), user.end(), [&](const DeviationCase& d) { return d.misreport.user_cost == c; });
  };
  CHECK(has_cost(Money()));
  CHECK(has_cost(U(10)));
  CHECK(has_cost(U(4)));
  CHECK(has_cost(U(6)));
  CHECK_FALSE(has_cost(U(5)));

  const auto adv = GenerateMisreports(AdvertiserPlayer{0}, inst, {}, rng, 20);
  auto has_adv = [&](std::uint32_t cap, Money v) {
    return std::any_of(adv.begin(), adv.end(), [&](const DeviationCase& d) {
      return d.misreport.advertiser == AdvertiserReport{cap, v};
    });
  };
  CHECK(has_adv(2, U(14)));
  CHECK(has_adv(1, U(7)));
  CHECK(has_adv(3, U(7)));
  CHECK(has_adv(0, U(7)));

  const auto med = GenerateMisreports(MediatorPlayer{0}, inst, {}, rng, 40);
  auto has_costs = [&](std::vector<Money> costs) {
    return std::any_of(med.begin(), med.end(), [&](const DeviationCase& d) {
      std::vector<Money> got;
      for (auto& u : d.misreport.mediator->users) got.push_back(u.cost);
      return got == costs;
    });
  };
  CHECK(has_costs({U(1)}));
  CHECK(has_costs({U(1), U(3), Money::FromMicros(500000)}));
  CHECK(has_costs({U(3), U(1)}));

  // Deterministic per rng state, and k is honoured when candidates abound.
  Rng a(5), b(5);
  const std::vector<Money> hints{U(2), U(4), U(6), U(8)};
  const auto x = GenerateMisreports(MediatorPlayer{0}, inst, hints, a, 7);
  const auto y = GenerateMisreports(MediatorPlayer{0}, inst, hints, b, 7);
  REQUIRE(x.size() == 7);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].misreport.mediator == y[i].misreport.mediator);
}

TEST_CASE("apply deviation") {
  const Instance inst = Make({{1, 3}}, {{2, 7}});
  const auto truth = ReportProfile::Truthful(inst);
  Misreport m;
  m.user_cost = U(9);
  const auto dev = ApplyDeviation(truth, {UserPlayer{0, 1}, m});
  CHECK(dev.mediators[0].users[1].cost == U(9));
  CHECK(dev.mediators[0].users[0].cost == U(1));
  CHECK_THROWS_AS(ApplyDeviation(truth, {MediatorPlayer{0}, m}), std::invalid_argument);
}

TEST_CASE("deviation tests on the worked family") {
  // Thresholds 4/6 injected, so the worked market is replayed on every seed.
  const Instance inst = opm::testing::WorkedInstance();
  auto cfg = opm::testing::WorkedConfig();
  cfg.forced_arrival_order.reset();
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 1000; ++s) seeds.push_back(s);

  SUBCASE("user overbids her critical value") {
    Misreport m;
    m.user_cost = U(6);
    for (const auto& v : DeviationTest(inst, {UserPlayer{0, 0}, m}, cfg, seeds)) {
      CHECK(v.pass);
      CHECK(v.deviant.value == Money());
    }
  }
  SUBCASE("mediator drops his cheapest user") {
    Misreport m;
    m.mediator = MediatorReport{{{U(3), 1u}, {U(5), 2u}}};
    for (const auto& v : DeviationTest(inst, {MediatorPlayer{0}, m}, cfg, seeds)) CHECK(v.pass);
  }
  SUBCASE("advertiser under dummy thresholds") {
    cfg.threshold_override = Thresholds::Dummy();
    Misreport m;
    m.advertiser = AdvertiserReport{5, U(100)};
    for (const auto& v : DeviationTest(inst, {AdvertiserPlayer{0}, m}, cfg, seeds)) {
      CHECK(v.truthful.value == Money());
      CHECK(v.deviant.value == Money());
      CHECK(v.pass);
    }
  }
}

TEST_CASE("sampled deviations are never profitable on small random markets") {
  Rng rng(123);
  std::size_t runs = 0, strictly_worse = 0;
  for (int i = 0; i < 60; ++i) {
    const Instance inst = opm::testing::RandomSmall(rng, 10, 2, 10, 2, 20);
    MechanismConfig cfg;
    cfg.alpha = Ratio::Of(1, 1000);
    std::vector<std::uint64_t> seeds{rng.Next(), rng.Next(), rng.Next()};
    const auto m = static_cast<std::uint32_t>(rng.Below(inst.mediators().size()));
    const auto a = static_cast<std::uint32_t>(rng.Below(inst.advertisers().size()));
    std::vector<Player> players{UserPlayer{m, 0}, MediatorPlayer{m}, AdvertiserPlayer{a}};
    for (const Player& p : players)
      for (const auto& d : GenerateMisreports(p, inst, {U(5), U(10)}, rng, 8))
        for (const auto& v : DeviationTest(inst, d, cfg, seeds)) {
          ++runs;
          strictly_worse += AtLeast(v.truthful, v.deviant) && !AtLeast(v.deviant, v.truthful);
          if (!v.pass) FAIL_CHECK(PlayerName(p) << " gains with " << d.misreport.label);
        }
  }
  CHECK(runs == 60 * 3 * 8 * 3);
  CHECK(strictly_worse > 0);
}
