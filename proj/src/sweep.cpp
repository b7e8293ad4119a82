#include "opm/sweep.hpp"

#include <algorithm>
#include <set>

#include "opm/parallel.hpp"

namespace opm {

namespace {

constexpr std::size_t kMaxExamples = 8;

void Note(std::vector<std::string>& examples, const std::string& text) {
  if (examples.size() < kMaxExamples) examples.push_back(text);
}

MechanismConfig RunConfig(const SweepConfig& config, std::uint64_t seed) {
  MechanismConfig cfg;
  cfg.alpha = config.alpha;
  cfg.r = config.r;
  cfg.seed = seed;
  cfg.variant = config.variant;
  return cfg;
}

bool Traded(const MechanismOutcome& out, const ReportProfile& reports, const Player& player) {
  return std::any_of(out.trades.begin(), out.trades.end(), [&](const Trade& t) {
    return std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, UserPlayer>)
            return t.user.mediator == p.mediator &&
                   reports.mediators[p.mediator].users[t.user.user].backing == p.user;
          else if constexpr (std::is_same_v<T, MediatorPlayer>)
            return t.user.mediator == p.mediator;
          else
            return t.slot.advertiser == p.advertiser;
        },
        player);
  });
}

void Merge(RoleTally& into, const RoleTally& from) {
  into.cases += from.cases;
  into.paired_runs += from.paired_runs;
  into.profitable += from.profitable;
  into.losing += from.losing;
  into.traded += from.traded;
}

}  // namespace

AuditSweepResult RunAuditSweep(const std::vector<Instance>& corpus, const SweepConfig& config) {
  struct Row {
    std::size_t trades = 0, players = 0;
    std::size_t bb = 0, ir = 0, surplus = 0, legality = 0;
    std::vector<std::string> examples;
  };
  const std::size_t n_seeds = config.seeds.size();
  std::vector<Row> rows(corpus.size() * n_seeds);
  ParallelFor(rows.size(), config.threads, [&](std::size_t j) {
    const Instance& inst = corpus[j / n_seeds];
    const std::uint64_t seed = config.seeds[j % n_seeds];
    const ReportProfile truth = ReportProfile::Truthful(inst);
    const MechanismOutcome out = RunMechanism(inst, truth, RunConfig(config, seed));
    Row& row = rows[j];
    row.trades = out.trades.size();
    const std::string where = "instance " + std::to_string(j / n_seeds) + " seed " + std::to_string(seed) + ": ";
    auto take = [&](std::size_t& counter, const std::vector<std::string>& violations) {
      counter += violations.size();
      if (!violations.empty()) Note(row.examples, where + violations.front());
    };
    take(row.bb, CheckBudgetBalance(out, truth).violations);
    const IrSweepResult ir = CheckAllContinuousIR(out, inst, truth);
    row.players = ir.players_checked;
    take(row.ir, ir.violations);
    take(row.surplus, CheckSurplusInvariant(out, inst, truth).violations);
    take(row.legality, CheckOnlineLegality(out, truth).violations);
  });

  AuditSweepResult res;
  for (const Row& row : rows) {
    ++res.runs;
    res.trades += row.trades;
    res.nonempty_runs += row.trades > 0;
    res.players_checked += row.players;
    res.budget_violations += row.bb;
    res.ir_violations += row.ir;
    res.surplus_violations += row.surplus;
    res.legality_violations += row.legality;
    for (const auto& e : row.examples) Note(res.examples, e);
  }
  return res;
}

IcSweepResult RunIcSweep(const std::vector<Instance>& corpus, const SweepConfig& config,
                         std::size_t misreports, std::uint64_t seed) {
  std::vector<IcSweepResult> rows(corpus.size());
  ParallelFor(corpus.size(), config.threads, [&](std::size_t i) {
    const Instance& inst = corpus[i];
    const ReportProfile truth = ReportProfile::Truthful(inst);
    std::vector<MechanismOutcome> honest;
    honest.reserve(config.seeds.size());
    for (std::uint64_t s : config.seeds) honest.push_back(RunMechanism(inst, truth, RunConfig(config, s)));

    // Threshold amounts seen across seeds: critical values for the players.
    std::set<Money> seen;
    std::optional<Money> top_user, low_slot;
    for (const auto& out : honest) {
      if (out.thresholds.dummy()) continue;
      const Money c = out.thresholds.user->amount, v = out.thresholds.slot->amount;
      seen.insert(c);
      seen.insert(v);
      top_user = top_user ? std::max(*top_user, c) : c;
      low_slot = low_slot ? std::min(*low_slot, v) : v;
    }
    std::vector<Money> hints(seen.begin(), seen.end());
    if (hints.size() > 8) {
      std::vector<Money> spread;
      for (std::size_t k = 0; k < 8; ++k) spread.push_back(hints[k * (hints.size() - 1) / 7]);
      hints = std::move(spread);
    }

    Rng rng(Rng::DeriveSeed(seed, i));
    std::vector<UserPlayer> users;
    std::vector<UserPlayer> near;
    for (std::uint32_t m = 0; m < inst.mediators().size(); ++m)
      for (std::uint32_t u = 0; u < inst.mediators()[m].user_costs.size(); ++u) {
        users.push_back({m, u});
        if (top_user && inst.mediators()[m].user_costs[u] <= *top_user) near.push_back({m, u});
      }
    const auto& user_pool = near.empty() ? users : near;
    const UserPlayer user = user_pool[rng.Below(user_pool.size())];
    const MediatorPlayer mediator{user_pool[rng.Below(user_pool.size())].mediator};
    std::vector<std::uint32_t> ads;
    for (std::uint32_t a = 0; a < inst.advertisers().size(); ++a)
      if (low_slot && inst.advertisers()[a].value >= *low_slot) ads.push_back(a);
    const AdvertiserPlayer advertiser{
        ads.empty() ? static_cast<std::uint32_t>(rng.Below(inst.advertisers().size())) : ads[rng.Below(ads.size())]};

    IcSweepResult& res = rows[i];
    const std::pair<Player, RoleTally*> roles[] = {
        {user, &res.users}, {mediator, &res.mediators}, {advertiser, &res.advertisers}};
    for (const auto& [player, tally] : roles) {
      for (const DeviationCase& dev : GenerateMisreports(player, inst, hints, rng, misreports)) {
        ++tally->cases;
        const ReportProfile lie = ApplyDeviation(truth, dev);
        for (std::size_t k = 0; k < config.seeds.size(); ++k) {
          const MechanismOutcome out = RunMechanism(inst, lie, RunConfig(config, config.seeds[k]));
          const Utility u_true = UtilityAfter(honest[k], inst, truth, player, honest[k].events.size());
          const Utility u_lie = UtilityAfter(out, inst, lie, player, out.events.size());
          ++tally->paired_runs;
          const std::string where = "instance " + std::to_string(i) + " seed " +
                                    std::to_string(config.seeds[k]) + " " + PlayerName(player) + " '" +
                                    dev.misreport.label + "': ";
          if (!AtLeast(u_true, u_lie)) {
            ++tally->profitable;
            Note(res.examples, where + "deviation pays " + u_lie.value.ToString() + " over " +
                                   u_true.value.ToString());
          } else if (!AtLeast(u_lie, u_true)) {
            ++tally->losing;
          }
          tally->traded += Traded(honest[k], truth, player) || Traded(out, lie, player);
          ++res.deviant_runs;
          const auto surplus = CheckSurplusInvariant(out, inst, lie);
          const auto legal = CheckOnlineLegality(out, lie);
          res.surplus_violations += surplus.violations.size();
          res.legality_violations += legal.violations.size();
          if (!surplus.ok()) Note(res.examples, where + surplus.violations.front());
          if (!legal.ok()) Note(res.examples, where + legal.violations.front());
        }
      }
    }
  });

  IcSweepResult total;
  for (const IcSweepResult& row : rows) {
    Merge(total.users, row.users);
    Merge(total.mediators, row.mediators);
    Merge(total.advertisers, row.advertisers);
    total.deviant_runs += row.deviant_runs;
    total.surplus_violations += row.surplus_violations;
    total.legality_violations += row.legality_violations;
    for (const auto& e : row.examples) Note(total.examples, e);
  }
  return total;
}

}  // namespace opm
