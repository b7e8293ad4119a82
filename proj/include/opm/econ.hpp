#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "opm/market.hpp"
#include "opm/mechanism.hpp"
#include "opm/rng.hpp"

namespace opm {

// Players are named by their TRUE identity: a user is (mediator, true user index).
struct UserPlayer {
  std::uint32_t mediator = 0;
  std::uint32_t user = 0;
  bool operator==(const UserPlayer&) const = default;
};
struct MediatorPlayer {
  std::uint32_t mediator = 0;
  bool operator==(const MediatorPlayer&) const = default;
};
struct AdvertiserPlayer {
  std::uint32_t advertiser = 0;
  bool operator==(const AdvertiserPlayer&) const = default;
};
using Player = std::variant<UserPlayer, MediatorPlayer, AdvertiserPlayer>;

std::string PlayerName(const Player& p);

// Cumulative utility. `infeasible` marks a mediator who was assigned more
// entries than he has real users to deliver; such an outcome is worth -inf.
struct Utility {
  Money value;
  bool infeasible = false;
  bool operator==(const Utility&) const = default;
};
// a >= b with infeasible below every amount.
bool AtLeast(const Utility& a, const Utility& b);

// Utility of `player` after the first `events_applied` post-observation
// arrivals, measured against the instance's true costs, values and capacities.
//   user:       cumulative target - true cost if assigned, else 0
//   mediator:   receipts - true costs of the users he delivers
//   advertiser: min(assigned, true capacity) * true value - charges
// A mediator delivers each assigned entry's backing user; entries without a
// (still available) backing user are filled by his cheapest undelivered user.
// Throws std::out_of_range for an unknown player.
Utility UtilityAfter(const MechanismOutcome& outcome, const Instance& instance,
                     const ReportProfile& reports, const Player& player,
                     std::size_t events_applied);

struct UtilityTrajectory {
  Player player;
  std::vector<Utility> series;  // index 0 is the start (always 0); one entry per arrival
};

UtilityTrajectory ComputeTrajectory(const MechanismOutcome& outcome, const Instance& instance,
                                    const ReportProfile& reports, const Player& player);

struct IrVerdict {
  bool pass = true;
  std::optional<std::size_t> first_violation;  // series index
};

// Passes iff the series starts at 0 and never decreases.
IrVerdict CheckContinuousIR(const UtilityTrajectory& trajectory);

struct IrSweepResult {
  std::size_t players_checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Continuous IR for every player at once. Utilities are re-evaluated only for
// players touched by an event, which is equivalent to checking every series.
IrSweepResult CheckAllContinuousIR(const MechanismOutcome& outcome, const Instance& instance,
                                   const ReportProfile& reports);

struct AuditReport {
  Money total_charges;
  Money total_payments;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// (a) Σ charges >= Σ payments; (b) every trade charges more than it pays, both
// numerically and as tie-keys; (c) per mediator, after every step, the sum of
// recommended user payments never exceeds the receipts.
AuditReport CheckBudgetBalance(const MechanismOutcome& outcome, const ReportProfile& reports);

// After each arrival: no arrived mediator keeps an unassigned assignable user,
// or no arrived advertiser keeps an unassigned assignable slot. Assignability is
// recomputed from the reports and the outcome's thresholds.
AuditReport CheckSurplusInvariant(const MechanismOutcome& outcome, const Instance& instance,
                                  const ReportProfile& reports);

// Each trade involves the entity arriving in its event on exactly one side, no
// observed entity trades, and no user or slot is used twice.
AuditReport CheckOnlineLegality(const MechanismOutcome& outcome, const ReportProfile& reports);

// ---------------------------------------------------------------------------
// Deviations

struct Misreport {
  std::string label;
  // Exactly one of these is set, matching the player kind.
  std::optional<Money> user_cost;
  std::optional<MediatorReport> mediator;
  std::optional<AdvertiserReport> advertiser;
};

struct DeviationCase {
  Player player;
  Misreport misreport;
};

// Applies a deviation to a report profile. For a user, her mediator is
// truthful and forwards the new cost in her position.
ReportProfile ApplyDeviation(const ReportProfile& base, const DeviationCase& deviation);

// Money grid step used by the generator.
inline constexpr Money kGridStep = Money::Units(1);

// k misreports for `player`. Structural cases come first (for users: 0, x1/2,
// x2, +-1 and +-2 grid steps, extreme low/high; for advertisers: value x2, x1/2,
// 0, capacity +-1, 0 and doubled; for mediators: drop each user, duplicate,
// fake cheap/expensive users, reversal and shuffles, per-cost perturbations);
// `hints` (amounts present in the market) add tie-crossing reports at hint and
// hint +- 1 micro-unit. When there are more than k candidates, k are sampled
// with `rng`; when fewer, random reports fill the rest.
std::vector<DeviationCase> GenerateMisreports(const Player& player, const Instance& truth,
                                              const std::vector<Money>& hints, Rng& rng,
                                              std::size_t k);

struct DeviationVerdict {
  std::uint64_t seed = 0;
  Utility truthful;
  Utility deviant;
  bool pass = true;  // truthful >= deviant
};

// Paired runs per seed: identical seed, hence identical arrival order, t and
// tie order; only the deviating player's report differs. Final utilities are
// compared exactly.
std::vector<DeviationVerdict> DeviationTest(const Instance& instance, const DeviationCase& deviation,
                                            const MechanismConfig& base,
                                            const std::vector<std::uint64_t>& seeds);

}  // namespace opm
