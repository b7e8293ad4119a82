#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opm/econ.hpp"
#include "opm/market.hpp"
#include "opm/mechanism.hpp"

namespace opm {

// Corpus-wide audits. Items are independent and fan out over `threads`
// (1 = serial reference); counts and examples are merged in item order, so the
// result does not depend on the thread count.

struct SweepConfig {
  Ratio alpha{1, 100};
  std::optional<Ratio> r;
  std::vector<std::uint64_t> seeds;
  EngineVariant variant = EngineVariant::kFaithful;
  int threads = 1;
};

struct AuditSweepResult {
  std::size_t runs = 0;
  std::size_t trades = 0;
  std::size_t nonempty_runs = 0;
  std::size_t players_checked = 0;
  std::size_t budget_violations = 0;
  std::size_t ir_violations = 0;
  std::size_t surplus_violations = 0;
  std::size_t legality_violations = 0;
  std::vector<std::string> examples;  // first few, in item order

  bool ok() const {
    return budget_violations + ir_violations + surplus_violations + legality_violations == 0;
  }
  bool operator==(const AuditSweepResult&) const = default;
};

// Truthful runs of every (instance, seed): budget balance, continuous IR,
// surplus invariant and online legality.
AuditSweepResult RunAuditSweep(const std::vector<Instance>& corpus, const SweepConfig& config);

struct RoleTally {
  std::size_t cases = 0;        // misreports tried
  std::size_t paired_runs = 0;  // misreports x seeds
  std::size_t profitable = 0;   // deviant utility strictly above truthful
  std::size_t losing = 0;       // deviant utility strictly below truthful
  std::size_t traded = 0;       // paired runs where the player traded in either run
  bool operator==(const RoleTally&) const = default;
};

struct IcSweepResult {
  RoleTally users, mediators, advertisers;
  // Surplus invariant and legality on the deviant runs.
  std::size_t deviant_runs = 0;
  std::size_t surplus_violations = 0;
  std::size_t legality_violations = 0;
  std::vector<std::string> examples;

  std::size_t profitable() const { return users.profitable + mediators.profitable + advertisers.profitable; }
  bool ok() const { return profitable() + surplus_violations + legality_violations == 0; }
  bool operator==(const IcSweepResult&) const = default;
};

// Per instance: one user (her mediator truthful), one mediator (his users
// truthful) and one advertiser, each with `misreports` deviations; every
// deviation is replayed on every seed against the cached truthful run. The
// players and hints favour the thresholds seen in the truthful runs.
IcSweepResult RunIcSweep(const std::vector<Instance>& corpus, const SweepConfig& config,
                         std::size_t misreports, std::uint64_t seed);

}  // namespace opm
