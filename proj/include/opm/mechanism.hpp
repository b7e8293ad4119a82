#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "opm/canonical.hpp"
#include "opm/market.hpp"
#include "opm/ratio.hpp"
#include "opm/rng.hpp"

namespace opm {

// Threshold pair. A missing user key is the dummy user of cost -inf, a missing
// slot key the dummy slot of value +inf; both are present or both absent.
struct Thresholds {
  std::optional<TieKey> user;
  std::optional<TieKey> slot;

  static Thresholds Dummy() { return {}; }
  bool dummy() const { return !user.has_value(); }
  bool user_assignable(const TieKey& k) const { return user && k < *user; }
  bool slot_assignable(const TieKey& k) const { return slot && k > *slot; }
  bool operator==(const Thresholds&) const = default;
};

// Deliberately broken engines used as negative controls for the audits.
enum class EngineVariant : std::uint8_t {
  kFaithful,
  kPaySlotPrice,        // mediator is paid v(b_hat) instead of c(p_hat)
  kSkipPaymentUpdates,  // no payment recommendations at all (steps 4d)
};

struct MechanismConfig {
  Ratio alpha{1, 1};
  std::optional<Ratio> r;  // defaults to DeriveR(alpha)
  std::uint64_t seed = 0;
  // Test-only injection points; outcomes record that they were used.
  std::optional<Thresholds> threshold_override;
  std::optional<std::vector<EntityId>> forced_arrival_order;
  std::optional<std::size_t> forced_observation_count;
  EngineVariant variant = EngineVariant::kFaithful;

  bool uses_overrides() const {
    return threshold_override || forced_arrival_order || forced_observation_count;
  }
};

struct Trade {
  UserRef user;
  SlotRef slot;
  std::uint32_t event = 0;  // index into MechanismOutcome::events
  std::uint32_t seq = 0;    // global order among trades and target updates
  Money charge;
  Money payment;
  TieKey charge_key;
  TieKey payment_key;
  bool operator==(const Trade&) const = default;
};

// New cumulative recommended payment for every assigned user of `mediator`.
struct TargetUpdate {
  std::uint32_t event = 0;
  std::uint32_t seq = 0;
  std::uint32_t mediator = 0;
  Money target;
  bool within_event = false;  // true: right after an assignment; false: step 4d
  bool operator==(const TargetUpdate&) const = default;
};

// One post-observation arrival. Trade and update ranges are [begin, end).
struct EventRecord {
  EntityId entity;
  std::uint32_t trades_begin = 0, trades_end = 0;
  std::uint32_t updates_begin = 0, updates_end = 0;
  bool operator==(const EventRecord&) const = default;
};

struct MechanismOutcome {
  Ratio alpha;
  Ratio r;
  std::uint64_t seed = 0;
  bool used_overrides = false;
  EngineVariant variant = EngineVariant::kFaithful;

  std::vector<EntityId> arrival_order;
  std::size_t observation_count = 0;  // t
  Thresholds thresholds;
  std::size_t observed_canonical_size = 0;  // |S_c(P(M_T), B(A_T))|

  std::vector<Trade> trades;
  std::vector<TargetUpdate> target_updates;
  std::vector<EventRecord> events;

  std::vector<Money> charges;   // per advertiser
  std::vector<Money> receipts;  // per mediator
  std::vector<Money> targets;   // per mediator, shared by its assigned users

  std::vector<std::uint32_t> observed_mediators() const;
  std::vector<std::uint32_t> observed_advertisers() const;
  Assignment assignment() const;
  bool operator==(const MechanismOutcome&) const = default;
};

// Full ledger state after the first `events_applied` post-observation arrivals.
struct Snapshot {
  std::vector<Money> charges;
  std::vector<Money> receipts;
  std::vector<std::vector<Money>> user_targets;  // [mediator][reported user]; 0 if unassigned
  std::vector<std::vector<bool>> user_assigned;
  std::vector<std::uint32_t> slots_filled;  // per advertiser
};
Snapshot SnapshotAfter(const MechanismOutcome& outcome, const ReportProfile& reports,
                       std::size_t events_applied);

// t ~ Binomial(n, r) as n independent Bernoulli(r) draws.
std::size_t SampleObservationCount(std::size_t n_entities, Ratio r, Rng& rng);

struct ThresholdResult {
  Thresholds thresholds;
  std::size_t observed_canonical_size = 0;
};

// Thresholds from the reports of the observed entities only: the user and slot
// at location ceil((1 - 2 alpha^(1/3) / r) * |S_c|) of S_c(P(M_T), B(A_T)), or
// dummies when that expression is not positive.
ThresholdResult ComputeThresholds(const Instance& instance, const ReportProfile& reports,
                                  std::span<const std::uint32_t> observed_mediators,
                                  std::span<const std::uint32_t> observed_advertisers, Ratio r,
                                  Ratio alpha);

// Online state after the observation phase. Single owner; one arrival at a time.
class MechanismState {
 public:
  MechanismState(const Instance& instance, const ReportProfile& reports, Thresholds thresholds,
                 EngineVariant variant = EngineVariant::kFaithful);

  // Marks an entity as observed; it never trades. Throws once arrivals started.
  void Observe(EntityId entity);
  // Steps 4a-4d for one arriving entity. Throws std::logic_error if the entity
  // was already seen (observed or arrived).
  const EventRecord& ProcessArrival(EntityId entity);

  // Unassigned assignable users of arrived mediators / slots of arrived advertisers.
  std::size_t open_users() const { return open_users_; }
  std::size_t open_slots() const { return open_slots_; }

  // Recomputes step 4d for every mediator in sigma_E and returns the targets.
  // Used by tests to confirm that per-event updates of touched mediators suffice.
  std::vector<Money> RecomputeAllTargets() const;

  const std::vector<Trade>& trades() const { return trades_; }
  const std::vector<TargetUpdate>& target_updates() const { return updates_; }
  const std::vector<EventRecord>& events() const { return events_; }
  const std::vector<Money>& charges() const { return charges_; }
  const std::vector<Money>& receipts() const { return receipts_; }
  const std::vector<Money>& targets() const { return targets_; }
  const Thresholds& thresholds() const { return thresholds_; }

 private:
  struct MediatorPool {
    std::vector<std::uint32_t> assignable;  // reported user indices, increasing key
    std::size_t next = 0;
    std::size_t assigned = 0;
    bool has_open() const { return next < assignable.size(); }
  };
  struct AdvertiserPool {
    std::uint32_t assignable = 0;  // slots 0..assignable-1 are assignable
    std::uint32_t next = 0;
    bool has_open() const { return next < assignable; }
  };

  void Execute(std::uint32_t mediator, std::uint32_t advertiser, std::uint32_t event);
  Money TargetFor(std::uint32_t mediator) const;
  void UpdateTarget(std::uint32_t mediator, std::uint32_t event, bool within_event);

  const Instance* instance_;
  const ReportProfile* reports_;
  Thresholds thresholds_;
  EngineVariant variant_;

  std::vector<bool> seen_mediator_, seen_advertiser_;
  std::vector<MediatorPool> mediators_;
  std::vector<AdvertiserPool> advertisers_;
  std::vector<std::uint32_t> arrived_mediators_;       // sigma_E order
  std::deque<std::uint32_t> open_mediator_queue_;      // sigma_E order, with open users
  std::deque<std::uint32_t> open_advertiser_queue_;    // sigma_E order, with open slots
  std::size_t open_users_ = 0, open_slots_ = 0;
  bool arrivals_started_ = false;
  std::uint32_t seq_ = 0;

  std::vector<Trade> trades_;
  std::vector<TargetUpdate> updates_;
  std::vector<EventRecord> events_;
  std::vector<Money> charges_, receipts_, targets_;
};

// Mechanism end to end: arrival permutation and t from the seed (unless
// forced), observation phase, thresholds from observed reports, then arrivals.
// `instance` supplies the tie order and entity set; all amounts come from
// `reports`. Throws std::invalid_argument on an invalid config.
MechanismOutcome RunMechanism(const Instance& instance, const ReportProfile& reports,
                              const MechanismConfig& config);

}  // namespace opm
