#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "opm/money.hpp"
#include "opm/ratio.hpp"

namespace opm {

enum class EntityKind : std::uint8_t { kMediator, kAdvertiser };

struct EntityId {
  EntityKind kind = EntityKind::kMediator;
  std::uint32_t index = 0;

  static EntityId Mediator(std::uint32_t i) { return {EntityKind::kMediator, i}; }
  static EntityId Advertiser(std::uint32_t i) { return {EntityKind::kAdvertiser, i}; }
  bool is_mediator() const { return kind == EntityKind::kMediator; }

  // "m3" / "a0".
  std::string ToString() const;
  static EntityId Parse(std::string_view text);

  auto operator<=>(const EntityId&) const = default;
};

struct UserRef {
  std::uint32_t mediator = 0;
  std::uint32_t user = 0;
  auto operator<=>(const UserRef&) const = default;
};

struct SlotRef {
  std::uint32_t advertiser = 0;
  std::uint32_t slot = 0;
  auto operator<=>(const SlotRef&) const = default;
};

// Strict total order over every user cost and slot value of one instance:
// (amount, rank of the owning entity in the tie order, index within entity).
// A smaller rank is the smaller key, so under equal amounts a user's cost is
// below a slot's value iff her mediator precedes the advertiser.
struct TieKey {
  Money amount;
  std::uint32_t entity_rank = 0;
  std::uint32_t within = 0;

  auto operator<=>(const TieKey&) const = default;
};

// Rank reserved for externally injected threshold keys; never a real entity.
inline constexpr std::uint32_t kInjectedRank = UINT32_MAX;

std::strong_ordering CompareKeys(const TieKey& a, const TieKey& b);

struct MediatorSpec {
  std::vector<Money> user_costs;  // order defines intra-mediator tie-breaks
};

struct AdvertiserSpec {
  std::uint32_t capacity = 1;
  Money value;
};

// Ground-truth market. Immutable after Create().
class Instance {
 public:
  // Throws std::invalid_argument when tie_order is not a bijection over the
  // entities, a cost or value is negative, or a capacity is zero.
  static Instance Create(std::vector<MediatorSpec> mediators,
                         std::vector<AdvertiserSpec> advertisers,
                         std::vector<EntityId> tie_order);

  const std::vector<MediatorSpec>& mediators() const { return mediators_; }
  const std::vector<AdvertiserSpec>& advertisers() const { return advertisers_; }
  const std::vector<EntityId>& tie_order() const { return tie_order_; }

  std::size_t entity_count() const { return mediators_.size() + advertisers_.size(); }
  std::uint32_t rank(EntityId id) const {
    return id.is_mediator() ? mediator_rank_[id.index] : advertiser_rank_[id.index];
  }
  std::size_t user_count() const;
  std::size_t slot_count() const;

  bool operator==(const Instance& o) const;

 private:
  std::vector<MediatorSpec> mediators_;
  std::vector<AdvertiserSpec> advertisers_;
  std::vector<EntityId> tie_order_;
  std::vector<std::uint32_t> mediator_rank_;
  std::vector<std::uint32_t> advertiser_rank_;
};

// Uniform random tie order drawn from `seed` before any report is seen.
std::vector<EntityId> RandomTieOrder(std::size_t mediators, std::size_t advertisers,
                                     std::uint64_t seed);

// One entry of a mediator's report. `backing` names the true user this entry
// stands for (nullopt for a fabricated user); the mechanism never reads it,
// it only feeds utility accounting.
struct ReportedUser {
  Money cost;
  std::optional<std::uint32_t> backing;
  bool operator==(const ReportedUser&) const = default;
};

struct MediatorReport {
  std::vector<ReportedUser> users;
  bool operator==(const MediatorReport&) const = default;
};

struct AdvertiserReport {
  std::uint32_t capacity = 0;
  Money value;
  bool operator==(const AdvertiserReport&) const = default;
};

// What the mechanism sees. Misreports are legal values.
struct ReportProfile {
  std::vector<MediatorReport> mediators;
  std::vector<AdvertiserReport> advertisers;

  static ReportProfile Truthful(const Instance& instance);
  bool operator==(const ReportProfile&) const = default;
};

struct KeyedUser {
  UserRef ref;
  TieKey key;
};

struct KeyedSlot {
  SlotRef ref;
  TieKey key;
};

inline TieKey UserKey(const Instance& inst, const ReportProfile& reports, UserRef u) {
  return {reports.mediators[u.mediator].users[u.user].cost,
          inst.rank(EntityId::Mediator(u.mediator)), u.user};
}

inline TieKey SlotKey(const Instance& inst, const ReportProfile& reports, SlotRef b) {
  return {reports.advertisers[b.advertiser].value, inst.rank(EntityId::Advertiser(b.advertiser)),
          b.slot};
}

// Reported users of the listed mediators / slots of the listed advertisers.
std::vector<KeyedUser> UsersOf(const Instance& inst, const ReportProfile& reports,
                               std::span<const std::uint32_t> mediators);
std::vector<KeyedSlot> SlotsOf(const Instance& inst, const ReportProfile& reports,
                               std::span<const std::uint32_t> advertisers);
std::vector<KeyedUser> AllUsers(const Instance& inst, const ReportProfile& reports);
std::vector<KeyedSlot> AllSlots(const Instance& inst, const ReportProfile& reports);

// Set of (user, slot) pairs; no user and no slot appears twice.
class Assignment {
 public:
  // Throws std::invalid_argument on a repeated user or slot.
  void Add(UserRef user, SlotRef slot);
  const std::vector<std::pair<UserRef, SlotRef>>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

 private:
  std::vector<std::pair<UserRef, SlotRef>> pairs_;
};

// Sum of v(b) - c(p) over pairs, with amounts taken from `reports`.
// Throws std::out_of_range on a dangling reference.
Money GainFromTrade(const Assignment& assignment, const ReportProfile& reports);

struct ValidationReport {
  std::size_t tau = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks the alpha promise: 1/tau <= alpha <= 1, every capacity and every
// mediator's user count at most alpha * tau. Throws std::invalid_argument when
// tau == 0 (the mechanism assumes a non-empty optimal trade).
ValidationReport ValidateInstance(const Instance& instance, Ratio alpha);

}  // namespace opm
