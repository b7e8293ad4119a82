#include "opm/mechanism.hpp"

#include <algorithm>
#include <stdexcept>

namespace opm {

std::vector<std::uint32_t> MechanismOutcome::observed_mediators() const {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < observation_count; ++i)
    if (arrival_order[i].is_mediator()) out.push_back(arrival_order[i].index);
  return out;
}

std::vector<std::uint32_t> MechanismOutcome::observed_advertisers() const {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < observation_count; ++i)
    if (!arrival_order[i].is_mediator()) out.push_back(arrival_order[i].index);
  return out;
}

Assignment MechanismOutcome::assignment() const {
  Assignment a;
  for (const Trade& t : trades) a.Add(t.user, t.slot);
  return a;
}

Snapshot SnapshotAfter(const MechanismOutcome& outcome, const ReportProfile& reports,
                       std::size_t events_applied) {
  Snapshot s;
  s.charges.assign(reports.advertisers.size(), Money());
  s.receipts.assign(reports.mediators.size(), Money());
  s.slots_filled.assign(reports.advertisers.size(), 0);
  s.user_targets.resize(reports.mediators.size());
  s.user_assigned.resize(reports.mediators.size());
  for (std::size_t m = 0; m < reports.mediators.size(); ++m) {
    s.user_targets[m].assign(reports.mediators[m].users.size(), Money());
    s.user_assigned[m].assign(reports.mediators[m].users.size(), false);
  }
  std::vector<Money> target(reports.mediators.size());
  const std::size_t n = std::min(events_applied, outcome.events.size());
  const std::uint32_t trades_end = n == 0 ? 0 : outcome.events[n - 1].trades_end;
  const std::uint32_t updates_end = n == 0 ? 0 : outcome.events[n - 1].updates_end;
  for (std::uint32_t i = 0; i < trades_end; ++i) {
    const Trade& t = outcome.trades[i];
    s.charges[t.slot.advertiser] += t.charge;
    s.receipts[t.user.mediator] += t.payment;
    s.user_assigned[t.user.mediator][t.user.user] = true;
    ++s.slots_filled[t.slot.advertiser];
  }
  for (std::uint32_t i = 0; i < updates_end; ++i)
    target[outcome.target_updates[i].mediator] = outcome.target_updates[i].target;
  for (std::size_t m = 0; m < s.user_targets.size(); ++m)
    for (std::size_t u = 0; u < s.user_targets[m].size(); ++u)
      if (s.user_assigned[m][u]) s.user_targets[m][u] = target[m];
  return s;
}

std::size_t SampleObservationCount(std::size_t n_entities, Ratio r, Rng& rng) {
  std::size_t t = 0;
  for (std::size_t i = 0; i < n_entities; ++i) t += rng.Bernoulli(r) ? 1 : 0;
  return t;
}

ThresholdResult ComputeThresholds(const Instance& instance, const ReportProfile& reports,
                                  std::span<const std::uint32_t> observed_mediators,
                                  std::span<const std::uint32_t> observed_advertisers, Ratio r,
                                  Ratio alpha) {
  CanonicalAssignment observed = Canonicalize(UsersOf(instance, reports, observed_mediators),
                                              SlotsOf(instance, reports, observed_advertisers));
  ThresholdResult result;
  result.observed_canonical_size = observed.size;
  if (auto loc = ScaledPrefixLocation(observed.size, 2, alpha, r)) {
    result.thresholds.user = observed.user_at(*loc).key;
    result.thresholds.slot = observed.slot_at(*loc).key;
  }
  return result;
}

MechanismState::MechanismState(const Instance& instance, const ReportProfile& reports,
                               Thresholds thresholds, EngineVariant variant)
    : instance_(&instance),
      reports_(&reports),
      thresholds_(std::move(thresholds)),
      variant_(variant),
      seen_mediator_(reports.mediators.size(), false),
      seen_advertiser_(reports.advertisers.size(), false),
      mediators_(reports.mediators.size()),
      advertisers_(reports.advertisers.size()),
      charges_(reports.advertisers.size()),
      receipts_(reports.mediators.size()),
      targets_(reports.mediators.size()) {
  if (thresholds_.user.has_value() != thresholds_.slot.has_value())
    throw std::invalid_argument("thresholds must both be real or both be dummies");
}

void MechanismState::Observe(EntityId entity) {
  if (arrivals_started_) throw std::logic_error("observation phase is over");
  auto& seen = entity.is_mediator() ? seen_mediator_ : seen_advertiser_;
  if (entity.index >= seen.size()) throw std::out_of_range("unknown entity " + entity.ToString());
  if (seen[entity.index]) throw std::logic_error(entity.ToString() + " already processed");
  seen[entity.index] = true;
}

Money MechanismState::TargetFor(std::uint32_t m) const {
  const MediatorPool& pool = mediators_[m];
  if (pool.has_open()) return reports_->mediators[m].users[pool.assignable[pool.next]].cost;
  return thresholds_.user->amount;
}

void MechanismState::UpdateTarget(std::uint32_t m, std::uint32_t event, bool within_event) {
  const Money target = TargetFor(m);
  if (!within_event && target == targets_[m]) return;
  targets_[m] = target;
  updates_.push_back({event, seq_++, m, target, within_event});
}

void MechanismState::Execute(std::uint32_t m, std::uint32_t a, std::uint32_t event) {
  MediatorPool& mp = mediators_[m];
  AdvertiserPool& ap = advertisers_[a];
  const UserRef user{m, mp.assignable[mp.next++]};
  const SlotRef slot{a, ap.next++};
  ++mp.assigned;
  --open_users_;
  --open_slots_;

  Trade t;
  t.user = user;
  t.slot = slot;
  t.event = event;
  t.seq = seq_++;
  t.charge = thresholds_.slot->amount;
  t.charge_key = *thresholds_.slot;
  if (variant_ == EngineVariant::kPaySlotPrice) {
    t.payment = thresholds_.slot->amount;
    t.payment_key = *thresholds_.slot;
  } else {
    t.payment = thresholds_.user->amount;
    t.payment_key = *thresholds_.user;
  }
  charges_[a] += t.charge;
  receipts_[m] += t.payment;
  trades_.push_back(t);

  // The assigned user is paid right away: her first installment is the
  // step-4d target given the mediator's remaining pool.
  if (variant_ != EngineVariant::kSkipPaymentUpdates) UpdateTarget(m, event, true);
}

const EventRecord& MechanismState::ProcessArrival(EntityId entity) {
  auto& seen = entity.is_mediator() ? seen_mediator_ : seen_advertiser_;
  if (entity.index >= seen.size()) throw std::out_of_range("unknown entity " + entity.ToString());
  if (seen[entity.index]) throw std::logic_error(entity.ToString() + " already processed");
  seen[entity.index] = true;
  arrivals_started_ = true;

  const auto event = static_cast<std::uint32_t>(events_.size());
  EventRecord rec;
  rec.entity = entity;
  rec.trades_begin = static_cast<std::uint32_t>(trades_.size());
  rec.updates_begin = static_cast<std::uint32_t>(updates_.size());

  std::vector<std::uint32_t> touched;
  if (entity.is_mediator()) {
    const std::uint32_t m = entity.index;
    MediatorPool& pool = mediators_[m];
    const auto& users = reports_->mediators[m].users;
    for (std::uint32_t i = 0; i < users.size(); ++i)
      if (thresholds_.user_assignable(UserKey(*instance_, *reports_, {m, i})))
        pool.assignable.push_back(i);
    std::sort(pool.assignable.begin(), pool.assignable.end(), [&](std::uint32_t x, std::uint32_t y) {
      return UserKey(*instance_, *reports_, {m, x}) < UserKey(*instance_, *reports_, {m, y});
    });
    open_users_ += pool.assignable.size();
    arrived_mediators_.push_back(m);

    while (pool.has_open() && !open_advertiser_queue_.empty()) {
      const std::uint32_t a = open_advertiser_queue_.front();
      Execute(m, a, event);
      if (!advertisers_[a].has_open()) open_advertiser_queue_.pop_front();
    }
    if (pool.has_open()) open_mediator_queue_.push_back(m);
    if (pool.assigned > 0) touched.push_back(m);
  } else {
    const std::uint32_t a = entity.index;
    AdvertiserPool& pool = advertisers_[a];
    const std::uint32_t capacity = reports_->advertisers[a].capacity;
    // Slots of one advertiser share amount and rank and differ only in index,
    // which never decides a comparison against another entity's key; so either
    // every slot is assignable or none is.
    if (capacity > 0 && thresholds_.slot_assignable(SlotKey(*instance_, *reports_, {a, 0})))
      pool.assignable = capacity;
    open_slots_ += pool.assignable;

    while (pool.has_open() && !open_mediator_queue_.empty()) {
      const std::uint32_t m = open_mediator_queue_.front();
      Execute(m, a, event);
      if (touched.empty() || touched.back() != m) touched.push_back(m);
      if (!mediators_[m].has_open()) open_mediator_queue_.pop_front();
    }
    if (pool.has_open()) open_advertiser_queue_.push_back(a);
  }

  // Step 4d. A mediator's target depends only on its own pool, so mediators
  // without a trade in this event keep their target.
  if (variant_ != EngineVariant::kSkipPaymentUpdates)
    for (std::uint32_t m : touched) UpdateTarget(m, event, false);

  rec.trades_end = static_cast<std::uint32_t>(trades_.size());
  rec.updates_end = static_cast<std::uint32_t>(updates_.size());
  events_.push_back(rec);
  return events_.back();
}

std::vector<Money> MechanismState::RecomputeAllTargets() const {
  std::vector<Money> out(mediators_.size());
  for (std::uint32_t m : arrived_mediators_)
    if (mediators_[m].assigned > 0) out[m] = TargetFor(m);
  return out;
}

namespace {

void CheckConfig(const Instance& instance, const ReportProfile& reports,
                 const MechanismConfig& config, Ratio r) {
  if (config.alpha.num <= 0 || config.alpha > Ratio{1, 1})
    throw std::invalid_argument("alpha must lie in (0, 1]");
  // r above 1/2 is never derived, but an explicit r up to 1 is accepted for experiments.
  if (r.num <= 0 || r > Ratio{1, 1}) throw std::invalid_argument("r must lie in (0, 1]");
  if (reports.mediators.size() != instance.mediators().size() ||
      reports.advertisers.size() != instance.advertisers().size())
    throw std::invalid_argument("report profile does not match the instance's entities");
  const std::size_t n = instance.entity_count();
  if (config.forced_observation_count && *config.forced_observation_count > n)
    throw std::invalid_argument("forced observation count exceeds entity count");
  if (config.forced_arrival_order) {
    const auto& order = *config.forced_arrival_order;
    std::vector<bool> m(instance.mediators().size()), a(instance.advertisers().size());
    if (order.size() != n) throw std::invalid_argument("forced arrival order must list every entity");
    for (EntityId id : order) {
      auto& seen = id.is_mediator() ? m : a;
      if (id.index >= seen.size() || seen[id.index])
        throw std::invalid_argument("forced arrival order is not a permutation");
      seen[id.index] = true;
    }
  }
  if (const auto& t = config.threshold_override; t && t->user.has_value() != t->slot.has_value())
    throw std::invalid_argument("threshold override must set both keys or neither");
}

}  // namespace

MechanismOutcome RunMechanism(const Instance& instance, const ReportProfile& reports,
                              const MechanismConfig& config) {
  const Ratio r = config.r.value_or(DeriveR(config.alpha));
  CheckConfig(instance, reports, config, r);

  MechanismOutcome out;
  out.alpha = config.alpha;
  out.r = r;
  out.seed = config.seed;
  out.used_overrides = config.uses_overrides();
  out.variant = config.variant;

  // Both draws always happen so that forcing one leaves the other unchanged.
  Rng rng(config.seed);
  std::vector<EntityId> order;
  order.reserve(instance.entity_count());
  for (std::uint32_t m = 0; m < instance.mediators().size(); ++m) order.push_back(EntityId::Mediator(m));
  for (std::uint32_t a = 0; a < instance.advertisers().size(); ++a) order.push_back(EntityId::Advertiser(a));
  rng.Shuffle(order);
  std::size_t t = SampleObservationCount(instance.entity_count(), r, rng);
  out.arrival_order = config.forced_arrival_order.value_or(std::move(order));
  out.observation_count = config.forced_observation_count.value_or(t);

  const auto observed_m = out.observed_mediators();
  const auto observed_a = out.observed_advertisers();
  {
    ThresholdResult th = ComputeThresholds(instance, reports, observed_m, observed_a, r, config.alpha);
    out.observed_canonical_size = th.observed_canonical_size;
    out.thresholds = config.threshold_override.value_or(th.thresholds);
  }

  MechanismState state(instance, reports, out.thresholds, config.variant);
  for (std::size_t i = 0; i < out.observation_count; ++i) state.Observe(out.arrival_order[i]);
  for (std::size_t i = out.observation_count; i < out.arrival_order.size(); ++i)
    state.ProcessArrival(out.arrival_order[i]);

  out.trades = state.trades();
  out.target_updates = state.target_updates();
  out.events = state.events();
  out.charges = state.charges();
  out.receipts = state.receipts();
  out.targets = state.targets();
  return out;
}

}  // namespace opm
