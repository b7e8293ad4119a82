#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "opm/market.hpp"
#include "opm/mechanism.hpp"
#include "opm/rng.hpp"

namespace opm::testing {

inline Money U(std::int64_t units) { return Money::Units(units); }

// Tie order m0..m{n-1}, a0..a{k-1} unless given.
inline Instance Make(std::vector<std::vector<std::int64_t>> users,
                     std::vector<std::pair<std::uint32_t, std::int64_t>> advertisers,
                     std::vector<EntityId> tie_order = {}) {
  std::vector<MediatorSpec> ms;
  for (auto& costs : users) {
    MediatorSpec m;
    for (auto c : costs) m.user_costs.push_back(U(c));
    ms.push_back(std::move(m));
  }
  std::vector<AdvertiserSpec> as;
  for (auto [cap, val] : advertisers) as.push_back({cap, U(val)});
  if (tie_order.empty()) {
    for (std::uint32_t i = 0; i < ms.size(); ++i) tie_order.push_back(EntityId::Mediator(i));
    for (std::uint32_t i = 0; i < as.size(); ++i) tie_order.push_back(EntityId::Advertiser(i));
  }
  return Instance::Create(std::move(ms), std::move(as), std::move(tie_order));
}

inline TieKey Injected(std::int64_t units) { return {U(units), kInjectedRank, 0}; }

// Thresholds 4 / 6, m0 {1,3,5} arrives, then a0 (cap 2, value 7).
inline Instance WorkedInstance() { return Make({{1, 3, 5}}, {{2, 7}}); }

inline MechanismConfig WorkedConfig() {
  MechanismConfig cfg;
  cfg.alpha = Ratio::Of(1, 1000);
  cfg.r = Ratio::Of(1, 2);
  cfg.threshold_override = Thresholds{Injected(4), Injected(6)};
  cfg.forced_arrival_order = std::vector<EntityId>{EntityId::Mediator(0), EntityId::Advertiser(0)};
  cfg.forced_observation_count = 0;
  return cfg;
}

// Small random market with amounts on a coarse grid so that ties occur.
inline Instance RandomSmall(Rng& rng, int max_mediators, int max_users, int max_advertisers,
                            int max_capacity, int max_amount) {
  const auto nm = rng.Between(1, max_mediators);
  const auto na = rng.Between(1, max_advertisers);
  std::vector<MediatorSpec> ms(static_cast<std::size_t>(nm));
  for (auto& m : ms) {
    const auto k = rng.Between(1, max_users);
    for (int i = 0; i < k; ++i) m.user_costs.push_back(U(rng.Between(0, max_amount)));
  }
  std::vector<AdvertiserSpec> as(static_cast<std::size_t>(na));
  for (auto& a : as) {
    a.capacity = static_cast<std::uint32_t>(rng.Between(1, max_capacity));
    a.value = U(rng.Between(0, max_amount));
  }
  auto order = RandomTieOrder(ms.size(), as.size(), rng.Next());
  return Instance::Create(std::move(ms), std::move(as), std::move(order));
}

}  // namespace opm::testing
