#include "opm/canonical.hpp"

#include <algorithm>
#include <stdexcept>

namespace opm {

Assignment CanonicalAssignment::ToAssignment() const {
  Assignment out;
  for (std::size_t i = 0; i < size; ++i) out.Add(users[i].ref, slots[i].ref);
  return out;
}

Money CanonicalAssignment::Gain() const {
  Money total;
  for (std::size_t i = 0; i < size; ++i) total += slots[i].key.amount - users[i].key.amount;
  return total;
}

CanonicalAssignment Canonicalize(std::vector<KeyedUser> users, std::vector<KeyedSlot> slots) {
  CanonicalAssignment c;
  std::sort(users.begin(), users.end(),
            [](const KeyedUser& a, const KeyedUser& b) { return a.key < b.key; });
  std::sort(slots.begin(), slots.end(),
            [](const KeyedSlot& a, const KeyedSlot& b) { return a.key > b.key; });
  const std::size_t limit = std::min(users.size(), slots.size());
  // Costs rise and values fall along the locations, so the retained pairs form
  // a prefix.
  while (c.size < limit && slots[c.size].key > users[c.size].key) ++c.size;
  c.users = std::move(users);
  c.slots = std::move(slots);
  return c;
}

std::size_t Tau(const Instance& instance) {
  const ReportProfile truth = ReportProfile::Truthful(instance);
  return Canonicalize(AllUsers(instance, truth), AllSlots(instance, truth)).size;
}

namespace {

void Search(std::span<const Money> costs, std::span<const Money> values, std::size_t next_user,
            std::vector<bool>& used, Money gain, Money& best) {
  if (next_user == costs.size()) {
    best = std::max(best, gain);
    return;
  }
  Search(costs, values, next_user + 1, used, gain, best);
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (used[s]) continue;
    used[s] = true;
    Search(costs, values, next_user + 1, used, gain + values[s] - costs[next_user], best);
    used[s] = false;
  }
}

}  // namespace

Money BruteForceOptimalGain(std::span<const Money> costs, std::span<const Money> values) {
  if (costs.size() > kBruteForceLimit || values.size() > kBruteForceLimit)
    throw std::invalid_argument("brute force limited to 8 users and 8 slots");
  std::vector<bool> used(values.size(), false);
  Money best;
  Search(costs, values, 0, used, Money(), best);
  return best;
}

}  // namespace opm
