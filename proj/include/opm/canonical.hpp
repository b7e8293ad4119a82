#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "opm/market.hpp"

namespace opm {

// Offline-optimal assignment: slots by decreasing key, users by increasing key,
// zipped while the slot's value key exceeds the user's cost key. Locations are
// 1-indexed.
struct CanonicalAssignment {
  std::vector<KeyedUser> users;  // increasing key
  std::vector<KeyedSlot> slots;  // decreasing key
  std::size_t size = 0;          // pairs at locations 1..size

  const KeyedUser& user_at(std::size_t location) const { return users[location - 1]; }
  const KeyedSlot& slot_at(std::size_t location) const { return slots[location - 1]; }
  Assignment ToAssignment() const;
  // Σ v(b_i) - c(p_i) over the retained pairs.
  Money Gain() const;
};

CanonicalAssignment Canonicalize(std::vector<KeyedUser> users, std::vector<KeyedSlot> slots);

// |S_c(P, B)| over the true market.
std::size_t Tau(const Instance& instance);

inline constexpr std::size_t kBruteForceLimit = 8;

// Maximum gain over every (partial) matching, by exhaustive search on amounts.
// Throws std::invalid_argument when either side exceeds kBruteForceLimit.
Money BruteForceOptimalGain(std::span<const Money> costs, std::span<const Money> values);

}  // namespace opm
