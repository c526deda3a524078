#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace ghostsim {

using Slot = std::int64_t;
using Tick = std::int64_t;
using Weight = std::int64_t;

struct ValidatorId {
  std::uint32_t index = 0;

  friend auto operator<=>(const ValidatorId&, const ValidatorId&) = default;
};

// Content-derived block identifier. Rendered as 16 lowercase hex digits.
struct BlockId {
  std::uint64_t value = 0;

  friend auto operator<=>(const BlockId&, const BlockId&) = default;
};

std::string to_string(BlockId id);

// Proposal happens at tick 2t, voting at tick 2t+1; one tick is the delay bound.
constexpr Tick proposal_tick(Slot slot) { return 2 * slot; }
constexpr Tick voting_tick(Slot slot) { return 2 * slot + 1; }
constexpr Slot slot_of(Tick tick) { return tick / 2; }
constexpr bool is_voting_tick(Tick tick) { return tick % 2 == 1; }

}  // namespace ghostsim

template <>
struct std::hash<ghostsim::BlockId> {
  std::size_t operator()(const ghostsim::BlockId& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.value);
  }
};

template <>
struct std::hash<ghostsim::ValidatorId> {
  std::size_t operator()(const ghostsim::ValidatorId& v) const noexcept {
    return std::hash<std::uint32_t>{}(v.index);
  }
};
