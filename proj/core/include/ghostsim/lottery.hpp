#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ghostsim/types.hpp"

namespace ghostsim {

// Exact non-negative rational. The adversary fraction is held this way so
// that floor(beta * n) never suffers from binary rounding (0.29 * 100 == 28.999...).
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction from_double(double value);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::int64_t floor_mul(std::int64_t n) const { return (n * num) / den; }

  friend bool operator==(const Fraction& a, const Fraction& b) {
    return a.num * b.den == b.num * a.den;
  }
};

enum class SamplingMode { kRandom, kExactFraction };
enum class ProposerClass { kAdversarial, kHonest };

// Replaces parts of the drawn schedule for the slots [first, last].
// A fixed proposer beats a proposer class; a fixed committee replaces the draw.
struct SlotOverride {
  Slot first = 1;
  Slot last = 1;
  std::optional<ValidatorId> proposer;
  std::optional<ProposerClass> proposer_class;
  std::optional<std::vector<ValidatorId>> committee;

  friend bool operator==(const SlotOverride&, const SlotOverride&) = default;
};

struct LotteryConfig {
  std::uint32_t num_validators = 0;
  std::uint32_t committee_size = 0;
  Fraction adversary_fraction;
  std::uint64_t seed = 0;
  SamplingMode sampling = SamplingMode::kRandom;
  std::vector<SlotOverride> overrides;

  // Adversarial validators are the id prefix [0, num_adversarial()).
  std::uint32_t num_adversarial() const {
    return static_cast<std::uint32_t>(adversary_fraction.floor_mul(num_validators));
  }

  friend bool operator==(const LotteryConfig&, const LotteryConfig&) = default;
};

struct SlotAssignment {
  ValidatorId proposer;
  std::vector<ValidatorId> committee;  // sorted ascending
  bool adversarial_proposer = false;

  friend bool operator==(const SlotAssignment&, const SlotAssignment&) = default;
};

class SlotSchedule {
 public:
  SlotSchedule() = default;
  SlotSchedule(std::uint32_t num_validators, std::uint32_t num_adversarial,
               std::vector<SlotAssignment> slots);

  Slot num_slots() const { return static_cast<Slot>(slots_.size()); }
  std::uint32_t num_validators() const { return num_validators_; }
  std::uint32_t num_adversarial() const { return num_adversarial_; }

  bool has_slot(Slot slot) const { return slot >= 1 && slot <= num_slots(); }
  const SlotAssignment& at(Slot slot) const;
  ValidatorId proposer(Slot slot) const { return at(slot).proposer; }
  const std::vector<ValidatorId>& committee(Slot slot) const { return at(slot).committee; }
  bool adversarial_proposer(Slot slot) const { return at(slot).adversarial_proposer; }
  bool in_committee(Slot slot, ValidatorId v) const;
  bool is_adversarial(ValidatorId v) const { return v.index < num_adversarial_; }

  // Committee members of `slot` split by control.
  std::vector<ValidatorId> adversarial_members(Slot slot) const;
  std::uint32_t honest_member_count(Slot slot) const;

  friend bool operator==(const SlotSchedule&, const SlotSchedule&) = default;

 private:
  std::uint32_t num_validators_ = 0;
  std::uint32_t num_adversarial_ = 0;
  std::vector<SlotAssignment> slots_;  // index 0 holds slot 1
};

// Deterministic in (config, num_slots). Throws Error{kInvalidConfig}.
SlotSchedule draw_schedule(const LotteryConfig& config, Slot num_slots);

bool is_adversarial(const SlotSchedule& schedule, ValidatorId v, const LotteryConfig& config);

void validate(const LotteryConfig& config);

}  // namespace ghostsim
