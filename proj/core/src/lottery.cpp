#include "ghostsim/lottery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ghostsim/error.hpp"
#include "rng.hpp"

namespace ghostsim {
namespace {

std::mt19937_64 slot_rng(std::uint64_t seed, Slot slot) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(slot)));
}

// First `count` entries of a partial Fisher-Yates shuffle of [lo, hi).
void sample_without_replacement(std::mt19937_64& rng, std::uint32_t lo, std::uint32_t hi,
                                std::uint32_t count, std::vector<ValidatorId>& out) {
  std::vector<std::uint32_t> ids(hi - lo);
  std::iota(ids.begin(), ids.end(), lo);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::uint32_t>(uniform_below(rng, ids.size() - i));
    std::swap(ids[i], ids[j]);
    out.push_back(ValidatorId{ids[i]});
  }
}

}  // namespace

Fraction Fraction::from_double(double value) {
  constexpr std::int64_t kScale = 1'000'000'000;
  Fraction f{std::llround(value * static_cast<double>(kScale)), kScale};
  const std::int64_t g = std::gcd(f.num < 0 ? -f.num : f.num, f.den);
  if (g > 1) {
    f.num /= g;
    f.den /= g;
  }
  return f;
}

SlotSchedule::SlotSchedule(std::uint32_t num_validators, std::uint32_t num_adversarial,
                           std::vector<SlotAssignment> slots)
    : num_validators_(num_validators), num_adversarial_(num_adversarial), slots_(std::move(slots)) {}

const SlotAssignment& SlotSchedule::at(Slot slot) const {
  if (!has_slot(slot)) {
    throw Error(ErrorCode::kInvalidConfig, "slot " + std::to_string(slot) + " outside schedule");
  }
  return slots_[static_cast<std::size_t>(slot - 1)];
}

bool SlotSchedule::in_committee(Slot slot, ValidatorId v) const {
  if (!has_slot(slot)) return false;
  const auto& committee = at(slot).committee;
  return std::binary_search(committee.begin(), committee.end(), v);
}

std::vector<ValidatorId> SlotSchedule::adversarial_members(Slot slot) const {
  std::vector<ValidatorId> out;
  for (ValidatorId v : committee(slot)) {
    if (is_adversarial(v)) out.push_back(v);
  }
  return out;
}

std::uint32_t SlotSchedule::honest_member_count(Slot slot) const {
  std::uint32_t n = 0;
  for (ValidatorId v : committee(slot)) n += is_adversarial(v) ? 0 : 1;
  return n;
}

void validate(const LotteryConfig& config) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (config.num_validators == 0) fail("num_validators must be >= 1");
  if (config.committee_size > config.num_validators) fail("committee_size exceeds num_validators");
  const Fraction& beta = config.adversary_fraction;
  if (beta.den <= 0 || beta.num < 0 || beta.num >= beta.den) {
    fail("adversary_fraction must lie in [0, 1)");
  }
  const std::uint32_t adversarial = config.num_adversarial();
  const std::uint32_t honest = config.num_validators - adversarial;
  if (config.sampling == SamplingMode::kExactFraction) {
    const auto per_committee = static_cast<std::uint32_t>(beta.floor_mul(config.committee_size));
    if (per_committee > adversarial || config.committee_size - per_committee > honest) {
      fail("exact-fraction committee cannot be filled from the validator set");
    }
  }
  for (const SlotOverride& o : config.overrides) {
    if (o.first < 1 || o.last < o.first) fail("override slot range must satisfy 1 <= first <= last");
    if (o.proposer && o.proposer->index >= config.num_validators) fail("override proposer out of range");
    if (o.proposer_class == ProposerClass::kAdversarial && adversarial == 0) {
      fail("override asks for an adversarial proposer but there are no adversarial validators");
    }
    if (o.proposer_class == ProposerClass::kHonest && honest == 0) {
      fail("override asks for an honest proposer but there are no honest validators");
    }
    if (o.committee) {
      auto sorted = *o.committee;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        fail("override committee repeats a validator");
      }
      if (!sorted.empty() && sorted.back().index >= config.num_validators) {
        fail("override committee member out of range");
      }
    }
  }
}

SlotSchedule draw_schedule(const LotteryConfig& config, Slot num_slots) {
  validate(config);
  if (num_slots < 1) throw Error(ErrorCode::kInvalidConfig, "num_slots must be >= 1");

  const std::uint32_t n = config.num_validators;
  const std::uint32_t adversarial = config.num_adversarial();
  std::vector<SlotAssignment> slots;
  slots.reserve(static_cast<std::size_t>(num_slots));

  for (Slot t = 1; t <= num_slots; ++t) {
    auto rng = slot_rng(config.seed, t);
    SlotAssignment a;
    a.proposer = ValidatorId{static_cast<std::uint32_t>(uniform_below(rng, n))};
    if (config.sampling == SamplingMode::kRandom) {
      sample_without_replacement(rng, 0, n, config.committee_size, a.committee);
    } else {
      const auto per_committee =
          static_cast<std::uint32_t>(config.adversary_fraction.floor_mul(config.committee_size));
      sample_without_replacement(rng, 0, adversarial, per_committee, a.committee);
      sample_without_replacement(rng, adversarial, n, config.committee_size - per_committee,
                                 a.committee);
    }

    for (const SlotOverride& o : config.overrides) {
      if (t < o.first || t > o.last) continue;
      if (o.proposer) {
        a.proposer = *o.proposer;
      } else if (o.proposer_class) {
        const bool want_adversarial = *o.proposer_class == ProposerClass::kAdversarial;
        if ((a.proposer.index < adversarial) != want_adversarial) {
          a.proposer = want_adversarial
                           ? ValidatorId{static_cast<std::uint32_t>(uniform_below(rng, adversarial))}
                           : ValidatorId{adversarial + static_cast<std::uint32_t>(
                                                           uniform_below(rng, n - adversarial))};
        }
      }
      if (o.committee) a.committee = *o.committee;
    }

    std::sort(a.committee.begin(), a.committee.end());
    a.adversarial_proposer = a.proposer.index < adversarial;
    slots.push_back(std::move(a));
  }
  return SlotSchedule(n, adversarial, std::move(slots));
}

bool is_adversarial(const SlotSchedule&, ValidatorId v, const LotteryConfig& config) {
  return v.index < config.num_adversarial();
}

}  // namespace ghostsim
