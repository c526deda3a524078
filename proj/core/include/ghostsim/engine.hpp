#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "ghostsim/adversary.hpp"
#include "ghostsim/chain.hpp"
#include "ghostsim/forkchoice.hpp"
#include "ghostsim/honest.hpp"
#include "ghostsim/lottery.hpp"
#include "ghostsim/network.hpp"

namespace ghostsim {

struct PartitionSpec {
  PartitionLayout layout = PartitionLayout::kHalves;
  double jitter = 0.0;

  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

struct SimConfig {
  LotteryConfig lottery;
  ForkChoiceMode mode = ForkChoiceMode::kCommitteeGhost;
  Weight boost_weight = 0;
  Slot num_slots = 0;
  Slot confirmation_depth = 2;
  AttackConfig attack;
  TieBreakPolicy tiebreak = TieBreakPolicy::kAdversarialPreference;
  PartitionSpec partition;
  Slot stall_window = 10;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Throws Error{kInvalidConfig}.
void validate(const SimConfig& config);

struct MintEvent {
  Tick tick = 0;
  BlockId block;
  bool adversarial = false;
  bool withheld = false;
  bool equivocation = false;  // another block with the same (slot, proposer) exists
};

struct VoteEvent {
  Tick tick = 0;
  Vote vote;
  bool adversarial = false;
  bool equivocation = false;  // another vote with the same (voter, slot) exists
};

struct WithholdEvent {
  Tick tick = 0;
  std::uint64_t message = 0;
};

struct DeliverEvent {
  Tick tick = 0;  // send tick
  std::uint64_t message = 0;
  Tick at = 0;  // delivery tick
  std::string group;
  std::uint32_t recipients = 0;
};

struct ReleaseEvent {
  Tick tick = 0;
  std::string kind;
  std::uint32_t blocks = 0;
  std::uint32_t votes = 0;
};

struct HeadEvent {
  Tick tick = 0;
  BlockId head;
  std::vector<ValidatorId> holders;  // honest validators sharing this view
};

struct IgnoreEvent {
  Tick tick = 0;
  std::uint32_t votes = 0;
  std::vector<ValidatorId> holders;
};

struct OutcomeEvent {
  Tick tick = 0;
  std::string outcome;
};

using Event = std::variant<MintEvent, VoteEvent, WithholdEvent, DeliverEvent, ReleaseEvent,
                           HeadEvent, IgnoreEvent, OutcomeEvent>;

// Fork-choice picture of one view at one tick. Holders empty means the
// adversary's global view (every public message, plus withheld blocks flagged).
struct ViewSnapshot {
  Tick tick = 0;
  std::vector<ValidatorId> holders;
  std::vector<BlockId> blocks;  // insertion order
  std::vector<Weight> scores;   // parallel to blocks, boost included
  std::optional<BlockId> boosted;
  BlockId head;
  std::vector<BlockId> withheld;  // global snapshot only
};

struct LedgerRecord {
  Slot slot = 0;
  BlockId tip;
  std::uint32_t length = 0;
  std::vector<ValidatorId> holders;
};

struct BlockRecord {
  BlockPtr block;
  Tick minted = 0;
  bool adversarial = false;
};

struct FinalView {
  std::vector<ValidatorId> holders;
  BlockId head;
  std::vector<BlockId> ever_canonical;  // every block that was on this view's head chain
};

struct SafetyWitness {
  ValidatorId first_validator;
  Slot first_slot = 0;
  ValidatorId second_validator;
  Slot second_slot = 0;
  BlockId first_block;   // where the two ledgers diverge
  BlockId second_block;

  friend bool operator==(const SafetyWitness&, const SafetyWitness&) = default;
};

struct StallInterval {
  Slot first = 0;
  Slot last = 0;

  Slot length() const { return last - first + 1; }
  friend bool operator==(const StallInterval&, const StallInterval&) = default;
};

struct Trace {
  SimConfig config;
  SlotSchedule schedule;
  Partition partition;
  std::vector<Event> events;
  std::vector<BlockRecord> blocks;  // mint order, genesis first
  std::vector<ViewSnapshot> snapshots;
  std::vector<LedgerRecord> ledgers;
  std::vector<FinalView> final_views;
  bool attack_sustained = false;
  std::vector<SafetyWitness> safety_witnesses;
  std::vector<StallInterval> stalls;

  const BlockRecord* find_block(BlockId id) const;
  const Block& block(BlockId id) const;  // throws kUnknownBlock
  Ledger chain(BlockId tip) const;
  bool is_ancestor(BlockId ancestor, BlockId descendant) const;

  const ViewSnapshot& snapshot(Tick tick, ValidatorId validator) const;
  const ViewSnapshot& global_snapshot(Tick tick) const;
  std::optional<Ledger> ledger_of(ValidatorId validator, Slot slot) const;
  std::optional<BlockId> final_head(ValidatorId validator) const;
  std::vector<ValidatorId> honest_validators() const;
  Tick first_tick() const { return proposal_tick(1); }
  Tick last_tick() const { return voting_tick(config.num_slots); }

  std::unordered_map<BlockId, std::size_t> block_index;
};

// Runs ticks 2 .. 2*num_slots+1. Throws Error{kInvalidConfig | kSetupImpossible}.
Trace run(const SimConfig& config);

// Longest prefix of the view's fork-choice chain (evaluated at the voting tick
// of `slot`) whose tip is from slot <= slot - tconf.
Ledger ledger_at(const ValidatorView& view, Slot slot, Slot tconf, const SlotSchedule& schedule,
                 ForkChoiceMode mode, const TieBreaker& tiebreak, Weight boost_weight);

// One witness per divergent block pair among all recorded honest ledgers.
std::vector<SafetyWitness> detect_safety_violation(const Trace& trace);

// Maximal runs of at least `window` slots (from slot tconf+1 on) in which no
// honest block became permanently part of every honest validator's ledger.
std::vector<StallInterval> detect_liveness_stall(const Trace& trace, Slot window);

}  // namespace ghostsim
