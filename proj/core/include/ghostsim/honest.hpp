#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ghostsim/chain.hpp"
#include "ghostsim/forkchoice.hpp"
#include "ghostsim/lottery.hpp"
#include "ghostsim/network.hpp"

namespace ghostsim {

struct ReceiveStats {
  std::uint32_t blocks_added = 0;
  std::uint32_t votes_counted = 0;   // changed what fork choice counts
  std::uint32_t votes_ignored = 0;   // valid but superseded (duplicate, LMD not later)
  std::uint32_t dropped = 0;         // invalid against tree or schedule
  std::uint32_t pended = 0;          // waiting for an unknown block

  ReceiveStats& operator+=(const ReceiveStats& other);
};

// One validator's local knowledge. Blocks whose ancestry is incomplete and
// votes for unknown blocks wait in `pending` until the missing block arrives.
class ValidatorView {
 public:
  ReceiveStats on_receive(const Message& message, const SlotSchedule& schedule,
                          ForkChoiceMode mode);

  const BlockTree& tree() const { return tree_; }
  const VoteStore& votes() const { return votes_; }
  const LatestMessageTable& latest() const { return latest_; }
  std::size_t pending_count() const;

  // Context for fork choice during `slot`; boost from this slot's proposal
  // when `with_boost` is set and one has been received.
  ForkChoiceContext context(const SlotSchedule& schedule, ForkChoiceMode mode, Slot slot,
                            Weight boost_weight, bool with_boost) const;

 private:
  void ingest_block(const BlockPtr& block, const SlotSchedule& schedule, ForkChoiceMode mode,
                    ReceiveStats& stats);
  void ingest_vote(const Vote& vote, const SlotSchedule& schedule, ForkChoiceMode mode,
                   ReceiveStats& stats);
  void flush_waiting_on(BlockId id, const SlotSchedule& schedule, ForkChoiceMode mode,
                        ReceiveStats& stats);

  BlockTree tree_;
  VoteStore votes_;
  LatestMessageTable latest_;
  std::unordered_map<BlockId, std::vector<Payload>> pending_;
};

// New block on the (unboosted) fork-choice head. Throws Error{kNotProposer}.
BlockPtr on_propose(const ValidatorView& view, ValidatorId owner, Slot slot,
                    const SlotSchedule& schedule, ForkChoiceMode mode, const TieBreaker& tiebreak);

// Vote for the fork-choice head with this slot's boost applied.
// Throws Error{kNotCommitteeMember}.
Vote on_vote(const ValidatorView& view, ValidatorId voter, Slot slot, const SlotSchedule& schedule,
             ForkChoiceMode mode, const TieBreaker& tiebreak, Weight boost_weight);

}  // namespace ghostsim
