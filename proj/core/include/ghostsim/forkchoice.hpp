#pragma once

#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ghostsim/chain.hpp"
#include "ghostsim/lottery.hpp"
#include "ghostsim/types.hpp"

namespace ghostsim {

enum class ForkChoiceMode { kVanillaGhost, kCommitteeGhost, kCommitteeGhostLmd };

std::string_view to_string(ForkChoiceMode mode);
std::optional<ForkChoiceMode> parse_fork_choice_mode(std::string_view text);

// Per-validator latest vote. An entry only moves to a strictly later slot, so
// a second vote for an already recorded slot (an equivocation) never wins.
class LatestMessageTable {
 public:
  struct Entry {
    Slot slot = 0;
    BlockId target;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  bool record(const Vote& vote);
  std::optional<Entry> get(ValidatorId voter) const;
  const std::map<ValidatorId, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<ValidatorId, Entry> entries_;
};

// Every distinct valid vote seen, in arrival order. Equivocating votes for the
// same (voter, slot) are all kept; weight counting deduplicates them per subtree.
class VoteStore {
 public:
  bool record(const Vote& vote);  // false if this exact vote was already stored

  const std::vector<Vote>& votes() const { return votes_; }
  bool has_pair(ValidatorId voter, Slot slot) const;
  std::size_t pair_count() const { return pairs_.size(); }
  std::size_t targets_for_pair(ValidatorId voter, Slot slot) const;

 private:
  static std::uint64_t pair_key(ValidatorId voter, Slot slot) {
    return (static_cast<std::uint64_t>(slot) << 32) | voter.index;
  }

  std::vector<Vote> votes_;
  std::unordered_map<std::uint64_t, std::vector<BlockId>> pairs_;  // targets per (voter, slot)
};

struct BoostState {
  std::optional<BlockId> boosted_block;
  Weight weight = 0;
  Slot slot = 0;

  bool active_at(Slot now) const { return boosted_block.has_value() && slot == now; }
};

struct RecordResult {
  bool stored = false;         // new entry in the vote store
  bool table_updated = false;  // latest-message entry replaced or created
};

RecordResult record_vote(VoteStore& store, LatestMessageTable& table, const Vote& vote,
                         ForkChoiceMode mode);

// Everything fork choice reads. `current_slot` filters votes (only slots
// strictly before it count) and decides whether the boost is live.
struct ForkChoiceContext {
  const BlockTree& tree;
  const VoteStore& votes;
  const LatestMessageTable& latest;
  ForkChoiceMode mode = ForkChoiceMode::kVanillaGhost;
  BoostState boost;
  Slot current_slot = 0;
};

// Subtree weight of every block, indexed by tree index, boost included.
std::vector<Weight> subtree_scores(const ForkChoiceContext& ctx);

// Same but without the boost addend.
std::vector<Weight> subtree_weights(const ForkChoiceContext& ctx);

// Throws Error{kUnknownBlock}.
Weight subtree_weight(const ForkChoiceContext& ctx, BlockId root);

bool boost_eligibility(const BlockTree& tree, const SlotSchedule& schedule, const Block& proposal,
                       Slot slot);

// Boost for `slot`: the first-inserted eligible proposal known to the tree.
BoostState find_boost(const BlockTree& tree, const SlotSchedule& schedule, Slot slot,
                      Weight boost_weight);

enum class TieBreakPolicy { kAdversarialPreference, kFirstInserted, kLowestId };

std::string_view to_string(TieBreakPolicy policy);
std::optional<TieBreakPolicy> parse_tie_break_policy(std::string_view text);

class TieBreaker {
 public:
  TieBreaker() = default;
  explicit TieBreaker(TieBreakPolicy policy, std::vector<BlockId> preferred = {});

  TieBreakPolicy policy() const { return policy_; }
  const std::vector<BlockId>& preferred() const { return preferred_; }

  // `candidates` are tree indices, non-empty. AdversarialPreference picks the
  // candidate that appears earliest in the preference list, otherwise the
  // first inserted one.
  std::size_t choose(const BlockTree& tree, std::span<const std::size_t> candidates) const;

 private:
  TieBreakPolicy policy_ = TieBreakPolicy::kFirstInserted;
  std::vector<BlockId> preferred_;
  std::unordered_map<BlockId, std::size_t> rank_;
};

struct HeadResult {
  BlockId head;
  std::vector<Weight> scores;  // by tree index, boost included
};

HeadResult ghost_head_with_scores(const ForkChoiceContext& ctx, const TieBreaker& tiebreak);
BlockId ghost_head(const ForkChoiceContext& ctx, const TieBreaker& tiebreak);

}  // namespace ghostsim
