#include "ghostsim/forkchoice.hpp"

#include <algorithm>
#include <limits>

#include "ghostsim/error.hpp"

namespace ghostsim {

std::string_view to_string(ForkChoiceMode mode) {
  switch (mode) {
    case ForkChoiceMode::kVanillaGhost:
      return "vanilla-ghost";
    case ForkChoiceMode::kCommitteeGhost:
      return "committee-ghost";
    case ForkChoiceMode::kCommitteeGhostLmd:
      return "committee-ghost-lmd";
  }
  return "?";
}

std::optional<ForkChoiceMode> parse_fork_choice_mode(std::string_view text) {
  for (auto m : {ForkChoiceMode::kVanillaGhost, ForkChoiceMode::kCommitteeGhost,
                 ForkChoiceMode::kCommitteeGhostLmd}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

bool LatestMessageTable::record(const Vote& vote) {
  auto it = entries_.find(vote.voter);
  if (it != entries_.end() && vote.slot <= it->second.slot) return false;
  entries_[vote.voter] = Entry{vote.slot, vote.target};
  return true;
}

std::optional<LatestMessageTable::Entry> LatestMessageTable::get(ValidatorId voter) const {
  auto it = entries_.find(voter);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool VoteStore::record(const Vote& vote) {
  auto& targets = pairs_[pair_key(vote.voter, vote.slot)];
  if (std::find(targets.begin(), targets.end(), vote.target) != targets.end()) return false;
  targets.push_back(vote.target);
  votes_.push_back(vote);
  return true;
}

bool VoteStore::has_pair(ValidatorId voter, Slot slot) const {
  return pairs_.contains(pair_key(voter, slot));
}

std::size_t VoteStore::targets_for_pair(ValidatorId voter, Slot slot) const {
  auto it = pairs_.find(pair_key(voter, slot));
  return it == pairs_.end() ? 0 : it->second.size();
}

RecordResult record_vote(VoteStore& store, LatestMessageTable& table, const Vote& vote,
                         ForkChoiceMode mode) {
  RecordResult r;
  r.stored = store.record(vote);
  if (mode == ForkChoiceMode::kCommitteeGhostLmd) r.table_updated = table.record(vote);
  return r;
}

std::vector<Weight> subtree_weights(const ForkChoiceContext& ctx) {
  const BlockTree& tree = ctx.tree;
  const std::size_t n = tree.size();
  std::vector<Weight> own(n, 0);
  std::vector<Weight> extra(n, 0);

  switch (ctx.mode) {
    case ForkChoiceMode::kVanillaGhost:
      std::fill(own.begin(), own.end(), 1);
      break;
    case ForkChoiceMode::kCommitteeGhostLmd:
      for (const auto& [voter, entry] : ctx.latest.entries()) {
        if (entry.slot >= ctx.current_slot) continue;
        if (auto idx = tree.index_of(entry.target)) ++own[*idx];
      }
      break;
    case ForkChoiceMode::kCommitteeGhost: {
      // A (voter, slot) pair counts once in every subtree holding one of its
      // targets. Single-target pairs are plain point weights; equivocating
      // pairs mark the union of their target paths.
      std::map<std::pair<Slot, ValidatorId>, std::vector<std::size_t>> equivocating;
      for (const Vote& v : ctx.votes.votes()) {
        if (v.slot >= ctx.current_slot) continue;
        auto idx = tree.index_of(v.target);
        if (!idx) continue;
        if (ctx.votes.targets_for_pair(v.voter, v.slot) == 1) {
          ++own[*idx];
        } else {
          equivocating[{v.slot, v.voter}].push_back(*idx);
        }
      }
      std::vector<std::size_t> stamp(n, std::numeric_limits<std::size_t>::max());
      std::size_t next_stamp = 0;
      for (const auto& [pair, targets] : equivocating) {
        const std::size_t s = next_stamp++;
        for (std::size_t j : targets) {
          for (std::size_t b = j; b != BlockTree::kNoParent && stamp[b] != s;
               b = tree.parent_index(b)) {
            stamp[b] = s;
            ++extra[b];
          }
        }
      }
      break;
    }
  }

  // Children always have a larger index than their parent.
  std::vector<Weight> total = own;
  for (std::size_t i = n; i-- > 1;) total[tree.parent_index(i)] += total[i];
  for (std::size_t i = 0; i < n; ++i) total[i] += extra[i];
  return total;
}

std::vector<Weight> subtree_scores(const ForkChoiceContext& ctx) {
  std::vector<Weight> scores = subtree_weights(ctx);
  if (ctx.boost.active_at(ctx.current_slot)) {
    if (auto idx = ctx.tree.index_of(*ctx.boost.boosted_block)) {
      for (std::size_t b = *idx; b != BlockTree::kNoParent; b = ctx.tree.parent_index(b)) {
        scores[b] += ctx.boost.weight;
      }
    }
  }
  return scores;
}

Weight subtree_weight(const ForkChoiceContext& ctx, BlockId root) {
  const std::size_t idx = ctx.tree.index_at(root);
  return subtree_scores(ctx)[idx];
}

bool boost_eligibility(const BlockTree&, const SlotSchedule& schedule, const Block& proposal,
                       Slot slot) {
  return !proposal.is_genesis() && proposal.slot == slot && schedule.has_slot(slot) &&
         proposal.proposer == schedule.proposer(slot);
}

BoostState find_boost(const BlockTree& tree, const SlotSchedule& schedule, Slot slot,
                      Weight boost_weight) {
  BoostState boost;
  for (std::size_t i = 1; i < tree.size(); ++i) {
    if (boost_eligibility(tree, schedule, tree.block(i), slot)) {
      boost.boosted_block = tree.block(i).id;
      boost.weight = boost_weight;
      boost.slot = slot;
      break;
    }
  }
  return boost;
}

std::string_view to_string(TieBreakPolicy policy) {
  switch (policy) {
    case TieBreakPolicy::kAdversarialPreference:
      return "adversarial-preference";
    case TieBreakPolicy::kFirstInserted:
      return "first-inserted";
    case TieBreakPolicy::kLowestId:
      return "lowest-id";
  }
  return "?";
}

std::optional<TieBreakPolicy> parse_tie_break_policy(std::string_view text) {
  for (auto p : {TieBreakPolicy::kAdversarialPreference, TieBreakPolicy::kFirstInserted,
                 TieBreakPolicy::kLowestId}) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

TieBreaker::TieBreaker(TieBreakPolicy policy, std::vector<BlockId> preferred)
    : policy_(policy), preferred_(std::move(preferred)) {
  for (std::size_t i = 0; i < preferred_.size(); ++i) rank_.emplace(preferred_[i], i);
}

std::size_t TieBreaker::choose(const BlockTree& tree,
                               std::span<const std::size_t> candidates) const {
  std::size_t best = candidates.front();
  switch (policy_) {
    case TieBreakPolicy::kLowestId:
      for (std::size_t c : candidates) {
        if (tree.block(c).id < tree.block(best).id) best = c;
      }
      return best;
    case TieBreakPolicy::kAdversarialPreference: {
      std::size_t best_rank = std::numeric_limits<std::size_t>::max();
      for (std::size_t c : candidates) {
        auto it = rank_.find(tree.block(c).id);
        if (it != rank_.end() && it->second < best_rank) {
          best_rank = it->second;
          best = c;
        }
      }
      if (best_rank != std::numeric_limits<std::size_t>::max()) return best;
      [[fallthrough]];
    }
    case TieBreakPolicy::kFirstInserted:
      return *std::min_element(candidates.begin(), candidates.end());
  }
  return best;
}

HeadResult ghost_head_with_scores(const ForkChoiceContext& ctx, const TieBreaker& tiebreak) {
  HeadResult r;
  r.scores = subtree_scores(ctx);
  std::size_t at = 0;
  std::vector<std::size_t> best;
  while (!ctx.tree.children_of(at).empty()) {
    best.clear();
    Weight top = std::numeric_limits<Weight>::min();
    for (std::size_t c : ctx.tree.children_of(at)) {
      if (r.scores[c] > top) {
        top = r.scores[c];
        best.assign(1, c);
      } else if (r.scores[c] == top) {
        best.push_back(c);
      }
    }
    at = best.size() == 1 ? best.front() : tiebreak.choose(ctx.tree, best);
  }
  r.head = ctx.tree.block(at).id;
  return r;
}

BlockId ghost_head(const ForkChoiceContext& ctx, const TieBreaker& tiebreak) {
  return ghost_head_with_scores(ctx, tiebreak).head;
}

}  // namespace ghostsim
