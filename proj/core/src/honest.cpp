#include "ghostsim/honest.hpp"

#include "ghostsim/error.hpp"

namespace ghostsim {

ReceiveStats& ReceiveStats::operator+=(const ReceiveStats& other) {
  blocks_added += other.blocks_added;
  votes_counted += other.votes_counted;
  votes_ignored += other.votes_ignored;
  dropped += other.dropped;
  pended += other.pended;
  return *this;
}

ReceiveStats ValidatorView::on_receive(const Message& message, const SlotSchedule& schedule,
                                       ForkChoiceMode mode) {
  ReceiveStats stats;
  if (message.is_block()) {
    ingest_block(std::get<BlockPtr>(message.payload), schedule, mode, stats);
  } else {
    ingest_vote(message.vote(), schedule, mode, stats);
  }
  return stats;
}

std::size_t ValidatorView::pending_count() const {
  std::size_t n = 0;
  for (const auto& [id, waiting] : pending_) n += waiting.size();
  return n;
}

ForkChoiceContext ValidatorView::context(const SlotSchedule& schedule, ForkChoiceMode mode,
                                         Slot slot, Weight boost_weight, bool with_boost) const {
  BoostState boost;
  if (with_boost && boost_weight > 0) boost = find_boost(tree_, schedule, slot, boost_weight);
  return ForkChoiceContext{tree_, votes_, latest_, mode, boost, slot};
}

void ValidatorView::ingest_block(const BlockPtr& block, const SlotSchedule& schedule,
                                 ForkChoiceMode mode, ReceiveStats& stats) {
  if (tree_.contains(block->id)) return;
  if (!tree_.contains(block->parent)) {
    pending_[block->parent].push_back(block);
    ++stats.pended;
    return;
  }
  if (block->slot <= tree_.at(block->parent).slot) {
    ++stats.dropped;
    return;
  }
  tree_.append(block);
  ++stats.blocks_added;
  for (const Vote& v : block->carried_votes) ingest_vote(v, schedule, mode, stats);
  flush_waiting_on(block->id, schedule, mode, stats);
}

void ValidatorView::ingest_vote(const Vote& vote, const SlotSchedule& schedule, ForkChoiceMode mode,
                                ReceiveStats& stats) {
  if (!tree_.contains(vote.target)) {
    pending_[vote.target].push_back(vote);
    ++stats.pended;
    return;
  }
  if (!is_valid_vote(tree_, schedule, vote)) {
    ++stats.dropped;
    return;
  }
  const RecordResult r = record_vote(votes_, latest_, vote, mode);
  const bool counted = mode == ForkChoiceMode::kCommitteeGhostLmd ? r.table_updated : r.stored;
  ++(counted ? stats.votes_counted : stats.votes_ignored);
}

void ValidatorView::flush_waiting_on(BlockId id, const SlotSchedule& schedule, ForkChoiceMode mode,
                                     ReceiveStats& stats) {
  auto it = pending_.find(id);
  if (it == pending_.end()) return;
  std::vector<Payload> waiting = std::move(it->second);
  pending_.erase(it);
  for (const Payload& p : waiting) {
    if (const auto* block = std::get_if<BlockPtr>(&p)) {
      ingest_block(*block, schedule, mode, stats);
    } else {
      ingest_vote(std::get<Vote>(p), schedule, mode, stats);
    }
  }
}

BlockPtr on_propose(const ValidatorView& view, ValidatorId owner, Slot slot,
                    const SlotSchedule& schedule, ForkChoiceMode mode, const TieBreaker& tiebreak) {
  if (!schedule.has_slot(slot) || schedule.proposer(slot) != owner) {
    throw Error(ErrorCode::kNotProposer, "validator " + std::to_string(owner.index) +
                                             " does not propose in slot " + std::to_string(slot));
  }
  const BlockId head = ghost_head(view.context(schedule, mode, slot, 0, false), tiebreak);
  return make_block(slot, owner, head);
}

Vote on_vote(const ValidatorView& view, ValidatorId voter, Slot slot, const SlotSchedule& schedule,
             ForkChoiceMode mode, const TieBreaker& tiebreak, Weight boost_weight) {
  if (!schedule.in_committee(slot, voter)) {
    throw Error(ErrorCode::kNotCommitteeMember, "validator " + std::to_string(voter.index) +
                                                    " is not on the committee of slot " +
                                                    std::to_string(slot));
  }
  const BlockId head =
      ghost_head(view.context(schedule, mode, slot, boost_weight, true), tiebreak);
  return Vote{voter, slot, head};
}

}  // namespace ghostsim
