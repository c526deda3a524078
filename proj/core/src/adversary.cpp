#include "ghostsim/adversary.hpp"

#include <algorithm>

#include "ghostsim/error.hpp"

namespace ghostsim {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone:
      return "none";
    case AttackKind::kAvalanche:
      return "avalanche";
    case AttackKind::kBalancing:
      return "balancing";
  }
  return "?";
}

std::optional<AttackKind> parse_attack_kind(std::string_view text) {
  for (auto k : {AttackKind::kNone, AttackKind::kAvalanche, AttackKind::kBalancing}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(SetupMode mode) {
  return mode == SetupMode::kStrict ? "strict" : "opportunistic";
}

std::optional<SetupMode> parse_setup_mode(std::string_view text) {
  if (text == "strict") return SetupMode::kStrict;
  if (text == "opportunistic") return SetupMode::kOpportunistic;
  return std::nullopt;
}

std::string_view to_string(AvalanchePhase phase) {
  switch (phase) {
    case AvalanchePhase::kAccumulating:
      return "accumulating";
    case AvalanchePhase::kWaiting:
      return "waiting";
    case AvalanchePhase::kDone:
      return "done";
  }
  return "?";
}

std::string_view to_string(BalancingPhase phase) {
  switch (phase) {
    case BalancingPhase::kWaiting:
      return "waiting";
    case BalancingPhase::kSetup:
      return "setup";
    case BalancingPhase::kMaintain:
      return "maintain";
  }
  return "?";
}

namespace {

bool vote_weighted(ForkChoiceMode mode) { return mode != ForkChoiceMode::kVanillaGhost; }

// Weights as they will stand once everything sent up to now is counted.
std::vector<Weight> global_weights(const TickContext& ctx) {
  ForkChoiceContext fc = ctx.global.context(ctx.schedule, ctx.mode, ctx.slot + 1, 0, false);
  return subtree_weights(fc);
}

}  // namespace

std::vector<BlockPtr> build_displacement_subtree(std::span<const BlockPtr> pool, BlockId tip,
                                                 std::uint32_t& next_disambiguator) {
  if (pool.size() < 2) {
    throw Error(ErrorCode::kPoolTooSmall,
                "displacement needs two withheld blocks, have " + std::to_string(pool.size()));
  }
  std::vector<BlockPtr> out;
  out.reserve(pool.size());
  auto reparent = [&](const BlockPtr& b, BlockId parent) {
    if (b->parent == parent) return b;
    return make_block(b->slot, b->proposer, parent, next_disambiguator++);
  };
  out.push_back(reparent(pool.front(), tip));
  for (std::size_t i = 1; i < pool.size(); ++i) out.push_back(reparent(pool[i], out.front()->id));
  return out;
}

Weight honest_branch_weight(const TickContext& ctx, BlockId tip) {
  const BlockTree& tree = ctx.global.tree();
  auto idx = tree.index_of(tip);
  if (!idx || tree.children_of(*idx).empty()) return 0;
  const std::vector<Weight> weights = global_weights(ctx);
  Weight best = 0;
  for (std::size_t c : tree.children_of(*idx)) best = std::max(best, weights[c]);
  return best;
}

Weight pool_weight(const TickContext& ctx, std::span<const BlockPtr> pool) {
  if (pool.empty()) return 0;
  if (!vote_weighted(ctx.mode)) return static_cast<Weight>(pool.size());
  Weight seats = 0;
  for (Slot s = pool.front()->slot; s <= ctx.slot && ctx.schedule.has_slot(s); ++s) {
    seats += static_cast<Weight>(ctx.schedule.adversarial_members(s).size());
  }
  return seats;
}

std::vector<AdversaryAction> avalanche_on_tick(AvalancheState& state, const TickContext& ctx) {
  std::vector<AdversaryAction> actions;
  if (state.phase == AvalanchePhase::kDone) return actions;
  if (state.tip == BlockId{}) {
    state.tip = ctx.global.tree().genesis();
    state.fork_point = state.tip;
  }

  if (!is_voting_tick(ctx.tick) && ctx.schedule.adversarial_proposer(ctx.slot)) {
    const BlockId parent = state.pool.empty() ? state.tip : state.pool.front()->id;
    BlockPtr block = make_block(ctx.slot, ctx.schedule.proposer(ctx.slot), parent);
    state.pool.push_back(block);
    actions.push_back(AdversaryAction{AdversaryAction::Kind::kWithhold, {block}, {}, ""});
  }
  if (state.phase == AvalanchePhase::kAccumulating && ctx.slot > state.initial_k) {
    state.phase = AvalanchePhase::kWaiting;
  }

  // Vanilla weight moves with proposals, committee weight with votes.
  const bool check_tick = vote_weighted(ctx.mode) == is_voting_tick(ctx.tick);
  if (!check_tick) return actions;

  const Weight honest = honest_branch_weight(ctx, state.tip);
  const Weight adversarial = pool_weight(ctx, state.pool);
  if (honest > adversarial) {
    state.phase = AvalanchePhase::kDone;
    actions.push_back(AdversaryAction{AdversaryAction::Kind::kNote, {}, {}, "AVALANCHE_EXHAUSTED"});
    return actions;
  }
  if (state.pool.size() < 2 || honest == 0) return actions;

  Weight honest_next = 0;
  Weight adversarial_next = 0;
  const Slot next = ctx.slot + 1;
  if (ctx.schedule.has_slot(next)) {
    if (vote_weighted(ctx.mode)) {
      honest_next = ctx.schedule.honest_member_count(next);
      adversarial_next = static_cast<Weight>(ctx.schedule.adversarial_members(next).size());
    } else {
      (ctx.schedule.adversarial_proposer(next) ? adversarial_next : honest_next) = 1;
    }
  }
  if (adversarial != honest && honest + honest_next <= adversarial + adversarial_next) {
    return actions;
  }

  std::vector<BlockPtr> released =
      build_displacement_subtree(state.pool, state.tip, state.next_disambiguator);
  AdversaryAction release{AdversaryAction::Kind::kBroadcast, {}, {}, "avalanche"};
  for (const BlockPtr& b : released) release.first.push_back(b);
  if (vote_weighted(ctx.mode)) {
    const BlockPtr& b1 = released[0];
    const BlockPtr& b2 = released[1];
    for (Slot s = b1->slot; s <= ctx.slot; ++s) {
      const BlockId target = s >= b2->slot ? b2->id : b1->id;
      for (ValidatorId v : ctx.schedule.adversarial_members(s)) {
        release.first.push_back(Vote{v, s, target});
      }
    }
  }
  actions.push_back(std::move(release));

  ++state.releases;
  state.fork_point = state.tip;
  state.tip = released[1]->id;
  state.preferred.push_back(released[0]->id);
  state.preferred.push_back(released[1]->id);
  state.pool.assign(released.begin() + 2, released.end());
  state.phase = AvalanchePhase::kWaiting;
  if (state.pool.empty()) {
    state.phase = AvalanchePhase::kDone;
    actions.push_back(AdversaryAction{AdversaryAction::Kind::kNote, {}, {}, "AVALANCHE_EXHAUSTED"});
  }
  return actions;
}

AvalancheStrategy::AvalancheStrategy(AvalancheParams params) {
  state_.initial_k = params.initial_k;
}

std::vector<AdversaryAction> AvalancheStrategy::on_tick(const TickContext& ctx) {
  return avalanche_on_tick(state_, ctx);
}

Side side_of_block(const BlockTree& tree, const BalancingState& state, BlockId id) {
  auto idx = tree.index_of(id);
  if (!idx) return Side::kNone;
  auto on = [&](const std::vector<BlockPtr>& chain) {
    if (chain.empty()) return false;
    auto root = tree.index_of(chain.front()->id);
    return root && tree.is_ancestor(*root, *idx);
  };
  if (on(state.left_chain)) return Side::kLeft;
  if (on(state.right_chain)) return Side::kRight;
  return Side::kNone;
}

namespace {

constexpr Slot kSetupSlots = 5;

bool setup_window_adversarial(const SlotSchedule& schedule, Slot first) {
  for (Slot s = first; s < first + kSetupSlots; ++s) {
    if (!schedule.has_slot(s) || !schedule.adversarial_proposer(s)) return false;
  }
  return true;
}

// Latest block of the side's branch, following an honest member's head, with slot <= s.
std::optional<BlockId> side_target(const BlockTree& tree, const BalancingState& state, Side side,
                                   BlockId head, Slot s) {
  const auto& chain = side == Side::kLeft ? state.left_chain : state.right_chain;
  if (side_of_block(tree, state, head) != side) head = chain.back()->id;
  for (std::size_t i = tree.index_at(head); i != BlockTree::kNoParent; i = tree.parent_index(i)) {
    if (tree.block(i).slot <= s) {
      if (side_of_block(tree, state, tree.block(i).id) != side) return std::nullopt;
      return tree.block(i).id;
    }
  }
  return std::nullopt;
}

void add_seats(BalancingState& state, const SlotSchedule& schedule, Slot slot) {
  for (ValidatorId v : schedule.adversarial_members(slot)) state.reserve.push_back(Seat{v, slot});
}

}  // namespace

Slot planned_setup_start(const BalancingParams& params, const SlotSchedule& schedule) {
  if (params.setup == SetupMode::kStrict) {
    return setup_window_adversarial(schedule, params.setup_start) ? params.setup_start : 0;
  }
  for (Slot s = std::max<Slot>(params.setup_start, 1); s + kSetupSlots - 1 <= schedule.num_slots(); ++s) {
    if (setup_window_adversarial(schedule, s)) return s;
  }
  return 0;
}

std::vector<AdversaryAction> balancing_on_tick(BalancingState& state, const BalancingParams& params,
                                               const TickContext& ctx) {
  std::vector<AdversaryAction> actions;
  const bool voting = is_voting_tick(ctx.tick);

  if (state.phase == BalancingPhase::kWaiting) {
    if (voting) return actions;
    if (state.setup_start == 0) state.setup_start = planned_setup_start(params, ctx.schedule);
    if (state.setup_start == 0 || ctx.slot != state.setup_start) return actions;
    state.phase = BalancingPhase::kSetup;
    ForkChoiceContext fc = ctx.global.context(ctx.schedule, ctx.mode, ctx.slot, 0, false);
    state.fork_base = ghost_head(fc, TieBreaker(TieBreakPolicy::kFirstInserted));
  }

  if (state.phase == BalancingPhase::kSetup) {
    const Slot offset = ctx.slot - state.setup_start;
    const bool last = offset == kSetupSlots - 1;
    if (!voting) {
      const ValidatorId proposer = ctx.schedule.proposer(ctx.slot);
      const BlockId left_parent = state.left_chain.empty() ? state.fork_base : state.left_chain.back()->id;
      const BlockId right_parent = state.right_chain.empty() ? state.fork_base : state.right_chain.back()->id;
      state.left_chain.push_back(make_block(ctx.slot, proposer, left_parent, 0,
                                            last ? state.left_votes : std::vector<Vote>{}));
      state.right_chain.push_back(make_block(ctx.slot, proposer, right_parent, 1,
                                             last ? state.right_votes : std::vector<Vote>{}));
      actions.push_back(AdversaryAction{AdversaryAction::Kind::kWithhold,
                                        {state.left_chain.back(), state.right_chain.back()}, {}, ""});
      return actions;
    }
    if (!last) {
      AdversaryAction hold{AdversaryAction::Kind::kWithhold, {}, {}, ""};
      for (ValidatorId v : ctx.schedule.adversarial_members(ctx.slot)) {
        state.left_votes.push_back(Vote{v, ctx.slot, state.left_chain.back()->id});
        state.right_votes.push_back(Vote{v, ctx.slot, state.right_chain.back()->id});
        hold.first.push_back(state.left_votes.back());
        hold.first.push_back(state.right_votes.back());
      }
      if (!hold.first.empty()) actions.push_back(std::move(hold));
      return actions;
    }
    // Both bundles go out after this slot's honest votes; each half sees its side first.
    AdversaryAction release{AdversaryAction::Kind::kSplitRelease, {}, {}, "balancing-setup"};
    for (const BlockPtr& b : state.left_chain) release.first.push_back(b);
    for (const BlockPtr& b : state.right_chain) release.second.push_back(b);
    actions.push_back(std::move(release));
    add_seats(state, ctx.schedule, ctx.slot);
    state.phase = BalancingPhase::kMaintain;
    return actions;
  }

  // Maintain.
  if (!voting) return actions;
  add_seats(state, ctx.schedule, ctx.slot);
  const BlockTree& tree = ctx.global.tree();

  if (!state.split_lost) {
    bool lost = false;
    for (Side side : {Side::kLeft, Side::kRight}) {
      const auto& members = side == Side::kLeft ? ctx.partition.left() : ctx.partition.right();
      for (ValidatorId v : members) {
        if (side_of_block(tree, state, ctx.honest_head(v)) != side) {
          lost = true;
          break;
        }
      }
      if (lost) break;
    }
    if (lost) {
      state.split_lost = true;
      const BoostState boost =
          find_boost(tree, ctx.schedule, ctx.slot, ctx.boost_weight);
      const bool boosted = ctx.boost_weight > 0 && boost.boosted_block.has_value();
      actions.push_back(AdversaryAction{AdversaryAction::Kind::kNote, {}, {},
                                        boosted ? "BOOST_OVERPOWERED" : "SPLIT_LOST"});
      return actions;
    }
  }
  if (state.split_lost) return actions;

  // Honest latest messages as everyone will count them next slot.
  Weight drift = 0;
  for (const auto& [voter, entry] : ctx.global.latest().entries()) {
    if (ctx.schedule.is_adversarial(voter)) continue;
    const Side side = side_of_block(tree, state, entry.target);
    drift += side == Side::kLeft ? 1 : side == Side::kRight ? -1 : 0;
  }
  const Weight magnitude = drift < 0 ? -drift : drift;
  if (magnitude <= params.drift_threshold || state.reserve.empty()) return actions;

  const BlockId left_head = ctx.honest_head(ctx.partition.left().empty() ? ValidatorId{0}
                                                                           : ctx.partition.left().front());
  const BlockId right_head = ctx.honest_head(ctx.partition.right().empty() ? ValidatorId{0}
                                                                             : ctx.partition.right().front());
  AdversaryAction release{AdversaryAction::Kind::kSplitRelease, {}, {}, "balancing-rebalance"};
  std::vector<ValidatorId> used;
  std::vector<Seat> kept;
  // Newest seats first: only a strictly later vote moves a latest-message entry.
  std::stable_sort(state.reserve.begin(), state.reserve.end(),
                   [](const Seat& a, const Seat& b) { return a.slot > b.slot; });
  Weight sent = 0;
  for (const Seat& seat : state.reserve) {
    const bool fresh = std::find(used.begin(), used.end(), seat.voter) == used.end();
    auto left = side_target(tree, state, Side::kLeft, left_head, seat.slot);
    auto right = side_target(tree, state, Side::kRight, right_head, seat.slot);
    if (sent < magnitude && fresh && left && right) {
      release.first.push_back(Vote{seat.voter, seat.slot, *left});
      release.second.push_back(Vote{seat.voter, seat.slot, *right});
      used.push_back(seat.voter);
      ++sent;
    } else if (std::find(used.begin(), used.end(), seat.voter) == used.end()) {
      kept.push_back(seat);
    }
  }
  state.reserve = std::move(kept);
  if (sent > 0) {
    ++state.rebalances;
    actions.push_back(std::move(release));
  }
  return actions;
}

BalancingStrategy::BalancingStrategy(BalancingParams params, const SlotSchedule& schedule,
                                     const Partition& partition)
    : params_(params), partition_(partition) {
  state_.setup_start = planned_setup_start(params_, schedule);
  if (params_.setup == SetupMode::kStrict && state_.setup_start == 0) {
    throw Error(ErrorCode::kSetupImpossible,
                "slots " + std::to_string(params_.setup_start) + ".." +
                    std::to_string(params_.setup_start + kSetupSlots - 1) +
                    " do not all have adversarial proposers");
  }
}

std::vector<AdversaryAction> BalancingStrategy::on_tick(const TickContext& ctx) {
  return balancing_on_tick(state_, params_, ctx);
}

bool BalancingStrategy::honest_duties(Slot slot) const {
  if (state_.split_lost) return true;
  return state_.phase == BalancingPhase::kWaiting &&
         (state_.setup_start == 0 || slot < state_.setup_start);
}

std::vector<BlockId> BalancingStrategy::preferred_for(ValidatorId validator) const {
  std::vector<BlockId> out;
  const Side side = partition_.side_of(validator);
  const auto& first = side == Side::kRight ? state_.right_chain : state_.left_chain;
  const auto& second = side == Side::kRight ? state_.left_chain : state_.right_chain;
  for (const BlockPtr& b : first) out.push_back(b->id);
  for (const BlockPtr& b : second) out.push_back(b->id);
  return out;
}

std::unique_ptr<Strategy> make_strategy(const AttackConfig& config, const SlotSchedule& schedule,
                                        const Partition& partition) {
  switch (config.kind) {
    case AttackKind::kNone:
      return nullptr;
    case AttackKind::kAvalanche:
      return std::make_unique<AvalancheStrategy>(config.avalanche);
    case AttackKind::kBalancing:
      return std::make_unique<BalancingStrategy>(config.balancing, schedule, partition);
  }
  return nullptr;
}

}  // namespace ghostsim
