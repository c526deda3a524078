#include "ghostsim/engine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <memory>
#include <unordered_set>

#include "ghostsim/error.hpp"

namespace ghostsim {

void validate(const SimConfig& config) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  validate(config.lottery);
  if (config.num_slots < 1) fail("num_slots must be >= 1");
  if (config.boost_weight < 0) fail("boost_weight must be >= 0");
  if (config.confirmation_depth < 1) fail("confirmation_depth must be >= 1");
  if (config.stall_window < 1) fail("stall_window must be >= 1");
  if (config.partition.jitter < 0.0 || config.partition.jitter > 1.0) {
    fail("partition jitter must lie in [0, 1]");
  }
  const std::uint32_t adversarial = config.lottery.num_adversarial();
  switch (config.attack.kind) {
    case AttackKind::kNone:
      break;
    case AttackKind::kAvalanche:
      if (adversarial == 0) fail("avalanche attack needs adversarial validators");
      if (config.attack.avalanche.initial_k > config.num_slots) fail("initial_k exceeds num_slots");
      break;
    case AttackKind::kBalancing:
      if (adversarial == 0) fail("balancing attack needs adversarial validators");
      if (config.attack.balancing.setup_start < 1) fail("setup_start must be >= 1");
      if (config.attack.balancing.drift_threshold < 0) fail("drift_threshold must be >= 0");
      break;
  }
}

namespace {

Ledger confirmed_prefix(const BlockTree& tree, BlockId head, Slot slot, Slot tconf) {
  Ledger chain = chain_of(tree, head);
  Ledger out;
  for (BlockId id : chain.blocks) {
    if (!out.blocks.empty() && tree.at(id).slot > slot - tconf) break;
    out.blocks.push_back(id);
  }
  return out;
}

struct ViewState {
  ValidatorView view;
  std::vector<BlockId> ever;
  std::unordered_set<BlockId> ever_set;

  void mark_canonical(BlockId head) {
    const BlockTree& tree = view.tree();
    std::vector<BlockId> fresh;
    for (std::size_t i = tree.index_at(head); i != BlockTree::kNoParent; i = tree.parent_index(i)) {
      const BlockId id = tree.block(i).id;
      if (ever_set.contains(id)) break;
      fresh.push_back(id);
    }
    for (auto it = fresh.rbegin(); it != fresh.rend(); ++it) {
      ever_set.insert(*it);
      ever.push_back(*it);
    }
  }
};

using ViewPtr = std::shared_ptr<ViewState>;

// Validators sharing a view and a tie-break preference, listed by first member.
struct Group {
  ViewState* state = nullptr;
  std::vector<BlockId> preferred;
  std::vector<ValidatorId> members;
};

class Simulation {
 public:
  explicit Simulation(const SimConfig& config) : config_(config) {
    validate(config_);
    LotteryConfig lottery = config_.lottery;
    if (config_.attack.kind == AttackKind::kAvalanche && config_.attack.avalanche.initial_k > 0) {
      SlotOverride forced;
      forced.first = 1;
      forced.last = config_.attack.avalanche.initial_k;
      forced.proposer_class = ProposerClass::kAdversarial;
      lottery.overrides.push_back(forced);
    }
    schedule_ = draw_schedule(lottery, config_.num_slots);
    population_ = Population{lottery.num_validators, lottery.num_adversarial()};
    partition_ = Partition::balanced(population_, config_.partition.layout,
                                     config_.partition.jitter, lottery.seed);
    strategy_ = make_strategy(config_.attack, schedule_, partition_);

    auto shared = std::make_shared<ViewState>();
    views_.assign(population_.num_validators, shared);

    trace_.config = config_;
    trace_.schedule = schedule_;
    trace_.partition = partition_;
    record_block(genesis_block(), 0, false);
  }

  Trace run() {
    for (Tick tick = trace_.first_tick(); tick <= trace_.last_tick(); ++tick) {
      tick_ = tick;
      slot_ = slot_of(tick);
      head_cache_.clear();
      deliver();
      if (!is_voting_tick(tick)) {
        propose();
      } else if (config_.mode != ForkChoiceMode::kVanillaGhost) {
        vote();
      }
      observe_honest_views();
      adversary();
      snapshot_global();
    }
    finish();
    return std::move(trace_);
  }

 private:
  bool acts_honestly(ValidatorId v) const {
    return !population_.is_adversarial(v) || strategy_ == nullptr ||
           strategy_->honest_duties(slot_);
  }

  std::vector<BlockId> preference(ValidatorId v) const {
    if (config_.tiebreak != TieBreakPolicy::kAdversarialPreference || strategy_ == nullptr) {
      return {};
    }
    return strategy_->preferred_for(v);
  }

  BlockId head_of(const ViewState& state, const std::vector<BlockId>& preferred) {
    auto key = std::make_pair(&state, preferred);
    auto it = head_cache_.find(key);
    if (it != head_cache_.end()) return it->second;
    const TieBreaker tb(config_.tiebreak, preferred);
    const BlockId head = ghost_head(
        state.view.context(schedule_, config_.mode, slot_, config_.boost_weight, true), tb);
    head_cache_.emplace(std::move(key), head);
    return head;
  }

  BlockId head_of(ValidatorId v) { return head_of(*views_[v.index], preference(v)); }

  std::vector<Group> honest_groups() {
    std::vector<Group> groups;
    std::map<std::pair<const ViewState*, std::vector<BlockId>>, std::size_t> index;
    for (std::uint32_t i = population_.num_adversarial; i < population_.num_validators; ++i) {
      const ValidatorId v{i};
      auto pref = preference(v);
      auto key = std::make_pair(static_cast<const ViewState*>(views_[i].get()), pref);
      auto it = index.find(key);
      if (it == index.end()) {
        index.emplace(std::move(key), groups.size());
        groups.push_back(Group{views_[i].get(), std::move(pref), {v}});
      } else {
        groups[it->second].members.push_back(v);
      }
    }
    return groups;
  }

  std::uint64_t new_message_id() { return next_message_id_++; }

  void record_block(const BlockPtr& block, Tick tick, bool adversarial) {
    trace_.block_index.emplace(block->id, trace_.blocks.size());
    trace_.blocks.push_back(BlockRecord{block, tick, adversarial});
  }

  // Mint bookkeeping for a payload entering the system for the first time.
  void mint(const Payload& payload, bool withheld) {
    if (const auto* block = std::get_if<BlockPtr>(&payload)) {
      const Block& b = **block;
      const bool adversarial = population_.is_adversarial(b.proposer);
      int& copies = block_copies_[{b.slot, b.proposer.index}];
      trace_.events.push_back(MintEvent{tick_, b.id, adversarial, withheld, copies > 0});
      ++copies;
      record_block(*block, tick_, adversarial);
    } else {
      const Vote& v = std::get<Vote>(payload);
      int& copies = vote_copies_[{v.slot, v.voter.index}];
      trace_.events.push_back(
          VoteEvent{tick_, v, population_.is_adversarial(v.voter), copies > 0});
      ++copies;
    }
  }

  static ValidatorId origin_of(const Payload& payload) {
    if (const auto* block = std::get_if<BlockPtr>(&payload)) return (*block)->proposer;
    return std::get<Vote>(payload).voter;
  }

  bool known(const Payload& payload) const {
    if (const auto* block = std::get_if<BlockPtr>(&payload)) {
      return trace_.block_index.contains((*block)->id);
    }
    return published_votes_.contains(key_of(payload));
  }

  // Message for a payload about to go public: the withheld original when the
  // adversary holds it, otherwise a fresh message.
  Message resolve(const Payload& payload) {
    if (auto held = buffer_.take(payload)) return *held;
    if (!known(payload)) mint(payload, false);
    if (std::holds_alternative<Vote>(payload)) published_votes_.insert(key_of(payload));
    return Message{payload, origin_of(payload), new_message_id()};
  }

  void make_public(const Message& m) {
    sent_at_[m.id] = tick_;
    global_.on_receive(m, schedule_, config_.mode);
    omniscient_.on_receive(m, schedule_, config_.mode);
  }

  void publish_honest(const Payload& payload) {
    mint(payload, false);
    if (std::holds_alternative<Vote>(payload)) published_votes_.insert(key_of(payload));
    const Message m{payload, origin_of(payload), new_message_id()};
    broadcast(queue_, m, tick_);
    make_public(m);
  }

  void deliver() {
    std::vector<Delivery> due = queue_.pop_due(tick_);
    if (due.empty()) return;
    std::vector<std::size_t> selective;
    for (std::size_t i = 0; i < due.size(); ++i) {
      if (!due[i].recipients.is_all()) selective.push_back(i);
    }
    for (const Delivery& d : due) {
      trace_.events.push_back(DeliverEvent{sent_at_[d.message.id], d.message.id, tick_,
                                           d.recipients.label(),
                                           static_cast<std::uint32_t>(
                                               d.recipients.count(population_.num_validators))});
    }

    struct DeliveryGroup {
      ViewState* state;
      std::vector<std::uint32_t> signature;
      std::vector<ValidatorId> members;
    };
    std::vector<DeliveryGroup> groups;
    std::map<std::pair<ViewState*, std::vector<std::uint32_t>>, std::size_t> index;
    for (std::uint32_t i = 0; i < population_.num_validators; ++i) {
      std::vector<std::uint32_t> signature;
      for (std::size_t s : selective) {
        if (due[s].recipients.contains(ValidatorId{i})) signature.push_back(static_cast<std::uint32_t>(s));
      }
      auto key = std::make_pair(views_[i].get(), signature);
      auto it = index.find(key);
      if (it == index.end()) {
        index.emplace(std::move(key), groups.size());
        groups.push_back(DeliveryGroup{views_[i].get(), std::move(signature), {ValidatorId{i}}});
      } else {
        groups[it->second].members.push_back(ValidatorId{i});
      }
    }

    for (DeliveryGroup& g : groups) {
      const ViewPtr& current = views_[g.members.front().index];
      ViewPtr target = current;
      if (static_cast<std::size_t>(current.use_count()) != g.members.size()) {
        target = std::make_shared<ViewState>(*current);
      }
      ReceiveStats stats;
      const ValidatorId probe = g.members.front();
      for (const Delivery& d : due) {
        if (d.recipients.contains(probe)) stats += target->view.on_receive(d.message, schedule_, config_.mode);
      }
      if (target != current) {
        for (ValidatorId v : g.members) views_[v.index] = target;
      }
      if (stats.votes_ignored > 0) {
        std::vector<ValidatorId> honest;
        for (ValidatorId v : g.members) {
          if (!population_.is_adversarial(v)) honest.push_back(v);
        }
        if (!honest.empty()) trace_.events.push_back(IgnoreEvent{tick_, stats.votes_ignored, honest});
      }
    }
  }

  void propose() {
    if (!schedule_.has_slot(slot_)) return;
    const ValidatorId p = schedule_.proposer(slot_);
    if (!acts_honestly(p)) return;
    const TieBreaker tb(config_.tiebreak, preference(p));
    publish_honest(on_propose(views_[p.index]->view, p, slot_, schedule_, config_.mode, tb));
  }

  void vote() {
    std::vector<Vote> votes;
    for (ValidatorId v : schedule_.committee(slot_)) {
      if (!acts_honestly(v)) continue;
      votes.push_back(Vote{v, slot_, head_of(v)});
    }
    for (const Vote& v : votes) publish_honest(v);
  }

  void observe_honest_views() {
    for (Group& g : honest_groups()) {
      const TieBreaker tb(config_.tiebreak, g.preferred);
      const ForkChoiceContext ctx =
          g.state->view.context(schedule_, config_.mode, slot_, config_.boost_weight, true);
      HeadResult head = ghost_head_with_scores(ctx, tb);
      g.state->mark_canonical(head.head);
      trace_.events.push_back(HeadEvent{tick_, head.head, g.members});

      ViewSnapshot snap;
      snap.tick = tick_;
      snap.holders = g.members;
      const BlockTree& tree = g.state->view.tree();
      for (std::size_t i = 0; i < tree.size(); ++i) snap.blocks.push_back(tree.block(i).id);
      snap.scores = std::move(head.scores);
      if (ctx.boost.active_at(slot_) && tree.contains(*ctx.boost.boosted_block)) {
        snap.boosted = ctx.boost.boosted_block;
      }
      snap.head = head.head;
      trace_.snapshots.push_back(std::move(snap));

      if (is_voting_tick(tick_)) {
        const Ledger ledger =
            confirmed_prefix(tree, head.head, slot_, config_.confirmation_depth);
        trace_.ledgers.push_back(LedgerRecord{slot_, ledger.tip(),
                                              static_cast<std::uint32_t>(ledger.length()),
                                              g.members});
      }
    }
  }

  void adversary() {
    if (strategy_ == nullptr) return;
    TickContext ctx{tick_,  slot_,      config_.num_slots,   schedule_,
                    global_, config_.mode, config_.boost_weight, partition_,
                    [this](ValidatorId v) { return head_of(v); }};
    for (const AdversaryAction& action : strategy_->on_tick(ctx)) {
      switch (action.kind) {
        case AdversaryAction::Kind::kWithhold:
          for (const Payload& p : action.first) {
            const Message m{p, origin_of(p), new_message_id()};
            withhold(buffer_, m, population_);
            mint(p, true);
            trace_.events.push_back(WithholdEvent{tick_, m.id});
            omniscient_.on_receive(m, schedule_, config_.mode);
          }
          break;
        case AdversaryAction::Kind::kBroadcast: {
          for (const Payload& p : action.first) {
            const Message m = resolve(p);
            broadcast(queue_, m, tick_);
            make_public(m);
          }
          log_release(action);
          break;
        }
        case AdversaryAction::Kind::kSplitRelease: {
          std::vector<Message> first;
          std::vector<Message> second;
          for (const Payload& p : action.first) first.push_back(resolve(p));
          for (const Payload& p : action.second) second.push_back(resolve(p));
          split_release(queue_, first, second, partition_, population_, tick_);
          for (const Message& m : first) make_public(m);
          for (const Message& m : second) make_public(m);
          log_release(action);
          break;
        }
        case AdversaryAction::Kind::kNote:
          trace_.events.push_back(OutcomeEvent{tick_, action.label});
          break;
      }
    }
  }

  void log_release(const AdversaryAction& action) {
    if (action.label.empty()) return;
    ReleaseEvent e{tick_, action.label, 0, 0};
    for (const auto* list : {&action.first, &action.second}) {
      for (const Payload& p : *list) ++(std::holds_alternative<BlockPtr>(p) ? e.blocks : e.votes);
    }
    trace_.events.push_back(std::move(e));
  }

  void snapshot_global() {
    const TieBreaker tb(config_.tiebreak, preference(ValidatorId{0}));
    const ForkChoiceContext public_ctx =
        global_.context(schedule_, config_.mode, slot_, config_.boost_weight, true);
    const ForkChoiceContext all_ctx =
        omniscient_.context(schedule_, config_.mode, slot_, config_.boost_weight, true);
    ViewSnapshot snap;
    snap.tick = tick_;
    const BlockTree& tree = omniscient_.tree();
    for (std::size_t i = 0; i < tree.size(); ++i) {
      snap.blocks.push_back(tree.block(i).id);
      if (!global_.tree().contains(tree.block(i).id)) snap.withheld.push_back(tree.block(i).id);
    }
    snap.scores = subtree_scores(all_ctx);
    if (public_ctx.boost.active_at(slot_)) snap.boosted = public_ctx.boost.boosted_block;
    snap.head = ghost_head(public_ctx, tb);
    trace_.snapshots.push_back(std::move(snap));
  }

  void finish() {
    std::map<const ViewState*, std::size_t> index;
    for (std::uint32_t i = population_.num_adversarial; i < population_.num_validators; ++i) {
      const ViewState* state = views_[i].get();
      auto it = index.find(state);
      if (it == index.end()) {
        index.emplace(state, trace_.final_views.size());
        trace_.final_views.push_back(FinalView{{ValidatorId{i}}, head_of(ValidatorId{i}), state->ever});
      } else {
        trace_.final_views[it->second].holders.push_back(ValidatorId{i});
      }
    }
    trace_.attack_sustained = strategy_ != nullptr && strategy_->sustained();
    trace_.safety_witnesses = detect_safety_violation(trace_);
    trace_.stalls = detect_liveness_stall(trace_, config_.stall_window);
  }

  SimConfig config_;
  SlotSchedule schedule_;
  Population population_;
  Partition partition_;
  std::unique_ptr<Strategy> strategy_;
  std::vector<ViewPtr> views_;
  ValidatorView global_;
  ValidatorView omniscient_;
  MessageQueue queue_;
  AdversaryBuffer buffer_;
  Trace trace_;
  Tick tick_ = 0;
  Slot slot_ = 0;
  std::uint64_t next_message_id_ = 0;
  std::unordered_map<std::uint64_t, Tick> sent_at_;
  std::map<std::pair<Slot, std::uint32_t>, int> block_copies_;
  std::map<std::pair<Slot, std::uint32_t>, int> vote_copies_;
  std::set<PayloadKey> published_votes_;
  std::map<std::pair<const ViewState*, std::vector<BlockId>>, BlockId> head_cache_;
};

}  // namespace

Trace run(const SimConfig& config) { return Simulation(config).run(); }

Ledger ledger_at(const ValidatorView& view, Slot slot, Slot tconf, const SlotSchedule& schedule,
                 ForkChoiceMode mode, const TieBreaker& tiebreak, Weight boost_weight) {
  const BlockId head = ghost_head(view.context(schedule, mode, slot, boost_weight, true), tiebreak);
  return confirmed_prefix(view.tree(), head, slot, tconf);
}

const BlockRecord* Trace::find_block(BlockId id) const {
  auto it = block_index.find(id);
  return it == block_index.end() ? nullptr : &blocks[it->second];
}

const Block& Trace::block(BlockId id) const {
  const BlockRecord* r = find_block(id);
  if (r == nullptr) throw Error(ErrorCode::kUnknownBlock, "block " + to_string(id) + " not in trace");
  return *r->block;
}

Ledger Trace::chain(BlockId tip) const {
  Ledger ledger;
  for (BlockId id = tip;;) {
    const Block& b = block(id);
    ledger.blocks.push_back(id);
    if (b.is_genesis()) break;
    id = b.parent;
  }
  std::reverse(ledger.blocks.begin(), ledger.blocks.end());
  return ledger;
}

bool Trace::is_ancestor(BlockId ancestor, BlockId descendant) const {
  const Slot floor = block(ancestor).slot;
  for (BlockId id = descendant;;) {
    if (id == ancestor) return true;
    const Block& b = block(id);
    if (b.is_genesis() || b.slot <= floor) return false;
    id = b.parent;
  }
}

namespace {

bool holds(const std::vector<ValidatorId>& holders, ValidatorId v) {
  return std::find(holders.begin(), holders.end(), v) != holders.end();
}

}  // namespace

const ViewSnapshot& Trace::snapshot(Tick tick, ValidatorId validator) const {
  for (const ViewSnapshot& s : snapshots) {
    if (s.tick == tick && holds(s.holders, validator)) return s;
  }
  throw Error(ErrorCode::kTickOutOfRange, "no snapshot of validator " +
                                              std::to_string(validator.index) + " at tick " +
                                              std::to_string(tick));
}

const ViewSnapshot& Trace::global_snapshot(Tick tick) const {
  for (const ViewSnapshot& s : snapshots) {
    if (s.tick == tick && s.holders.empty()) return s;
  }
  throw Error(ErrorCode::kTickOutOfRange, "no global snapshot at tick " + std::to_string(tick));
}

std::optional<Ledger> Trace::ledger_of(ValidatorId validator, Slot slot) const {
  for (const LedgerRecord& r : ledgers) {
    if (r.slot == slot && holds(r.holders, validator)) return chain(r.tip);
  }
  return std::nullopt;
}

std::optional<BlockId> Trace::final_head(ValidatorId validator) const {
  for (const FinalView& f : final_views) {
    if (holds(f.holders, validator)) return f.head;
  }
  return std::nullopt;
}

std::vector<ValidatorId> Trace::honest_validators() const {
  std::vector<ValidatorId> out;
  for (std::uint32_t i = schedule.num_adversarial(); i < schedule.num_validators(); ++i) {
    out.push_back(ValidatorId{i});
  }
  return out;
}

std::vector<SafetyWitness> detect_safety_violation(const Trace& trace) {
  struct Tip {
    BlockId tip;
    ValidatorId validator;
    Slot slot;
    Ledger chain;
  };
  std::vector<Tip> tips;
  std::unordered_set<BlockId> seen;
  for (const LedgerRecord& r : trace.ledgers) {
    if (r.holders.empty() || !seen.insert(r.tip).second) continue;
    tips.push_back(Tip{r.tip, r.holders.front(), r.slot, trace.chain(r.tip)});
  }
  std::vector<SafetyWitness> out;
  std::set<std::pair<BlockId, BlockId>> reported;
  for (std::size_t i = 0; i < tips.size(); ++i) {
    for (std::size_t j = i + 1; j < tips.size(); ++j) {
      const Ledger& a = tips[i].chain;
      const Ledger& b = tips[j].chain;
      if (is_prefix(a, b) || is_prefix(b, a)) continue;
      std::size_t k = 0;
      while (a.blocks[k] == b.blocks[k]) ++k;
      auto key = std::minmax(a.blocks[k], b.blocks[k]);
      if (!reported.insert(key).second) continue;
      out.push_back(SafetyWitness{tips[i].validator, tips[i].slot, tips[j].validator, tips[j].slot,
                                  a.blocks[k], b.blocks[k]});
    }
  }
  return out;
}

std::vector<StallInterval> detect_liveness_stall(const Trace& trace, Slot window) {
  const Slot last = trace.config.num_slots;
  // Common ledger of every honest validator at each slot: the chain to the
  // deepest block all recorded tips share.
  std::vector<std::optional<BlockId>> common(static_cast<std::size_t>(last + 1));
  for (const LedgerRecord& r : trace.ledgers) {
    if (r.slot < 1 || r.slot > last) continue;
    auto& c = common[static_cast<std::size_t>(r.slot)];
    if (!c) {
      c = r.tip;
      continue;
    }
    BlockId x = *c;
    while (!trace.is_ancestor(x, r.tip)) x = trace.block(x).parent;
    c = x;
  }

  // permanent[s]: deepest block in every common ledger from slot s to the end.
  std::vector<std::optional<BlockId>> permanent(static_cast<std::size_t>(last + 2));
  for (Slot s = last; s >= 1; --s) {
    const auto& c = common[static_cast<std::size_t>(s)];
    if (!c) break;
    const auto& later = permanent[static_cast<std::size_t>(s + 1)];
    if (!later) {
      permanent[static_cast<std::size_t>(s)] = *c;
      continue;
    }
    BlockId x = *later;
    while (!trace.is_ancestor(x, *c)) x = trace.block(x).parent;
    permanent[static_cast<std::size_t>(s)] = x;
  }

  auto productive = [&](Slot s) {
    const auto& now = permanent[static_cast<std::size_t>(s)];
    if (!now) return false;
    const auto& before = permanent[static_cast<std::size_t>(s - 1)];
    for (BlockId id = *now; !(before && id == *before);) {
      const BlockRecord* r = trace.find_block(id);
      if (r->block->is_genesis()) break;
      if (!r->adversarial) return true;
      id = r->block->parent;
    }
    return false;
  };

  std::vector<StallInterval> stalls;
  const Slot begin = trace.config.confirmation_depth + 1;
  Slot run_start = 0;
  for (Slot s = begin; s <= last + 1; ++s) {
    const bool stalled = s <= last && !productive(s);
    if (stalled && run_start == 0) run_start = s;
    if (!stalled && run_start != 0) {
      if (s - run_start >= window) stalls.push_back(StallInterval{run_start, s - 1});
      run_start = 0;
    }
  }
  return stalls;
}

}  // namespace ghostsim
