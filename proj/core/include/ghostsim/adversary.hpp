#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghostsim/chain.hpp"
#include "ghostsim/forkchoice.hpp"
#include "ghostsim/honest.hpp"
#include "ghostsim/lottery.hpp"
#include "ghostsim/network.hpp"

namespace ghostsim {

enum class AttackKind { kNone, kAvalanche, kBalancing };
enum class SetupMode { kStrict, kOpportunistic };

std::string_view to_string(AttackKind kind);
std::optional<AttackKind> parse_attack_kind(std::string_view text);
std::string_view to_string(SetupMode mode);
std::optional<SetupMode> parse_setup_mode(std::string_view text);

struct AvalancheParams {
  std::uint32_t initial_k = 0;  // slots 1..k are forced adversarial

  friend bool operator==(const AvalancheParams&, const AvalancheParams&) = default;
};

struct BalancingParams {
  Slot setup_start = 1;
  SetupMode setup = SetupMode::kStrict;
  Weight drift_threshold = 0;

  friend bool operator==(const BalancingParams&, const BalancingParams&) = default;
};

struct AttackConfig {
  AttackKind kind = AttackKind::kNone;
  AvalancheParams avalanche;
  BalancingParams balancing;

  friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

struct AdversaryAction {
  enum class Kind { kWithhold, kBroadcast, kSplitRelease, kNote };

  Kind kind = Kind::kWithhold;
  std::vector<Payload> first;
  std::vector<Payload> second;  // kSplitRelease only
  std::string label;            // release kind or outcome name
};

// What the strategy sees at a tick. The global view holds every public
// message the moment it is sent; the adversary is omniscient about honest traffic.
struct TickContext {
  Tick tick = 0;
  Slot slot = 0;
  Slot num_slots = 0;
  const SlotSchedule& schedule;
  const ValidatorView& global;
  ForkChoiceMode mode = ForkChoiceMode::kVanillaGhost;
  Weight boost_weight = 0;
  const Partition& partition;
  std::function<BlockId(ValidatorId)> honest_head;
};

class Strategy {
 public:
  virtual ~Strategy() = default;

  // Called once per tick after honest validators acted.
  virtual std::vector<AdversaryAction> on_tick(const TickContext& ctx) = 0;
  // Whether adversarial validators run the honest protocol during `slot`.
  virtual bool honest_duties(Slot slot) const = 0;
  // Tie-break preference the adversary imposes on `validator`'s fork choice.
  virtual std::vector<BlockId> preferred_for(ValidatorId validator) const = 0;
  // True while the attack is still running.
  virtual bool sustained() const = 0;
};

// ---------------------------------------------------------------------------
// Avalanche: withhold, release as a height-2 sub-tree once the honest branch
// weighs as much, keep all but the first two blocks for reuse.

enum class AvalanchePhase { kAccumulating, kWaiting, kDone };

std::string_view to_string(AvalanchePhase phase);

struct AvalancheState {
  std::vector<BlockPtr> pool;  // withheld, ascending slot
  BlockId tip;                 // block honest validators build on
  BlockId fork_point;          // tip at the start of the current round
  AvalanchePhase phase = AvalanchePhase::kAccumulating;
  std::uint32_t initial_k = 0;
  std::uint32_t releases = 0;
  std::uint32_t next_disambiguator = 1;
  std::vector<BlockId> preferred;  // released spine, in release order
};

// First pool block re-parented onto `tip`, the rest as its children. Blocks
// already shaped that way are reused; others become fresh equivocating copies.
// Throws Error{kPoolTooSmall} if fewer than two blocks are pooled.
std::vector<BlockPtr> build_displacement_subtree(std::span<const BlockPtr> pool, BlockId tip,
                                                 std::uint32_t& next_disambiguator);

// Competing weight of the honest branch hanging off `tip` in the global view.
Weight honest_branch_weight(const TickContext& ctx, BlockId tip);

// Weight the adversary can put behind a displacement sub-tree built from `pool`.
Weight pool_weight(const TickContext& ctx, std::span<const BlockPtr> pool);

std::vector<AdversaryAction> avalanche_on_tick(AvalancheState& state, const TickContext& ctx);

class AvalancheStrategy : public Strategy {
 public:
  explicit AvalancheStrategy(AvalancheParams params);

  std::vector<AdversaryAction> on_tick(const TickContext& ctx) override;
  bool honest_duties(Slot) const override { return state_.phase == AvalanchePhase::kDone; }
  std::vector<BlockId> preferred_for(ValidatorId) const override { return state_.preferred; }
  bool sustained() const override { return state_.phase != AvalanchePhase::kDone; }

  const AvalancheState& state() const { return state_; }

 private:
  AvalancheState state_;
};

// ---------------------------------------------------------------------------
// LMD balancing: two withheld chains whose batched equivocating votes are
// split-delivered so each half of the honest validators counts only one side.

enum class BalancingPhase { kWaiting, kSetup, kMaintain };

std::string_view to_string(BalancingPhase phase);

struct Seat {
  ValidatorId voter;
  Slot slot = 0;
};

struct BalancingState {
  BalancingPhase phase = BalancingPhase::kWaiting;
  Slot setup_start = 0;  // 0 until planned
  BlockId fork_base;
  std::vector<BlockPtr> left_chain;
  std::vector<BlockPtr> right_chain;
  std::vector<Vote> left_votes;
  std::vector<Vote> right_votes;
  std::vector<Seat> reserve;  // adversarial committee seats not yet used
  std::uint32_t rebalances = 0;
  bool split_lost = false;
};

// Which side of the attack `id` lies on in `tree`.
Side side_of_block(const BlockTree& tree, const BalancingState& state, BlockId id);

// First slot of five consecutive adversarial proposals the setup can use, or 0.
// Strict mode only accepts params.setup_start itself.
Slot planned_setup_start(const BalancingParams& params, const SlotSchedule& schedule);

std::vector<AdversaryAction> balancing_on_tick(BalancingState& state, const BalancingParams& params,
                                               const TickContext& ctx);

class BalancingStrategy : public Strategy {
 public:
  // Throws Error{kSetupImpossible} in strict mode when a setup slot is honest.
  BalancingStrategy(BalancingParams params, const SlotSchedule& schedule,
                    const Partition& partition);

  std::vector<AdversaryAction> on_tick(const TickContext& ctx) override;
  bool honest_duties(Slot slot) const override;
  std::vector<BlockId> preferred_for(ValidatorId validator) const override;
  bool sustained() const override { return !state_.split_lost; }

  const BalancingState& state() const { return state_; }

 private:
  BalancingParams params_;
  BalancingState state_;
  Partition partition_;
};

std::unique_ptr<Strategy> make_strategy(const AttackConfig& config, const SlotSchedule& schedule,
                                        const Partition& partition);

}  // namespace ghostsim
