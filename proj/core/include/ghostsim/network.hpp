#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "ghostsim/chain.hpp"
#include "ghostsim/types.hpp"

namespace ghostsim {

using Payload = std::variant<BlockPtr, Vote>;

struct Message {
  Payload payload;
  ValidatorId origin;
  std::uint64_t id = 0;

  bool is_block() const { return std::holds_alternative<BlockPtr>(payload); }
  const Block& block() const { return *std::get<BlockPtr>(payload); }
  const Vote& vote() const { return std::get<Vote>(payload); }
};

// Identity of a payload independent of the message carrying it.
struct PayloadKey {
  std::uint8_t kind = 0;  // 0 block, 1 vote
  std::uint64_t a = 0;
  std::int64_t b = 0;
  std::uint64_t c = 0;

  friend auto operator<=>(const PayloadKey&, const PayloadKey&) = default;
};

PayloadKey key_of(const Payload& payload);

struct Population {
  std::uint32_t num_validators = 0;
  std::uint32_t num_adversarial = 0;

  bool is_adversarial(ValidatorId v) const { return v.index < num_adversarial; }
};

class Recipients {
 public:
  static Recipients all();
  static Recipients only(std::span<const ValidatorId> members, std::uint32_t num_validators,
                         std::string label);

  bool is_all() const { return mask_ == nullptr; }
  bool contains(ValidatorId v) const;
  std::size_t count(std::uint32_t num_validators) const;
  const std::string& label() const { return label_; }

 private:
  std::shared_ptr<const std::vector<bool>> mask_;
  std::string label_ = "all";
};

struct Delivery {
  Tick tick = 0;
  std::uint64_t seq = 0;
  Recipients recipients;
  Message message;
};

// Discrete-event queue. Deliveries due at the same tick come out in the order
// they were scheduled, so every recipient sees one deterministic arrival order.
class MessageQueue {
 public:
  void schedule(Message message, Recipients recipients, Tick tick);
  std::vector<Delivery> pop_due(Tick now);

  bool empty() const { return by_tick_.empty(); }
  std::size_t size() const;
  // Everything still queued, tick then arrival order.
  std::vector<Delivery> pending() const;

 private:
  std::map<Tick, std::vector<Delivery>> by_tick_;
  std::uint64_t next_seq_ = 0;
};

enum class Side { kNone, kLeft, kRight };
enum class PartitionLayout { kHalves, kInterleaved };

std::string_view to_string(PartitionLayout layout);
std::optional<PartitionLayout> parse_partition_layout(std::string_view text);

// Split of the honest validators into the two halves fed opposite message orders.
class Partition {
 public:
  Partition() = default;
  Partition(std::vector<ValidatorId> left, std::vector<ValidatorId> right);

  // Honest ids [num_adversarial, num_validators) split in two halves whose
  // sizes differ by at most one. `jitter` swaps that fraction of members
  // between the halves, chosen from `seed`.
  static Partition balanced(const Population& population, PartitionLayout layout,
                            double jitter, std::uint64_t seed);

  const std::vector<ValidatorId>& left() const { return left_; }
  const std::vector<ValidatorId>& right() const { return right_; }
  Side side_of(ValidatorId v) const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<ValidatorId> left_;   // sorted
  std::vector<ValidatorId> right_;  // sorted
};

// Messages the adversary has produced but not yet released.
class AdversaryBuffer {
 public:
  void hold(Message message);
  std::optional<Message> take(const Payload& payload);
  bool contains(const Payload& payload) const;
  std::size_t size() const { return held_.size(); }

 private:
  std::map<PayloadKey, Message> held_;
};

// Delivered to every validator at now + 1.
void broadcast(MessageQueue& queue, const Message& message, Tick now);

// Throws Error{kNotAdversarial} for honest-origin messages.
void withhold(AdversaryBuffer& buffer, const Message& message, const Population& population);

// H_Left gets `first` at now+1 and `second` at now+2, H_Right the reverse;
// adversarial validators get both at now+1. Throws Error{kNotAdversarial}.
void split_release(MessageQueue& queue, std::span<const Message> first,
                   std::span<const Message> second, const Partition& partition,
                   const Population& population, Tick now);

}  // namespace ghostsim
