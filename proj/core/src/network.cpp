#include "ghostsim/network.hpp"

#include <algorithm>
#include <cmath>

#include "ghostsim/error.hpp"
#include "rng.hpp"

namespace ghostsim {

PayloadKey key_of(const Payload& payload) {
  if (const auto* block = std::get_if<BlockPtr>(&payload)) {
    return PayloadKey{0, (*block)->id.value, 0, 0};
  }
  const Vote& v = std::get<Vote>(payload);
  return PayloadKey{1, v.voter.index, v.slot, v.target.value};
}

Recipients Recipients::all() { return Recipients(); }

Recipients Recipients::only(std::span<const ValidatorId> members, std::uint32_t num_validators,
                            std::string label) {
  auto mask = std::make_shared<std::vector<bool>>(num_validators, false);
  for (ValidatorId v : members) {
    if (v.index < num_validators) (*mask)[v.index] = true;
  }
  Recipients r;
  r.mask_ = std::move(mask);
  r.label_ = std::move(label);
  return r;
}

bool Recipients::contains(ValidatorId v) const {
  return mask_ == nullptr || (v.index < mask_->size() && (*mask_)[v.index]);
}

std::size_t Recipients::count(std::uint32_t num_validators) const {
  if (mask_ == nullptr) return num_validators;
  return static_cast<std::size_t>(std::count(mask_->begin(), mask_->end(), true));
}

void MessageQueue::schedule(Message message, Recipients recipients, Tick tick) {
  by_tick_[tick].push_back(Delivery{tick, next_seq_++, std::move(recipients), std::move(message)});
}

std::vector<Delivery> MessageQueue::pop_due(Tick now) {
  std::vector<Delivery> due;
  while (!by_tick_.empty() && by_tick_.begin()->first <= now) {
    auto node = by_tick_.extract(by_tick_.begin());
    for (auto& d : node.mapped()) due.push_back(std::move(d));
  }
  return due;
}

std::size_t MessageQueue::size() const {
  std::size_t n = 0;
  for (const auto& [tick, list] : by_tick_) n += list.size();
  return n;
}

std::vector<Delivery> MessageQueue::pending() const {
  std::vector<Delivery> out;
  for (const auto& [tick, list] : by_tick_) out.insert(out.end(), list.begin(), list.end());
  return out;
}

std::string_view to_string(PartitionLayout layout) {
  return layout == PartitionLayout::kHalves ? "halves" : "interleaved";
}

std::optional<PartitionLayout> parse_partition_layout(std::string_view text) {
  if (text == "halves") return PartitionLayout::kHalves;
  if (text == "interleaved") return PartitionLayout::kInterleaved;
  return std::nullopt;
}

Partition::Partition(std::vector<ValidatorId> left, std::vector<ValidatorId> right)
    : left_(std::move(left)), right_(std::move(right)) {
  std::sort(left_.begin(), left_.end());
  std::sort(right_.begin(), right_.end());
}

Partition Partition::balanced(const Population& population, PartitionLayout layout, double jitter,
                              std::uint64_t seed) {
  std::vector<ValidatorId> left;
  std::vector<ValidatorId> right;
  const std::uint32_t first = population.num_adversarial;
  const std::uint32_t honest = population.num_validators - first;
  for (std::uint32_t i = 0; i < honest; ++i) {
    const bool to_left = layout == PartitionLayout::kHalves ? i < (honest + 1) / 2 : i % 2 == 0;
    (to_left ? left : right).push_back(ValidatorId{first + i});
  }
  const auto swaps = static_cast<std::size_t>(
      std::llround(std::clamp(jitter, 0.0, 1.0) * static_cast<double>(right.size())));
  if (swaps > 0) {
    std::mt19937_64 rng(splitmix64(seed ^ 0x70617274ULL));
    for (std::size_t i = 0; i < swaps; ++i) {
      const auto a = uniform_below(rng, left.size());
      const auto b = uniform_below(rng, right.size());
      std::swap(left[a], right[b]);
    }
  }
  return Partition(std::move(left), std::move(right));
}

Side Partition::side_of(ValidatorId v) const {
  if (std::binary_search(left_.begin(), left_.end(), v)) return Side::kLeft;
  if (std::binary_search(right_.begin(), right_.end(), v)) return Side::kRight;
  return Side::kNone;
}

void AdversaryBuffer::hold(Message message) {
  const PayloadKey key = key_of(message.payload);
  held_.insert_or_assign(key, std::move(message));
}

std::optional<Message> AdversaryBuffer::take(const Payload& payload) {
  auto it = held_.find(key_of(payload));
  if (it == held_.end()) return std::nullopt;
  Message m = std::move(it->second);
  held_.erase(it);
  return m;
}

bool AdversaryBuffer::contains(const Payload& payload) const {
  return held_.contains(key_of(payload));
}

void broadcast(MessageQueue& queue, const Message& message, Tick now) {
  queue.schedule(message, Recipients::all(), now + 1);
}

void withhold(AdversaryBuffer& buffer, const Message& message, const Population& population) {
  if (!population.is_adversarial(message.origin)) {
    throw Error(ErrorCode::kNotAdversarial,
                "validator " + std::to_string(message.origin.index) + " is honest");
  }
  buffer.hold(message);
}

void split_release(MessageQueue& queue, std::span<const Message> first,
                   std::span<const Message> second, const Partition& partition,
                   const Population& population, Tick now) {
  for (auto batch : {first, second}) {
    for (const Message& m : batch) {
      if (!population.is_adversarial(m.origin)) {
        throw Error(ErrorCode::kNotAdversarial,
                    "split release of a message from honest validator " +
                        std::to_string(m.origin.index));
      }
    }
  }
  std::vector<ValidatorId> adversarial;
  for (std::uint32_t i = 0; i < population.num_adversarial; ++i) adversarial.push_back({i});
  auto with_adversary = [&](const std::vector<ValidatorId>& side) {
    std::vector<ValidatorId> out = adversarial;
    out.insert(out.end(), side.begin(), side.end());
    return out;
  };
  const std::uint32_t n = population.num_validators;
  const auto left_now = Recipients::only(with_adversary(partition.left()), n, "left+adversary");
  const auto right_now = Recipients::only(with_adversary(partition.right()), n, "right+adversary");
  const auto left_later = Recipients::only(partition.left(), n, "left");
  const auto right_later = Recipients::only(partition.right(), n, "right");

  for (const Message& m : first) queue.schedule(m, left_now, now + 1);
  for (const Message& m : second) queue.schedule(m, right_now, now + 1);
  for (const Message& m : second) queue.schedule(m, left_later, now + 2);
  for (const Message& m : first) queue.schedule(m, right_later, now + 2);
}

}  // namespace ghostsim
