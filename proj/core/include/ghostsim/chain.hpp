#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "ghostsim/lottery.hpp"
#include "ghostsim/types.hpp"

namespace ghostsim {

struct Vote {
  ValidatorId voter;
  Slot slot = 0;
  BlockId target;

  friend auto operator<=>(const Vote&, const Vote&) = default;
};

struct Block {
  BlockId id;
  Slot slot = 0;
  ValidatorId proposer;
  BlockId parent;
  std::uint32_t disambiguator = 0;
  std::vector<Vote> carried_votes;

  bool is_genesis() const { return slot == 0; }
};

using BlockPtr = std::shared_ptr<const Block>;

// Hash over (slot, proposer, parent, disambiguator). Equivocating copies differ
// in parent or disambiguator and therefore in id.
BlockId make_block_id(Slot slot, ValidatorId proposer, BlockId parent, std::uint32_t disambiguator);

BlockPtr make_block(Slot slot, ValidatorId proposer, BlockId parent,
                    std::uint32_t disambiguator = 0, std::vector<Vote> carried_votes = {});

const BlockPtr& genesis_block();

// Append-only block tree rooted at genesis. Blocks get a dense index in
// insertion order; children lists keep insertion order.
class BlockTree {
 public:
  BlockTree();

  // Throws Error{kUnknownParent | kDuplicateBlockId | kNonIncreasingSlot}.
  std::size_t append(BlockPtr block);

  BlockId genesis() const { return nodes_.front().block->id; }
  std::size_t size() const { return nodes_.size(); }
  bool contains(BlockId id) const { return index_.contains(id); }

  std::optional<std::size_t> index_of(BlockId id) const;
  std::size_t index_at(BlockId id) const;  // throws kUnknownBlock
  const Block& at(BlockId id) const { return *nodes_[index_at(id)].block; }
  const Block& block(std::size_t index) const { return *nodes_[index].block; }
  const BlockPtr& block_ptr(std::size_t index) const { return nodes_[index].block; }

  // kNoParent for genesis.
  static constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);
  std::size_t parent_index(std::size_t index) const { return nodes_[index].parent; }
  const std::vector<std::size_t>& children_of(std::size_t index) const {
    return nodes_[index].children;
  }
  std::vector<BlockId> children(BlockId id) const;

  // True if `ancestor` lies on the genesis path of `descendant` (inclusive).
  bool is_ancestor(std::size_t ancestor, std::size_t descendant) const;

 private:
  struct Node {
    BlockPtr block;
    std::size_t parent = kNoParent;
    std::vector<std::size_t> children;
  };
  std::vector<Node> nodes_;
  std::unordered_map<BlockId, std::size_t> index_;
};

BlockTree append_block(BlockTree tree, BlockPtr block);

// Target exists, target.slot <= vote.slot, voter sits on the committee of vote.slot.
bool is_valid_vote(const BlockTree& tree, const SlotSchedule& schedule, const Vote& vote);

struct Ledger {
  std::vector<BlockId> blocks;  // genesis first

  BlockId tip() const { return blocks.back(); }
  std::size_t length() const { return blocks.size(); }

  friend bool operator==(const Ledger&, const Ledger&) = default;
};

Ledger chain_of(const BlockTree& tree, BlockId id);

bool is_prefix(const Ledger& a, const Ledger& b);

}  // namespace ghostsim
