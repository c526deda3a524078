#include "ghostsim/chain.hpp"

#include <algorithm>

#include "ghostsim/error.hpp"

namespace ghostsim {
namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // SplitMix64 finalizer over a running combine.
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

}  // namespace

BlockId make_block_id(Slot slot, ValidatorId proposer, BlockId parent,
                      std::uint32_t disambiguator) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  h = mix(h, static_cast<std::uint64_t>(slot));
  h = mix(h, proposer.index);
  h = mix(h, parent.value);
  h = mix(h, disambiguator);
  return BlockId{h};
}

BlockPtr make_block(Slot slot, ValidatorId proposer, BlockId parent, std::uint32_t disambiguator,
                    std::vector<Vote> carried_votes) {
  auto block = std::make_shared<Block>();
  block->id = make_block_id(slot, proposer, parent, disambiguator);
  block->slot = slot;
  block->proposer = proposer;
  block->parent = parent;
  block->disambiguator = disambiguator;
  block->carried_votes = std::move(carried_votes);
  return block;
}

const BlockPtr& genesis_block() {
  static const BlockPtr genesis = [] {
    auto block = std::make_shared<Block>();
    block->slot = 0;
    block->proposer = ValidatorId{0xffffffffu};
    block->id = make_block_id(0, block->proposer, BlockId{0}, 0);
    return BlockPtr(block);
  }();
  return genesis;
}

BlockTree::BlockTree() {
  nodes_.push_back(Node{genesis_block(), kNoParent, {}});
  index_.emplace(genesis_block()->id, 0);
}

std::size_t BlockTree::append(BlockPtr block) {
  auto parent = index_.find(block->parent);
  if (parent == index_.end()) {
    throw Error(ErrorCode::kUnknownParent, "parent " + to_string(block->parent) + " of block " +
                                               to_string(block->id) + " not in tree");
  }
  if (index_.contains(block->id)) {
    throw Error(ErrorCode::kDuplicateBlockId, to_string(block->id));
  }
  const Block& parent_block = *nodes_[parent->second].block;
  if (block->slot <= parent_block.slot) {
    throw Error(ErrorCode::kNonIncreasingSlot,
                "block slot " + std::to_string(block->slot) + " <= parent slot " +
                    std::to_string(parent_block.slot));
  }
  const std::size_t index = nodes_.size();
  const std::size_t parent_index = parent->second;
  index_.emplace(block->id, index);
  nodes_.push_back(Node{std::move(block), parent_index, {}});
  nodes_[parent_index].children.push_back(index);
  return index;
}

std::optional<std::size_t> BlockTree::index_of(BlockId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t BlockTree::index_at(BlockId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::kUnknownBlock, to_string(id));
  return it->second;
}

std::vector<BlockId> BlockTree::children(BlockId id) const {
  std::vector<BlockId> out;
  for (std::size_t child : nodes_[index_at(id)].children) out.push_back(nodes_[child].block->id);
  return out;
}

bool BlockTree::is_ancestor(std::size_t ancestor, std::size_t descendant) const {
  // Slots strictly decrease towards genesis, so stop once we pass the ancestor's slot.
  const Slot floor = nodes_[ancestor].block->slot;
  for (std::size_t i = descendant; i != kNoParent; i = nodes_[i].parent) {
    if (i == ancestor) return true;
    if (nodes_[i].block->slot <= floor) return false;
  }
  return false;
}

BlockTree append_block(BlockTree tree, BlockPtr block) {
  tree.append(std::move(block));
  return tree;
}

bool is_valid_vote(const BlockTree& tree, const SlotSchedule& schedule, const Vote& vote) {
  auto index = tree.index_of(vote.target);
  if (!index) return false;
  if (tree.block(*index).slot > vote.slot) return false;
  if (!schedule.has_slot(vote.slot)) return false;
  return schedule.in_committee(vote.slot, vote.voter);
}

Ledger chain_of(const BlockTree& tree, BlockId id) {
  Ledger ledger;
  for (std::size_t i = tree.index_at(id); i != BlockTree::kNoParent; i = tree.parent_index(i)) {
    ledger.blocks.push_back(tree.block(i).id);
  }
  std::reverse(ledger.blocks.begin(), ledger.blocks.end());
  return ledger;
}

bool is_prefix(const Ledger& a, const Ledger& b) {
  if (a.blocks.size() > b.blocks.size()) return false;
  return std::equal(a.blocks.begin(), a.blocks.end(), b.blocks.begin());
}

}  // namespace ghostsim
