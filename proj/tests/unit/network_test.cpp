#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "ghostsim/error.hpp"
#include "ghostsim/honest.hpp"
#include "ghostsim/network.hpp"
#include "oracles.hpp"

namespace ghostsim {
namespace {

Message block_message(BlockPtr b, std::uint64_t id = 0) {
  const ValidatorId origin = b->proposer;
  return Message{std::move(b), origin, id};
}

Message vote_message(const Vote& v, std::uint64_t id = 0) { return Message{v, v.voter, id}; }

std::vector<std::uint64_t> ids_for(const std::vector<Delivery>& due, ValidatorId v) {
  std::vector<std::uint64_t> out;
  for (const Delivery& d : due) {
    if (d.recipients.contains(v)) out.push_back(d.message.id);
  }
  return out;
}

TEST(MessageQueueTest, BroadcastArrivesNextTickInSendOrder) {
  MessageQueue q;
  const BlockPtr b = make_block(3, ValidatorId{5}, genesis_block()->id);
  broadcast(q, block_message(b, 1), proposal_tick(3));
  broadcast(q, block_message(make_block(3, ValidatorId{5}, genesis_block()->id, 1), 2), proposal_tick(3));
  EXPECT_TRUE(q.pop_due(proposal_tick(3)).empty());
  const auto due = q.pop_due(voting_tick(3));
  ASSERT_EQ(due.size(), 2u);
  EXPECT_EQ(due[0].message.id, 1u);
  EXPECT_EQ(due[1].message.id, 2u);
  EXPECT_EQ(due[0].tick, voting_tick(3));
  EXPECT_TRUE(q.empty());
}

TEST(MessageQueueTest, PendingListsByTickThenArrival) {
  MessageQueue q;
  const BlockPtr b = make_block(1, ValidatorId{0}, genesis_block()->id);
  q.schedule(block_message(b, 1), Recipients::all(), 5);
  q.schedule(block_message(b, 2), Recipients::all(), 3);
  q.schedule(block_message(b, 3), Recipients::all(), 5);
  const auto pending = q.pending();
  ASSERT_EQ(q.size(), 3u);
  EXPECT_EQ(pending[0].message.id, 2u);
  EXPECT_EQ(pending[1].message.id, 1u);
  EXPECT_EQ(pending[2].message.id, 3u);
}

TEST(MessageQueueTest, VoteSentAtVotingTickCountsFromNextSlot) {
  const SlotSchedule schedule = testing::everyone_schedule(4, 0, 5);
  ValidatorView view;
  MessageQueue q;
  const BlockPtr b1 = make_block(1, ValidatorId{0}, genesis_block()->id);
  view.on_receive(block_message(b1), schedule, ForkChoiceMode::kCommitteeGhost);
  broadcast(q, vote_message(Vote{ValidatorId{2}, 1, b1->id}), voting_tick(1));
  for (const Delivery& d : q.pop_due(proposal_tick(2))) {
    view.on_receive(d.message, schedule, ForkChoiceMode::kCommitteeGhost);
  }
  auto weight_at = [&](Slot s) {
    return subtree_weight(view.context(schedule, ForkChoiceMode::kCommitteeGhost, s, 0, false), b1->id);
  };
  EXPECT_EQ(weight_at(1), 0);
  EXPECT_EQ(weight_at(2), 1);
}

TEST(AdversaryBufferTest, WithheldBlocksStayHiddenUntilReleased) {
  const Population pop{10, 3};
  AdversaryBuffer buffer;
  MessageQueue q;
  std::vector<BlockPtr> blocks;
  BlockId parent = genesis_block()->id;
  for (Slot s = 1; s <= 6; ++s) {
    blocks.push_back(make_block(s, ValidatorId{1}, parent));
    withhold(buffer, block_message(blocks.back()), pop);
  }
  EXPECT_EQ(buffer.size(), 6u);
  EXPECT_TRUE(q.empty());
  EXPECT_TRUE(buffer.contains(blocks[2]));
  auto released = buffer.take(blocks[2]);
  ASSERT_TRUE(released.has_value());
  EXPECT_FALSE(buffer.contains(blocks[2]));
  EXPECT_FALSE(buffer.take(blocks[2]).has_value());
  broadcast(q, *released, 20);
  EXPECT_TRUE(q.pop_due(20).empty());
  EXPECT_EQ(q.pop_due(21).size(), 1u);
}

TEST(AdversaryBufferTest, HonestMessagesCannotBeWithheld) {
  AdversaryBuffer buffer;
  const auto honest = block_message(make_block(1, ValidatorId{7}, genesis_block()->id));
  try {
    withhold(buffer, honest, Population{10, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotAdversarial);
  }
  EXPECT_EQ(buffer.size(), 0u);
}

TEST(PartitionTest, BalancedHalvesCoverHonestValidators) {
  for (auto layout : {PartitionLayout::kHalves, PartitionLayout::kInterleaved}) {
    for (double jitter : {0.0, 0.3}) {
      const Population pop{101, 20};
      const Partition p = Partition::balanced(pop, layout, jitter, 9);
      EXPECT_LE(std::max(p.left().size(), p.right().size()) - std::min(p.left().size(), p.right().size()), 1u);
      std::set<ValidatorId> all(p.left().begin(), p.left().end());
      all.insert(p.right().begin(), p.right().end());
      EXPECT_EQ(all.size(), 81u);
      EXPECT_EQ(all.begin()->index, 20u);
      EXPECT_EQ(p.side_of(ValidatorId{3}), Side::kNone);
      EXPECT_EQ(p, Partition::balanced(pop, layout, jitter, 9));
    }
  }
  EXPECT_NE(Partition::balanced({100, 20}, PartitionLayout::kHalves, 0.0, 1),
            Partition::balanced({100, 20}, PartitionLayout::kHalves, 0.5, 1));
  EXPECT_EQ(parse_partition_layout(to_string(PartitionLayout::kInterleaved)), PartitionLayout::kInterleaved);
}

TEST(SplitReleaseTest, EachHalfSeesItsOwnSideFirst) {
  const Population pop{6, 2};
  const Partition partition({ValidatorId{2}, ValidatorId{3}}, {ValidatorId{4}, ValidatorId{5}});
  const BlockPtr left = make_block(1, ValidatorId{0}, genesis_block()->id, 0);
  const BlockPtr right = make_block(1, ValidatorId{0}, genesis_block()->id, 1);
  const std::vector<Message> first{block_message(left, 1)};
  const std::vector<Message> second{block_message(right, 2)};
  MessageQueue q;
  split_release(q, first, second, partition, pop, 10);
  const auto at11 = q.pop_due(11);
  const auto at12 = q.pop_due(12);
  EXPECT_EQ(ids_for(at11, ValidatorId{2}), std::vector<std::uint64_t>{1});
  EXPECT_EQ(ids_for(at12, ValidatorId{2}), std::vector<std::uint64_t>{2});
  EXPECT_EQ(ids_for(at11, ValidatorId{5}), std::vector<std::uint64_t>{2});
  EXPECT_EQ(ids_for(at12, ValidatorId{5}), std::vector<std::uint64_t>{1});
  EXPECT_EQ(ids_for(at11, ValidatorId{0}), (std::vector<std::uint64_t>{1, 2}));
  EXPECT_TRUE(ids_for(at12, ValidatorId{0}).empty());
}

TEST(SplitReleaseTest, VotesSplitIntoOppositeLatestMessageTables) {
  const SlotSchedule schedule = testing::everyone_schedule(500, 100, 6);
  const Population pop{500, 100};
  const Partition partition = Partition::balanced(pop, PartitionLayout::kHalves, 0.0, 0);
  BlockTree tree;
  std::vector<BlockPtr> left, right;
  BlockId l = tree.genesis(), r = tree.genesis();
  for (Slot s = 1; s <= 5; ++s) {
    left.push_back(make_block(s, ValidatorId{0}, l, 0));
    right.push_back(make_block(s, ValidatorId{0}, r, 1));
    l = left.back()->id;
    r = right.back()->id;
  }
  std::vector<Message> first, second;
  for (std::size_t i = 0; i < 5; ++i) {
    first.push_back(block_message(left[i]));
    second.push_back(block_message(right[i]));
  }
  for (Slot s = 1; s <= 4; ++s) {
    for (std::uint32_t i = 0; i < 20; ++i) {
      const ValidatorId v{static_cast<std::uint32_t>(20 * (s - 1)) + i};
      first.push_back(vote_message(Vote{v, s, left[static_cast<std::size_t>(s - 1)]->id}));
      second.push_back(vote_message(Vote{v, s, right[static_cast<std::size_t>(s - 1)]->id}));
    }
  }
  MessageQueue q;
  split_release(q, first, second, partition, pop, voting_tick(5));
  ValidatorView h_left, h_right;
  const ValidatorId lm = partition.left().front(), rm = partition.right().front();
  for (Tick t = voting_tick(5) + 1; t <= voting_tick(5) + 2; ++t) {
    for (const Delivery& d : q.pop_due(t)) {
      if (d.recipients.contains(lm)) h_left.on_receive(d.message, schedule, ForkChoiceMode::kCommitteeGhostLmd);
      if (d.recipients.contains(rm)) h_right.on_receive(d.message, schedule, ForkChoiceMode::kCommitteeGhostLmd);
    }
  }
  auto weights = [&](const ValidatorView& v) {
    const auto ctx = v.context(schedule, ForkChoiceMode::kCommitteeGhostLmd, 6, 0, false);
    return std::pair{subtree_weight(ctx, left[0]->id), subtree_weight(ctx, right[0]->id)};
  };
  EXPECT_EQ(weights(h_left), (std::pair<Weight, Weight>{80, 0}));
  EXPECT_EQ(weights(h_right), (std::pair<Weight, Weight>{0, 80}));
  EXPECT_EQ(h_left.votes().votes().size(), 160u);
}

TEST(SplitReleaseTest, EmptySideDegeneratesToOrderedBroadcast) {
  const Population pop{4, 1};
  const Partition partition({}, {ValidatorId{1}, ValidatorId{2}, ValidatorId{3}});
  const BlockPtr a = make_block(1, ValidatorId{0}, genesis_block()->id, 0);
  const BlockPtr b = make_block(1, ValidatorId{0}, genesis_block()->id, 1);
  MessageQueue q;
  split_release(q, std::vector<Message>{block_message(a, 1)}, std::vector<Message>{block_message(b, 2)},
                partition, pop, 0);
  std::vector<Delivery> due = q.pop_due(2);
  for (std::uint32_t v = 1; v <= 3; ++v) {
    EXPECT_EQ(ids_for(due, ValidatorId{v}), (std::vector<std::uint64_t>{2, 1}));
  }
}

TEST(SplitReleaseTest, IdenticalBundlesLeaveIdenticalViews) {
  const SlotSchedule schedule = testing::everyone_schedule(6, 2, 3);
  const Population pop{6, 2};
  const Partition partition = Partition::balanced(pop, PartitionLayout::kHalves, 0.0, 0);
  const BlockPtr b = make_block(1, ValidatorId{0}, genesis_block()->id);
  const std::vector<Message> bundle{block_message(b), vote_message(Vote{ValidatorId{1}, 1, b->id})};
  MessageQueue q;
  split_release(q, bundle, bundle, partition, pop, 0);
  std::vector<ValidatorView> views(6);
  for (const Delivery& d : q.pop_due(2)) {
    for (std::uint32_t v = 0; v < 6; ++v) {
      if (d.recipients.contains(ValidatorId{v})) views[v].on_receive(d.message, schedule, ForkChoiceMode::kCommitteeGhostLmd);
    }
  }
  for (std::uint32_t v = 1; v < 6; ++v) {
    EXPECT_EQ(views[v].tree().size(), views[0].tree().size());
    EXPECT_EQ(views[v].latest().entries(), views[0].latest().entries());
  }
}

TEST(SplitReleaseTest, RejectsHonestOrigin) {
  MessageQueue q;
  const auto honest = block_message(make_block(1, ValidatorId{5}, genesis_block()->id));
  try {
    split_release(q, std::vector<Message>{honest}, {}, Partition{}, Population{6, 2}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotAdversarial);
  }
  EXPECT_TRUE(q.empty());
}

TEST(PayloadKeyTest, DistinguishesBlocksAndVotes) {
  const BlockPtr b = make_block(1, ValidatorId{0}, genesis_block()->id);
  EXPECT_NE(key_of(b), key_of(Vote{ValidatorId{0}, 1, b->id}));
  EXPECT_NE(key_of(Vote{ValidatorId{0}, 1, b->id}), key_of(Vote{ValidatorId{0}, 2, b->id}));
  EXPECT_EQ(key_of(b), key_of(make_block(1, ValidatorId{0}, genesis_block()->id)));
}

TEST(RecipientsTest, CountsMembers) {
  const std::vector<ValidatorId> members{ValidatorId{1}, ValidatorId{4}, ValidatorId{40}};
  const auto r = Recipients::only(members, 10, "x");
  EXPECT_EQ(r.count(10), 2u);
  EXPECT_TRUE(r.contains(ValidatorId{4}));
  EXPECT_FALSE(r.contains(ValidatorId{2}));
  EXPECT_FALSE(r.is_all());
  EXPECT_EQ(r.label(), "x");
  EXPECT_EQ(Recipients::all().count(10), 10u);
}

}  // namespace
}  // namespace ghostsim
