#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "ghostsim/error.hpp"
#include "ghostsim/lottery.hpp"

namespace ghostsim {
namespace {

LotteryConfig make_config(std::uint32_t n, std::uint32_t w, Fraction beta, std::uint64_t seed = 1) {
  LotteryConfig c;
  c.num_validators = n;
  c.committee_size = w;
  c.adversary_fraction = beta;
  c.seed = seed;
  return c;
}

TEST(FractionTest, FloorIsExactForDecimalInputs) {
  EXPECT_EQ(Fraction::from_double(0.29).floor_mul(100), 29);
  EXPECT_EQ(Fraction::from_double(0.3).floor_mul(10), 3);
  EXPECT_EQ(Fraction::from_double(0.2), (Fraction{1, 5}));
}

TEST(LotteryTest, IsAdversarialUsesIdPrefix) {
  const SlotSchedule unused;
  EXPECT_TRUE(is_adversarial(unused, ValidatorId{1}, make_config(10, 4, {1, 5})));
  EXPECT_FALSE(is_adversarial(unused, ValidatorId{2}, make_config(10, 4, {1, 5})));
  EXPECT_TRUE(is_adversarial(unused, ValidatorId{2}, make_config(10, 4, Fraction::from_double(0.3))));
}

TEST(LotteryTest, OverrideMarksExactlyTheForcedSlots) {
  LotteryConfig c = make_config(100, 10, {1, 5});
  c.overrides.push_back({1, 5, std::nullopt, ProposerClass::kAdversarial, std::nullopt});
  c.overrides.push_back({6, 30, std::nullopt, ProposerClass::kHonest, std::nullopt});
  const SlotSchedule s = draw_schedule(c, 30);
  for (Slot t = 1; t <= 30; ++t) {
    EXPECT_EQ(s.adversarial_proposer(t), t <= 5) << "slot " << t;
    EXPECT_EQ(s.adversarial_proposer(t), s.is_adversarial(s.proposer(t)));
  }
}

TEST(LotteryTest, FixedProposerBeatsClassAndCommitteeIsReplaced) {
  LotteryConfig c = make_config(50, 5, {1, 5});
  c.overrides.push_back({3, 3, ValidatorId{42}, ProposerClass::kAdversarial,
                         std::vector<ValidatorId>{ValidatorId{9}, ValidatorId{1}}});
  const SlotSchedule s = draw_schedule(c, 4);
  EXPECT_EQ(s.proposer(3), ValidatorId{42});
  EXPECT_FALSE(s.adversarial_proposer(3));
  EXPECT_EQ(s.committee(3), (std::vector<ValidatorId>{ValidatorId{1}, ValidatorId{9}}));
}

TEST(LotteryTest, ZeroFractionHasNoAdversarialProposer) {
  const SlotSchedule s = draw_schedule(make_config(100, 10, {0, 1}), 500);
  for (Slot t = 1; t <= s.num_slots(); ++t) EXPECT_FALSE(s.adversarial_proposer(t));
  EXPECT_EQ(s.num_adversarial(), 0u);
}

TEST(LotteryTest, ExactFractionFixesAdversarialCommitteeCount) {
  LotteryConfig c = make_config(1000, 100, {1, 5});
  c.sampling = SamplingMode::kExactFraction;
  const SlotSchedule s = draw_schedule(c, 200);
  for (Slot t = 1; t <= s.num_slots(); ++t) {
    EXPECT_EQ(s.adversarial_members(t).size(), 20u);
    EXPECT_EQ(s.honest_member_count(t), 80u);
  }
}

TEST(LotteryTest, CommitteesAreSortedDistinctAndSized) {
  const SlotSchedule s = draw_schedule(make_config(60, 25, {1, 4}, 9), 100);
  for (Slot t = 1; t <= s.num_slots(); ++t) {
    const auto& c = s.committee(t);
    ASSERT_EQ(c.size(), 25u);
    EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
    EXPECT_EQ(std::set<ValidatorId>(c.begin(), c.end()).size(), c.size());
    EXPECT_LT(c.back().index, 60u);
    EXPECT_LT(s.proposer(t).index, 60u);
  }
}

TEST(LotteryTest, AdversarialProposerFrequencyTracksFraction) {
  const SlotSchedule s = draw_schedule(make_config(1000, 10, {1, 5}, 77), 20000);
  std::size_t adversarial = 0;
  for (Slot t = 1; t <= s.num_slots(); ++t) adversarial += s.adversarial_proposer(t) ? 1 : 0;
  const double freq = static_cast<double>(adversarial) / static_cast<double>(s.num_slots());
  EXPECT_NEAR(freq, 0.2, 0.02);
}

TEST(LotteryTest, DrawIsReproducibleAndSeedSensitive) {
  const LotteryConfig c = make_config(100, 20, {3, 10}, 123);
  EXPECT_EQ(draw_schedule(c, 80), draw_schedule(c, 80));
  LotteryConfig other = c;
  other.seed = 124;
  EXPECT_NE(draw_schedule(c, 80), draw_schedule(other, 80));
}

TEST(LotteryTest, InvalidConfigsAreRejected) {
  auto expect_invalid = [](const LotteryConfig& c) {
    try {
      draw_schedule(c, 5);
      ADD_FAILURE() << "accepted invalid config";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    }
  };
  expect_invalid(make_config(10, 11, {0, 1}));
  expect_invalid(make_config(0, 0, {0, 1}));
  expect_invalid(make_config(10, 5, {1, 1}));
  LotteryConfig no_adv = make_config(10, 5, {0, 1});
  no_adv.overrides.push_back({1, 1, std::nullopt, ProposerClass::kAdversarial, std::nullopt});
  expect_invalid(no_adv);
  LotteryConfig backwards = make_config(10, 5, {0, 1});
  backwards.overrides.push_back({4, 2, std::nullopt, std::nullopt, std::nullopt});
  expect_invalid(backwards);
}

}  // namespace
}  // namespace ghostsim
