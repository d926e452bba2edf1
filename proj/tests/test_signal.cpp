#include <gtest/gtest.h>

#include <random>

#include "switchstab/generate.hpp"
#include "switchstab/signal.hpp"

namespace ss = switchstab;

namespace {

ss::SwitchingSignal TwoSwitches() { return ss::SwitchingSignal(0.0, 5.0, 1, {{1.0, 2}, {2.5, 1}}); }

ss::SwitchingSignal Alternating(const std::vector<double>& times, double t_end) {
  std::vector<ss::Switch> sw;
  ss::ModeId m = 1;
  for (double t : times) {
    m = 3 - m;
    sw.push_back({t, m});
  }
  return ss::SwitchingSignal(-1.0, t_end, 1, sw);
}

}  // namespace

TEST(SwitchingSignal, RightContinuousValues) {
  const auto sig = TwoSwitches();
  EXPECT_EQ(sig.ValueAt(0.0), 1);
  EXPECT_EQ(sig.ValueAt(1.0), 2);
  EXPECT_EQ(sig.ValueBefore(1.0), 1);
  EXPECT_EQ(sig.ValueAt(2.4999), 2);
  EXPECT_EQ(sig.ValueAt(2.5), 1);
  EXPECT_EQ(sig.ValueAt(4.9), 1);
}

TEST(SwitchingSignal, RejectsMalformedSwitches) {
  EXPECT_THROW(ss::SwitchingSignal(0.0, 5.0, 1, {{2.0, 2}, {1.0, 1}}), ss::DomainError);
  EXPECT_THROW(ss::SwitchingSignal(0.0, 5.0, 1, {{1.0, 1}}), ss::DomainError);
  EXPECT_THROW(ss::SwitchingSignal(0.0, 5.0, 1, {{5.0, 2}}), ss::DomainError);
  EXPECT_THROW(ss::SwitchingSignal(1.0, 1.0, 1), ss::DomainError);
}

TEST(NextSwitchTime, Examples) {
  const auto sig = TwoSwitches();
  EXPECT_DOUBLE_EQ(ss::NextSwitchTime(sig, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(ss::NextSwitchTime(sig, 1.0), 2.5);
  EXPECT_EQ(ss::NextSwitchTime(sig, 3.0), ss::kInfinity);
  EXPECT_THROW(ss::NextSwitchTime(sig, 5.0), ss::DomainError);
  EXPECT_THROW(ss::NextSwitchTime(sig, -0.1), ss::DomainError);
}

TEST(CountSwitches, OpenIntervals) {
  const ss::SwitchingSignal sig(0.0, 5.0, 1, {{1.0, 2}, {2.5, 1}, {3.0, 2}});
  EXPECT_EQ(ss::CountSwitches(sig, 0.0, 4.0), 3u);
  EXPECT_EQ(ss::CountSwitches(sig, 1.0, 3.0), 1u);
  EXPECT_EQ(ss::CountSwitches(ss::SwitchingSignal::Constant(0, 5, 1), 0.0, 5.0), 0u);
}

TEST(Shift, TranslatesSwitches) {
  const auto shifted = ss::Shift(TwoSwitches(), 1.0);
  ASSERT_EQ(shifted.switches().size(), 2u);
  EXPECT_DOUBLE_EQ(shifted.switches()[0].time, 0.0);
  EXPECT_DOUBLE_EQ(shifted.switches()[1].time, 1.5);
  for (double t = -1.0; t < 4.0; t += 0.01) {
    EXPECT_EQ(shifted.ValueAt(t), TwoSwitches().ValueAt(t + 1.0));
  }
  const auto same = ss::Shift(TwoSwitches(), 0.0);
  EXPECT_EQ(same.switches(), TwoSwitches().switches());
  EXPECT_EQ(same.t_begin(), 0.0);
}

TEST(ValidateAdt, HandExamples) {
  const auto tight = Alternating({0.0, 0.5}, 3.0);
  const auto report = ss::Validate(tight, ss::AverageDwell{1.0, 1});
  EXPECT_FALSE(report.passed);
  ASSERT_TRUE(report.switch_indices.has_value());
  EXPECT_TRUE(ss::Validate(Alternating({0.0, 2.0, 4.0}, 5.0), ss::AverageDwell{1.0, 1}).passed);
  EXPECT_TRUE(ss::Validate(tight, ss::AverageDwell{1.0, 2}).passed);
}

TEST(ValidateAdt, EqualityIsAdmissible) {
  EXPECT_TRUE(ss::Validate(Alternating({0.0, 1.0, 2.0, 3.0}, 4.0), ss::Dwell{1.0}).passed);
  EXPECT_FALSE(ss::Validate(Alternating({0.0, 1.0, 1.999, 3.0}, 4.0), ss::Dwell{1.0}).passed);
}

TEST(ValidateErgodic, Windows) {
  std::vector<double> times;
  for (int k = 1; k < 10; ++k) times.push_back(k);
  const ss::Ergodic e{2.0, {1, 2}};
  EXPECT_TRUE(ss::Validate(Alternating(times, 10.0), e).passed);
  const auto constant = ss::Validate(ss::SwitchingSignal::Constant(0, 10, 1), e);
  EXPECT_FALSE(constant.passed);
  ASSERT_TRUE(constant.missing_mode.has_value());
  EXPECT_EQ(*constant.missing_mode, 2);
  EXPECT_THROW(ss::Validate(ss::SwitchingSignal::Constant(0, 1, 1), e), ss::HorizonTooShort);
}

TEST(ValidateGraph, JumpMembership) {
  const ss::SetValuedMap h({{1, {2}}, {2, {3}}, {3, {1}}});
  const ss::SwitchingSignal good(0, 10, 1, {{1, 2}, {2, 3}, {3, 1}});
  EXPECT_TRUE(ss::Validate(good, ss::GraphConstrained{h}).passed);
  const ss::SwitchingSignal bad(0, 10, 1, {{1, 3}});
  const auto r = ss::Validate(bad, ss::GraphConstrained{h});
  EXPECT_FALSE(r.passed);
  ASSERT_TRUE(r.jump.has_value());
  EXPECT_EQ(*r.jump, std::make_pair(1, 3));
}

TEST(ValidateIntersection, AllMembersMustPass) {
  const auto sig = Alternating({0.0, 0.5}, 3.0);
  EXPECT_FALSE(
      ss::Validate(sig, ss::Intersect({ss::AverageDwell{1.0, 2}, ss::Dwell{1.0}})).passed);
  EXPECT_TRUE(
      ss::Validate(sig, ss::Intersect({ss::AverageDwell{1.0, 2}, ss::Dwell{0.5}})).passed);
}

TEST(ClassQueries, DwellAndErgodicExtraction) {
  const auto spec = ss::Intersect({ss::AverageDwell{0.4, 3}, ss::Dwell{0.5},
                                   ss::Ergodic{2.0, {1, 2}}});
  ASSERT_TRUE(ss::DwellTimeOf(spec).has_value());
  EXPECT_DOUBLE_EQ(*ss::DwellTimeOf(spec), 0.5);
  EXPECT_TRUE(ss::HasAverageDwell(spec));
  ASSERT_NE(ss::ErgodicOf(spec), nullptr);
  EXPECT_EQ(ss::GraphOf(spec), nullptr);
  EXPECT_FALSE(ss::HasAverageDwell(ss::Ergodic{1.0, {1}}));
}

// Dwell(tau) and ADT(tau, 1) agree on every input.
TEST(Property, DwellMatchesAdtWithUnitChatter) {
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> gap(1.5);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> times;
    double t = 0.0;
    while ((t += gap(rng)) < 20.0) times.push_back(t);
    const auto sig = Alternating(times, 20.0);
    for (double tau : {0.2, 0.5, 1.0}) {
      EXPECT_EQ(ss::Validate(sig, ss::Dwell{tau}).passed,
                ss::Validate(sig, ss::AverageDwell{tau, 1}).passed);
    }
  }
}

// Validity under ADT, dwell and graph classes is shift invariant.
TEST(Property, ShiftClosure) {
  const ss::SetValuedMap h({{1, {2}}, {2, {1}}});
  std::mt19937_64 rng(4);
  std::exponential_distribution<double> gap(2.0);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> times;
    double t = 0.0;
    while ((t += gap(rng)) < 20.0) times.push_back(t);
    const auto sig = Alternating(times, 20.0);
    const auto moved = ss::Shift(sig, shift(rng));
    for (const ss::SignalClassSpec& spec :
         {ss::SignalClassSpec(ss::AverageDwell{0.5, 2}), ss::SignalClassSpec(ss::Dwell{0.3}),
          ss::SignalClassSpec(ss::GraphConstrained{h})}) {
      EXPECT_EQ(ss::Validate(sig, spec).passed, ss::Validate(moved, spec).passed);
    }
  }
}

TEST(Property, ShiftClosureOnGeneratedSignals) {
  const ss::SignalClassSpec spec = ss::AverageDwell{0.5, 3};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto sig = ss::Generate(spec, 0.0, 30.0, seed);
    EXPECT_TRUE(ss::Validate(ss::Shift(sig, 7.25), spec).passed);
  }
}
