#include <gtest/gtest.h>

#include "switchstab/generate.hpp"
#include "switchstab/signal.hpp"

namespace ss = switchstab;

TEST(Generate, DwellGapsRespected) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto sig = ss::Generate(ss::Dwell{1.0}, 0.0, 10.0, seed);
    const auto& sw = sig.switches();
    for (std::size_t k = 1; k < sw.size(); ++k) {
      EXPECT_GE(sw[k].time - sw[k - 1].time, 1.0 - ss::kTimeTolerance);
    }
  }
}

TEST(Generate, AdtRoundTrip) {
  const ss::SignalClassSpec spec = ss::AverageDwell{0.5, 3};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto sig = ss::Generate(spec, 0.0, 100.0, seed);
    ASSERT_TRUE(ss::Validate(sig, spec).passed) << "seed " << seed;
  }
}

TEST(Generate, TwoNodeGraphAlternates) {
  const ss::SetValuedMap h({{1, {2}}, {2, {1}}});
  ss::GenerateOptions o;
  o.initial_mode = 1;
  const auto sig = ss::Generate(ss::Intersect({ss::GraphConstrained{h}, ss::Dwell{0.5}}), 0.0,
                                20.0, 9, o);
  EXPECT_EQ(sig.initial_mode(), 1);
  ss::ModeId expect = 2;
  for (const auto& s : sig.switches()) {
    EXPECT_EQ(s.mode, expect);
    expect = 3 - expect;
  }
  EXPECT_FALSE(sig.switches().empty());
}

TEST(Generate, DeterministicPerSeed) {
  const auto spec = ss::Intersect({ss::Dwell{0.5}, ss::Ergodic{2.0, {1, 2, 3}}});
  const auto a = ss::Generate(spec, 0.0, 40.0, 17);
  const auto b = ss::Generate(spec, 0.0, 40.0, 17);
  const auto c = ss::Generate(spec, 0.0, 40.0, 18);
  EXPECT_EQ(a.switches(), b.switches());
  EXPECT_NE(a.switches(), c.switches());
}

TEST(Generate, ErgodicWithDwellRoundTrip) {
  const auto spec = ss::Intersect({ss::Dwell{1.0}, ss::Ergodic{3.0, {1, 2, 3}}});
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto sig = ss::Generate(spec, 0.0, 60.0, seed);
    ASSERT_TRUE(ss::Validate(sig, spec).passed) << "seed " << seed;
  }
}

TEST(Generate, InfeasibleErgodicDwellIsReported) {
  // Three modes in every window of length 1 need two switches 0.8 apart.
  const auto spec = ss::Intersect({ss::Dwell{0.8}, ss::Ergodic{1.0, {1, 2, 3}}});
  EXPECT_THROW(ss::Generate(spec, 0.0, 10.0, 1), ss::InfeasibleSpec);
}

TEST(Generate, GraphWithoutReturnPathIsInfeasibleForErgodic) {
  const ss::SetValuedMap h({{1, {2}}, {2, {}}});
  const auto spec = ss::Intersect({ss::GraphConstrained{h}, ss::Ergodic{2.0, {1, 2}}});
  EXPECT_THROW(ss::Generate(spec, 0.0, 10.0, 1), ss::InfeasibleSpec);
}

TEST(Generate, ModeWeightsBiasChoices) {
  ss::GenerateOptions o;
  o.modes = {1, 2, 3};
  o.mode_weights = {{1, 1.0}, {2, 1.0}, {3, 1e-9}};
  o.initial_mode = 1;
  int visits3 = 0, jumps = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sig = ss::Generate(ss::Dwell{0.5}, 0.0, 20.0, seed, o);
    for (const auto& s : sig.switches()) {
      ++jumps;
      if (s.mode == 3) ++visits3;
    }
  }
  EXPECT_GT(jumps, 0);
  EXPECT_LT(visits3, jumps / 10 + 1);
}

TEST(Generate, RejectsBadHorizon) {
  EXPECT_THROW(ss::Generate(ss::Dwell{1.0}, 1.0, 1.0, 1), ss::ConfigError);
}
