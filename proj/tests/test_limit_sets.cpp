#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "switchstab/generate.hpp"
#include "switchstab/limit_sets.hpp"

namespace ss = switchstab;
using ss::Matrix;
using ss::Vector;

namespace {

ss::SetEstimate UnitCircle(int n) {
  ss::SetEstimate c;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n;
    Vector p(2);
    p << std::cos(th), std::sin(th);
    c.points.push_back(p);
  }
  return c;
}

Vector V2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(OmegaLimit, GlobalSink) {
  const auto traj = ss::Simulate(*ss::BuiltinSystem("decay"),
                                 ss::SwitchingSignal::Constant(0, 30, 1), Vector::Ones(1), 0, 30);
  const auto omega = ss::OmegaLimit(traj);
  ASSERT_EQ(omega.size(), 1u);
  EXPECT_LE(omega.points[0].norm(), 1e-3);
}

TEST(OmegaLimit, HarmonicCircle) {
  const auto traj = ss::Simulate(*ss::BuiltinSystem("harmonic"),
                                 ss::SwitchingSignal::Constant(0, 40, 1), V2(1, 0), 0, 40);
  const auto omega = ss::OmegaLimit(traj);
  EXPECT_LE(ss::Hausdorff(omega, UnitCircle(3600)), 1e-2);
}

TEST(OmegaLimit, ConstantTrajectory) {
  const auto sys = ss::SwitchedSystem::Linear({Matrix::Zero(2, 2)});
  const auto traj = ss::Simulate(sys, ss::SwitchingSignal::Constant(0, 5, 1), V2(3, -2), 0, 5);
  const auto omega = ss::OmegaLimit(traj);
  ASSERT_EQ(omega.size(), 1u);
  EXPECT_EQ((omega.points[0] - V2(3, -2)).norm(), 0.0);
}

TEST(OmegaLimit, UnboundedRunRejected) {
  const auto sys = ss::SwitchedSystem::Linear({Matrix::Constant(1, 1, 1.0)});
  const auto traj =
      ss::Simulate(sys, ss::SwitchingSignal::Constant(0, 10, 1), Vector::Ones(1), 0, 10);
  ss::LimitSetOptions o;
  o.bound = 100.0;
  EXPECT_THROW(ss::OmegaLimit(traj, o), ss::DomainError);
}

TEST(OmegaSharp, NoSwitchMatchesOmegaTimesInitialMode) {
  const auto traj = ss::Simulate(*ss::BuiltinSystem("harmonic"),
                                 ss::SwitchingSignal::Constant(0, 40, 1), V2(1, 0), 0, 40);
  const auto omega = ss::OmegaLimit(traj);
  const auto sharp = ss::OmegaSharp(traj, 0.5);
  ASSERT_TRUE(sharp.has_modes());
  for (auto m : sharp.modes) EXPECT_EQ(m, 1);
  EXPECT_LE(ss::Hausdorff(sharp.Project(), omega), 1e-9);
}

TEST(OmegaSharp, ConvergentDecoupledRun) {
  const auto sys = *ss::BuiltinSystem("decoupled");
  const auto spec = ss::Intersect({ss::Dwell{0.5}, ss::Ergodic{1.0, {1, 2}}});
  const auto sig = ss::Generate(spec, 0.0, 30.0, 3);
  const auto traj = ss::Simulate(sys, sig, V2(0.6, -0.7), 0.0, 30.0);
  const auto sharp = ss::OmegaSharp(traj, 0.1);
  ASSERT_GT(sharp.size(), 0u);
  for (const auto& p : sharp.points) EXPECT_LE(p.norm(), 1e-3);
}

TEST(OmegaSharp, RminTooLarge) {
  std::vector<ss::Switch> sw;
  for (int k = 1; k < 80; ++k) sw.push_back({k * 0.25, k % 2 ? 2 : 1});
  const ss::SwitchingSignal sig(0.0, 20.0, 1, sw);
  const auto traj = ss::Simulate(*ss::BuiltinSystem("decoupled"), sig, V2(1, 1), 0, 10);
  EXPECT_THROW(ss::OmegaSharp(traj, 1.0), ss::DomainError);
  EXPECT_NO_THROW(ss::OmegaSharp(traj, 0.2));
}

TEST(ConvergesTo, Examples) {
  const auto traj = ss::Simulate(*ss::BuiltinSystem("decay"),
                                 ss::SwitchingSignal::Constant(0, 12, 1), Vector::Ones(1), 0, 12);
  EXPECT_TRUE(ss::ConvergesTo(traj, ss::DistanceToOrigin(), 1e-3, 10.0));
  EXPECT_FALSE(ss::ConvergesTo(traj, ss::DistanceToOrigin(), 1e-3, 1.0));

  const auto sys = ss::SwitchedSystem::Linear({Matrix::Zero(1, 1)});
  const auto still =
      ss::Simulate(sys, ss::SwitchingSignal::Constant(0, 5, 1), Vector::Ones(1), 0, 5);
  EXPECT_FALSE(ss::ConvergesTo(still, ss::DistanceToOrigin(), 1e-3, 2.0));
  const ss::TargetDistance everywhere = [](const Vector&) { return 0.0; };
  EXPECT_TRUE(ss::ConvergesTo(still, everywhere, 1e-3, 2.0));
}

TEST(WeaklyMeagre, ClosedFormVerdicts) {
  const auto decay = ss::WeaklyMeagreEstimate(
      ss::Tabulate([](double t) { return std::exp(-t); }, 0, 20, 1e-3), 1.0, 20);
  EXPECT_TRUE(decay.consistent);
  for (std::size_t k = 0; k < decay.infima.size(); ++k) {
    EXPECT_NEAR(decay.infima[k], std::exp(-double(k + 1)), 1e-3 * std::exp(-double(k)));
  }
  EXPECT_FALSE(ss::WeaklyMeagreEstimate(ss::Tabulate([](double) { return 1.0; }, 0, 20, 1e-3),
                                        1.0, 20)
                   .consistent);
  const auto sine = ss::WeaklyMeagreEstimate(
      ss::Tabulate([](double t) { return std::pow(std::sin(t), 2); }, 0, 40, 1e-3), 4.0, 10);
  EXPECT_TRUE(sine.consistent);
  for (double inf : sine.infima) EXPECT_LE(inf, 1e-6);
}

TEST(WeaklyMeagre, RejectsShortSeries) {
  EXPECT_THROW(
      ss::WeaklyMeagreEstimate(ss::Tabulate([](double) { return 0.0; }, 0, 5, 0.1), 1.0, 10),
      ss::ConfigError);
}

// pi_1(Omega#) ⊆ Omega, and Omega of a convergent run is one cluster at the
// limit.
TEST(Property, SharpProjectionInsideOmega) {
  const auto sys = *ss::BuiltinSystem("switched_rotation");
  ss::GenerateOptions gen;
  gen.modes = {1, 2};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto sig = ss::Generate(ss::Dwell{1.0}, 0.0, 40.0, seed, gen);
    const auto traj = ss::Simulate(sys, sig, V2(0.3, 0.4), 0.0, 40.0);
    const auto omega = ss::OmegaLimit(traj);
    const auto sharp = ss::OmegaSharp(traj, 0.25);
    EXPECT_LE(ss::DirectedHausdorff(sharp.Project(), omega), omega.cluster_tol);
  }
}

TEST(Property, ConvergentRunIsSingleCluster) {
  const auto sys = *ss::BuiltinSystem("decoupled");
  const auto spec = ss::Intersect({ss::Dwell{0.5}, ss::Ergodic{1.0, {1, 2}}});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto traj = ss::Simulate(sys, ss::Generate(spec, 0, 40, seed), V2(1, -1), 0, 40);
    const auto omega = ss::OmegaLimit(traj);
    ASSERT_EQ(omega.size(), 1u);
    EXPECT_LE(omega.points[0].norm(), omega.cluster_tol);
  }
}

TEST(Property, DeterministicEstimates) {
  const auto traj = ss::Simulate(*ss::BuiltinSystem("harmonic"),
                                 ss::SwitchingSignal::Constant(0, 20, 1), V2(1, 0), 0, 20);
  const auto a = ss::OmegaLimit(traj);
  const auto b = ss::OmegaLimit(traj);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a.points[k], b.points[k]);
}
