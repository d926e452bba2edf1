#include <gtest/gtest.h>

#include "switchstab/generate.hpp"
#include "switchstab/lyapunov.hpp"

namespace ss = switchstab;
using ss::Matrix;
using ss::Vector;

namespace {

Matrix Row2(double a, double b) {
  Matrix m(1, 2);
  m << a, b;
  return m;
}

Vector V2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

ss::LyapunovPair ScaledNormPair(double w_scale) {
  ss::ModeLyapunov l{1, [](const Vector& x) { return x.squaredNorm(); },
                     [](const Vector& x) -> Vector { return 2.0 * x; },
                     [w_scale](const Vector& x) { return w_scale * x.squaredNorm(); },
                     ss::Domain::Everywhere(2)};
  return ss::LyapunovPair({l});
}

ss::SwitchedSystem Contraction() { return ss::SwitchedSystem::Linear({-Matrix::Identity(2, 2)}); }

}  // namespace

TEST(DecreaseInequality, NormSquaredExamples) {
  const auto ok = ss::CheckDecreaseInequality(Contraction(), ScaledNormPair(1.0), 200, 1);
  EXPECT_TRUE(ok.passed);
  EXPECT_GE(ok.worst_margin, 0.0);
  EXPECT_EQ(ok.n_evaluated, 200u);
  const auto bad = ss::CheckDecreaseInequality(Contraction(), ScaledNormPair(3.0), 200, 1);
  EXPECT_FALSE(bad.passed);
  ASSERT_TRUE(bad.witness.has_value());
  EXPECT_GT(bad.witness->norm(), 0.0);
  EXPECT_EQ(bad.witness_mode, 1);
}

TEST(DecreaseInequality, QuadraticFromLmi) {
  const auto sys = *ss::BuiltinSystem("decoupled");
  const Matrix eye = Matrix::Identity(2, 2);
  const auto pair = ss::QuadraticPair({eye, eye}, {Row2(1, 0), Row2(0, 1)});
  EXPECT_TRUE(ss::CheckDecreaseInequality(sys, pair, 400, 3).passed);
}

TEST(DecreaseInequality, NoValidPointsIsAnError) {
  Vector normal(2);
  normal << 1.0, 0.0;
  ss::ModeLyapunov l{1, [](const Vector& x) { return x.squaredNorm(); },
                     [](const Vector& x) -> Vector { return 2.0 * x; },
                     [](const Vector&) { return 0.0; },
                     ss::Domain::Halfspaces({{normal, 100.0}}, ss::Box::Symmetric(2, 1.0))};
  EXPECT_THROW(ss::CheckDecreaseInequality(Contraction(), ss::LyapunovPair({l}), 50, 1),
               ss::DomainError);
}

TEST(QuadraticPair, ConstructionAndEnvelopes) {
  const auto pair = ss::QuadraticPair({Matrix::Identity(2, 2)}, {Row2(1, 0)});
  const auto& l = pair.mode(1);
  EXPECT_DOUBLE_EQ(l.value(V2(3, 4)), 25.0);
  EXPECT_DOUBLE_EQ(l.dissipation(V2(3, 4)), 9.0);
  EXPECT_TRUE(l.gradient(V2(3, 4)).isApprox(V2(6, 8)));
  EXPECT_TRUE(pair.is_quadratic());
  EXPECT_TRUE(pair.radially_unbounded());
  EXPECT_TRUE(ss::CheckEnvelopes(pair, 100, 1).passed);

  Matrix twisted(2, 2);
  twisted << 2, 1, 1, 3;
  const auto p2 = ss::QuadraticPair({Matrix::Identity(2, 2), twisted}, {Row2(1, 0), Row2(0, 1)});
  EXPECT_TRUE(ss::CheckEnvelopes(p2, 200, 2).passed);
}

TEST(QuadraticPair, RejectsNonPositiveDefinite) {
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  try {
    ss::QuadraticPair({Matrix::Identity(2, 2), singular}, {Row2(1, 0), Row2(0, 1)});
    FAIL() << "expected ConfigError";
  } catch (const ss::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  Matrix skew(2, 2);
  skew << 1, 1, 0, 1;
  EXPECT_THROW(ss::QuadraticPair({skew}, {Row2(1, 0)}), ss::ConfigError);
}

TEST(MonitorV, DecoupledGloballyNonincreasing) {
  const auto sys = *ss::BuiltinSystem("decoupled");
  const Matrix eye = Matrix::Identity(2, 2);
  const auto pair = ss::QuadraticPair({eye, eye}, {Row2(1, 0), Row2(0, 1)});
  const auto spec = ss::Intersect({ss::Dwell{0.5}, ss::Ergodic{1.0, {1, 2}}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto traj = ss::Simulate(sys, ss::Generate(spec, 0, 10, seed), V2(0.7, -0.4), 0, 10);
    const auto r = ss::MonitorV(traj, pair, false);
    EXPECT_TRUE(r.nonincreasing);
    EXPECT_EQ(r.v.size(), traj.samples.size());
  }
}

TEST(MonitorV, RotationIsFlat) {
  const auto sys = *ss::BuiltinSystem("harmonic");
  const auto pair = ss::QuadraticPair({Matrix::Identity(2, 2)}, {Matrix::Zero(1, 2)});
  const auto traj = ss::Simulate(sys, ss::SwitchingSignal::Constant(0, 20, 1), V2(1, 0), 0, 20);
  const auto r = ss::MonitorV(traj, pair, false);
  EXPECT_TRUE(r.nonincreasing);
  EXPECT_LE(r.max_excess, 1e-9);
}

TEST(MonitorV, JumpUpFailsGlobalOnly) {
  const Matrix eye = Matrix::Identity(2, 2);
  const auto sys = ss::SwitchedSystem::Linear({Matrix::Zero(2, 2), -eye});
  const auto pair = ss::QuadraticPair({eye, 2.0 * eye}, {Matrix::Zero(1, 2), Matrix::Zero(1, 2)});
  const ss::SwitchingSignal sig(0.0, 3.0, 1, {{1.0, 2}, {2.0, 1}});
  const auto traj = ss::Simulate(sys, sig, V2(1, 0), 0.0, 3.0);
  const auto global = ss::MonitorV(traj, pair, false);
  EXPECT_FALSE(global.nonincreasing);
  ASSERT_TRUE(global.violation_time.has_value());
  EXPECT_GE(*global.violation_time, 1.0);
  EXPECT_TRUE(ss::MonitorV(traj, pair, true).nonincreasing);
}

TEST(MonitorV, IsolatedBumpsIgnored) {
  // v = |x|^2 under xdot = 0 with a tiny bump of two samples is not a
  // violation; a bump of three samples is.
  const auto pair = ss::QuadraticPair({Matrix::Identity(1, 1)}, {Matrix::Zero(1, 1)});
  auto make = [](int bump_len) {
    ss::Trajectory traj{{}, ss::SwitchingSignal::Constant(0, 10, 1), {}};
    for (int k = 0; k <= 10; ++k) {
      const double x = (k >= 4 && k < 4 + bump_len) ? 1.0 + 1e-6 : 1.0;
      traj.samples.push_back({double(k), Vector::Constant(1, x), 1});
    }
    return traj;
  };
  EXPECT_TRUE(ss::MonitorV(make(2), pair, false).nonincreasing);
  EXPECT_FALSE(ss::MonitorV(make(3), pair, false).nonincreasing);
}

TEST(MonitorV, LeavingRegionIsAnError) {
  Vector normal(2);
  normal << 1.0, 0.0;
  ss::ModeLyapunov l{1, [](const Vector& x) { return x.squaredNorm(); },
                     [](const Vector& x) -> Vector { return 2.0 * x; },
                     [](const Vector&) { return 0.0; },
                     ss::Domain::Halfspaces({{normal, 0.5}}, ss::Box::Symmetric(2, 2.0))};
  const auto traj = ss::Simulate(Contraction(), ss::SwitchingSignal::Constant(0, 2, 1), V2(1, 0),
                                 0, 2);
  EXPECT_THROW(ss::MonitorV(traj, ss::LyapunovPair({l}), false), ss::DomainViolation);
}

TEST(InZV, Examples) {
  const auto pair = ScaledNormPair(1.0);
  EXPECT_TRUE(ss::InZV(Contraction(), pair, V2(0, 0), 1, 1e-12));
  EXPECT_FALSE(ss::InZV(Contraction(), pair, V2(1, 0), 1, 1e-12));
  const auto rot = *ss::BuiltinSystem("harmonic");
  EXPECT_TRUE(ss::InZV(rot, pair, V2(0.3, -1.7), 1, 1e-12));
}

TEST(ZeroLevel, QuadraticIsAnalytic) {
  const auto pair = ss::QuadraticPair({Matrix::Identity(2, 2)}, {Row2(1, 0)});
  const auto r = ss::CheckZeroLevelIsolated(Contraction(), pair, 50, 1);
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.analytic);

  ss::ModeLyapunov flat{1, [](const Vector& x) { return x[0] * x[0]; },
                        [](const Vector& x) -> Vector { return V2(2 * x[0], 0); },
                        [](const Vector&) { return 0.0; }, ss::Domain::Everywhere(2)};
  const auto sampled = ss::CheckZeroLevelIsolated(Contraction(), ss::LyapunovPair({flat}), 400, 1);
  EXPECT_FALSE(sampled.analytic);
  EXPECT_FALSE(sampled.passed);
}

TEST(Property, GradientConsistency) {
  Matrix twisted(2, 2);
  twisted << 2, 1, 1, 3;
  const auto pair = ss::QuadraticPair({Matrix::Identity(2, 2), twisted}, {Row2(1, 0), Row2(0, 1)});
  EXPECT_LE(ss::GradientConsistencyError(pair, 100, 7), 1e-5);
}

TEST(Property, DissipationNonnegative) {
  Matrix c(2, 2);
  c << 1, -2, 0.5, 3;
  const auto pair = ss::QuadraticPair({Matrix::Identity(2, 2)}, {c});
  ss::detail::HaltonSampler sampler(ss::Box::Symmetric(2, 5.0), 11);
  for (int k = 0; k < 500; ++k) EXPECT_GE(pair.mode(1).dissipation(sampler.Next()), 0.0);
}

TEST(Property, CommonPSatisfyingLmiIsMonotone) {
  const auto sys = *ss::BuiltinSystem("decoupled");
  const Matrix eye = Matrix::Identity(2, 2);
  const auto pair = ss::QuadraticPair({eye, eye}, {Row2(1, 0), Row2(0, 1)});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sig = ss::Generate(ss::AverageDwell{0.2, 3}, 0.0, 15.0, seed);
    EXPECT_TRUE(ss::MonitorV(ss::Simulate(sys, sig, V2(1.2, 0.3), 0, 15), pair, false)
                    .nonincreasing);
  }
}

TEST(Halton, DeterministicAndInBox) {
  ss::detail::HaltonSampler a(ss::Box::Symmetric(3, 2.0), 9), b(ss::Box::Symmetric(3, 2.0), 9);
  for (int k = 0; k < 100; ++k) {
    const Vector x = a.Next();
    EXPECT_EQ(x, b.Next());
    EXPECT_LE(x.cwiseAbs().maxCoeff(), 2.0);
  }
}
