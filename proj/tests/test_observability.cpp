#include <gtest/gtest.h>

#include <random>

#include "switchstab/observability.hpp"

namespace ss = switchstab;
using ss::Matrix;
using ss::Vector;

namespace {

Matrix Diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Matrix Row2(double a, double b) {
  Matrix m(1, 2);
  m << a, b;
  return m;
}

Vector E(int n, int i) { return Vector::Unit(n, i); }

ss::Subspace SpanOf(const Vector& v) { return ss::Subspace::Span(v); }

}  // namespace

TEST(UnobservableSubspace, HandExamples) {
  const auto u = ss::UnobservableSubspace(Row2(1, 0), Diag2(-1, 0));
  EXPECT_LE(ss::ProjectorDistance(u, SpanOf(E(2, 1))), 1e-12);
  EXPECT_TRUE(ss::UnobservableSubspace(Matrix::Identity(2, 2), Diag2(-1, 0)).is_zero());
  EXPECT_EQ(ss::UnobservableSubspace(Matrix::Zero(1, 2), Diag2(-1, 0)).dimension(), 2);
}

TEST(Kernel, AndIntersection) {
  const auto k1 = ss::Kernel(Diag2(-1, 0));
  EXPECT_LE(ss::ProjectorDistance(k1, SpanOf(E(2, 1))), 1e-12);
  EXPECT_TRUE(ss::Intersect({SpanOf(E(2, 1)), SpanOf(E(2, 0))}).is_zero());
  EXPECT_LE(ss::ProjectorDistance(ss::Intersect({k1}), k1), 1e-12);
  EXPECT_THROW(ss::Intersect({ss::Subspace::Full(2), ss::Subspace::Full(3)}), ss::ConfigError);
}

TEST(Subspace, OrthonormalBasis) {
  Matrix m(3, 3);
  m << 1, 2, 3, 1, 2.5, 3.5, 0, 0, 1;
  const auto s = ss::Subspace::Span(m);
  EXPECT_EQ(s.dimension(), 3);
  const Matrix g = s.basis().transpose() * s.basis();
  EXPECT_LE((g - Matrix::Identity(3, 3)).norm(), 1e-10);
  Matrix dup(3, 2);
  dup << 1, 2, 0, 0, 1, 2;
  EXPECT_EQ(ss::Subspace::Span(dup).dimension(), 1);
}

TEST(ZeroOutputMembership, DecoupledMode) {
  const auto mode = ss::LinearMode(1, Diag2(-1, 0));
  const ss::ScalarFunction h = [](const Vector& x) { return x[0] * x[0]; };
  Vector on(2), off(2);
  on << 0, 3;
  off << 1, 0;
  EXPECT_TRUE(ss::ZeroOutputMembership(mode, h, on, 5.0, ss::FlowDirection::kForward, 1e-8).member);
  const auto r = ss::ZeroOutputMembership(mode, h, off, 5.0, ss::FlowDirection::kForward, 1e-8);
  EXPECT_FALSE(r.member);
  EXPECT_FALSE(r.reason.empty());
  EXPECT_TRUE(ss::ZeroOutputMembership(mode, h, Vector::Zero(2), 50.0,
                                       ss::FlowDirection::kBackward, 1e-8)
                  .member);
}

TEST(ZeroOutputMembership, DomainExitIsFlagged) {
  Vector normal(2);
  normal << 0.0, 1.0;
  const auto mode = ss::LinearMode(
      1, Diag2(0, 1), ss::Domain::Halfspaces({{normal, -1.0}}, ss::Box::Symmetric(2, 2)));
  const ss::ScalarFunction h = [](const Vector& x) { return x[0] * x[0]; };
  Vector x0(2);
  x0 << 0.0, -0.5;
  const auto r = ss::ZeroOutputMembership(mode, h, x0, 5.0, ss::FlowDirection::kForward, 1e-8);
  EXPECT_FALSE(r.member);
  EXPECT_NE(r.reason.find("domain"), std::string::npos);
}

TEST(DefaultMembershipHorizon, SlowestTimeConstant) {
  EXPECT_DOUBLE_EQ(ss::DefaultMembershipHorizon(ss::LinearMode(1, Diag2(-4, -0.5))), 20.0);
  EXPECT_DOUBLE_EQ(ss::DefaultMembershipHorizon(ss::LinearMode(1, Matrix::Zero(2, 2))), 10.0);
}

// For random (C, A): basis vectors of the unobservable subspace keep |Cx|^2
// at zero; unit vectors orthogonal to it with |Cx0| > 0.1 do not.
TEST(Property, MembershipAgreesWithSubspace) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> g;
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3;
    Matrix a = Matrix::Zero(n, n), c = Matrix::Zero(1, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!(i == 0 && j > 0)) a(i, j) = u(rng);
    c(0, 0) = 1.0 + u(rng);
    Eigen::HouseholderQR<Matrix> qr(Matrix::NullaryExpr(n, n, [&] { return g(rng); }));
    const Matrix t = qr.householderQ() * Matrix::Identity(n, n);
    a = t * a * t.transpose();
    c = c * t.transpose();
    const auto sub = ss::UnobservableSubspace(c, a);
    ASSERT_EQ(sub.dimension(), 2);
    const auto mode = ss::LinearMode(1, a);
    const ss::ScalarFunction h = [c](const Vector& x) { return (c * x).squaredNorm(); };
    for (Eigen::Index k = 0; k < sub.dimension(); ++k) {
      EXPECT_TRUE(ss::ZeroOutputMembership(mode, h, sub.basis().col(k), 5.0,
                                           ss::FlowDirection::kForward, 1e-7)
                      .member);
    }
    Vector x = (Matrix::Identity(n, n) - sub.Projector()) * Vector::NullaryExpr(n, [&] { return g(rng); });
    x.normalize();
    if ((c * x).norm() > 0.1) {
      ++checked;
      EXPECT_FALSE(
          ss::ZeroOutputMembership(mode, h, x, 5.0, ss::FlowDirection::kForward, 1e-7).member);
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(Property, IntersectCommutativeIdempotent) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5;
    const auto a = ss::Subspace::Span(Matrix::NullaryExpr(n, 3, [&] { return g(rng); }));
    const auto b = ss::Subspace::Span(Matrix::NullaryExpr(n, 4, [&] { return g(rng); }));
    const auto ab = ss::Intersect({a, b});
    const auto ba = ss::Intersect({b, a});
    EXPECT_EQ(ab.dimension(), 2);
    EXPECT_LE(ss::ProjectorDistance(ab, ba), 1e-9);
    EXPECT_LE(ss::ProjectorDistance(ss::Intersect({a, a}), a), 1e-9);
  }
}

TEST(Property, CorollaryModesUnobservableEqualsKernel) {
  EXPECT_LE(ss::ProjectorDistance(ss::UnobservableSubspace(Row2(1, 0), Diag2(-1, 0)),
                                  ss::Kernel(Diag2(-1, 0))),
            1e-9);
  EXPECT_LE(ss::ProjectorDistance(ss::UnobservableSubspace(Row2(0, 1), Diag2(0, -1)),
                                  ss::Kernel(Diag2(0, -1))),
            1e-9);
}
