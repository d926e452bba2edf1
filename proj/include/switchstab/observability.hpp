#pragma once

// Linear-case zero-output machinery: kernels, unobservable subspaces of
// (C, A) and subspace intersections via SVD, plus a simulation-based
// membership test for the zero-output sets X^f(g, h, tau) / X^b(g, h, tau).

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "switchstab/core.hpp"
#include "switchstab/integrator.hpp"
#include "switchstab/system.hpp"

namespace switchstab {

/// Relative rank tolerance: singular values below 1e-10 * sigma_max count as 0.
inline constexpr double kRankTolerance = 1e-10;

/// Subspace of R^n with an orthonormal basis (zero columns = {0}).
class Subspace {
 public:
  explicit Subspace(Eigen::Index n) : basis_(n, 0) {}

  /// Span of the columns of `spanning`; re-orthonormalized.
  static Subspace Span(const Matrix& spanning) {
    Subspace s(spanning.rows());
    if (spanning.cols() == 0) return s;
    Eigen::JacobiSVD<Matrix> svd(spanning, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (smax > 0 && sv[i] > kRankTolerance * smax) ++rank;
    }
    s.basis_ = svd.matrixU().leftCols(rank);
    return s;
  }

  static Subspace Full(Eigen::Index n) { return Span(Matrix::Identity(n, n)); }

  Eigen::Index ambient_dimension() const { return basis_.rows(); }
  Eigen::Index dimension() const { return basis_.cols(); }
  bool is_zero() const { return basis_.cols() == 0; }
  const Matrix& basis() const { return basis_; }

  /// Orthogonal projector B B^T.
  Matrix Projector() const { return basis_ * basis_.transpose(); }

  double Distance(const Vector& x) const { return (x - Projector() * x).norm(); }

 private:
  Matrix basis_;
};

/// Frobenius distance between orthogonal projectors; basis-independent.
inline double ProjectorDistance(const Subspace& a, const Subspace& b) {
  if (a.ambient_dimension() != b.ambient_dimension()) {
    throw ConfigError("subspaces live in different dimensions");
  }
  return (a.Projector() - b.Projector()).norm();
}

/// ker(M) via SVD with relative rank tolerance.
inline Subspace Kernel(const Matrix& m) {
  const Eigen::Index n = m.cols();
  Subspace out(n);
  if (m.rows() == 0) return Subspace::Full(n);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (smax > 0 && sv[i] > kRankTolerance * smax) ++rank;
  }
  return Subspace::Span(svd.matrixV().rightCols(n - rank));
}

/// Stacked Kalman observability matrix [C; CA; ...; CA^{n-1}].
inline Matrix ObservabilityMatrix(const Matrix& c, const Matrix& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || c.cols() != n) throw ConfigError("(C, A) dimensions inconsistent");
  Matrix o(c.rows() * n, n);
  Matrix block = c;
  for (Eigen::Index k = 0; k < n; ++k) {
    o.middleRows(k * c.rows(), c.rows()) = block;
    block = block * a;
  }
  return o;
}

/// Unobservable subspace of the pair (C, A).
inline Subspace UnobservableSubspace(const Matrix& c, const Matrix& a) {
  return Kernel(ObservabilityMatrix(c, a));
}

/// Intersection as the kernel of the stacked complement projectors I - P_k.
inline Subspace Intersect(const std::vector<Subspace>& spaces) {
  if (spaces.empty()) throw ConfigError("intersection of an empty family");
  const Eigen::Index n = spaces.front().ambient_dimension();
  Matrix stacked(n * static_cast<Eigen::Index>(spaces.size()), n);
  for (std::size_t k = 0; k < spaces.size(); ++k) {
    if (spaces[k].ambient_dimension() != n) throw ConfigError("dimension mismatch in intersect");
    stacked.middleRows(static_cast<Eigen::Index>(k) * n, n) =
        Matrix::Identity(n, n) - spaces[k].Projector();
  }
  return Kernel(stacked);
}

enum class FlowDirection { kForward, kBackward };

struct MembershipResult {
  bool member = false;
  double tau = 0.0;
  /// Why membership was rejected; mentions the domain when the solution left
  /// chi_gamma, which is not the same as leaving the zero-output set.
  std::string reason;
  double worst_output = 0.0;
};

using ScalarFunction = std::function<double(const Vector&)>;

/// Default finite horizon standing in for tau = infinity: ten times the
/// slowest nonzero time constant of a linear mode, else 10 s.
inline double DefaultMembershipHorizon(const Mode& mode) {
  if (!mode.linear) return 10.0;
  Eigen::EigenSolver<Matrix> es(*mode.linear, false);
  double slowest_rate = kInfinity;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double r = std::abs(es.eigenvalues()[i].real());
    if (r > 1e-12) slowest_rate = std::min(slowest_rate, r);
  }
  return std::isfinite(slowest_rate) ? 10.0 / slowest_rate : 10.0;
}

/// Decides x0 ∈ X^f(g, h, tau) (or X^b) up to numerics: integrates xdot = g
/// (or -g) over [0, tau] and requires |h| <= tol at every accepted step while
/// the solution stays in the mode's domain.
inline MembershipResult ZeroOutputMembership(const Mode& mode, const ScalarFunction& h,
                                             const Vector& x0, double tau, FlowDirection dir,
                                             double tol, double step = 1e-3,
                                             double blowup_bound = 1e9) {
  if (!(tau > 0) || !(step > 0)) throw ConfigError("tau and step must be positive");
  MembershipResult r;
  r.tau = tau;
  if (!mode.domain.Contains(x0)) {
    r.reason = "initial state outside the mode domain";
    return r;
  }
  const double sign = dir == FlowDirection::kForward ? 1.0 : -1.0;
  Vector x = x0;
  auto check = [&](double t) {
    const double y = std::abs(h(x));
    r.worst_output = std::max(r.worst_output, y);
    if (!(y <= tol)) {
      r.reason = "output |h| = " + std::to_string(y) + " > tol at t=" + std::to_string(t);
      return false;
    }
    return true;
  };
  if (!check(0.0)) return r;
  const auto n_steps = static_cast<long>(std::max(1.0, std::ceil(tau / step - 1e-9)));
  double t = 0.0;
  for (long k = 1; k <= n_steps; ++k) {
    const double t_next = k == n_steps ? tau : static_cast<double>(k) * step;
    x = Rk4Step(mode.field, x, t_next - t, sign);
    t = t_next;
    if (!x.allFinite() || x.norm() > blowup_bound) {
      r.reason = "solution blew up at t=" + std::to_string(t);
      return r;
    }
    if (!mode.domain.Contains(x)) {
      r.reason = "solution left the mode domain at t=" + std::to_string(t) +
                 " (not necessarily outside the zero-output set)";
      return r;
    }
    if (!check(t)) return r;
  }
  r.member = true;
  return r;
}

}  // namespace switchstab
