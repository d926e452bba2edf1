#pragma once

// Multiple Lyapunov functions V_gamma with dissipation bounds W_gamma:
// sampled verification of -grad V_gamma . f_gamma >= W_gamma >= 0, class-K
// envelopes, Z_V membership, and monotonicity of v(t) = V(x(t), sigma(t))
// along simulated runs (globally, or per mode on sigma^{-1}(gamma)).

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "switchstab/core.hpp"
#include "switchstab/integrator.hpp"
#include "switchstab/observability.hpp"
#include "switchstab/system.hpp"

namespace switchstab {

using GradientFunction = std::function<Vector(const Vector&)>;
using ClassKFunction = std::function<double(double)>;

/// V_gamma, grad V_gamma and W_gamma on the region O_gamma.
struct ModeLyapunov {
  ModeId id;
  ScalarFunction value;
  GradientFunction gradient;
  ScalarFunction dissipation;
  Domain region;
};

class LyapunovPair {
 public:
  LyapunovPair(std::vector<ModeLyapunov> modes, std::optional<ClassKFunction> alpha1 = {},
               std::optional<ClassKFunction> alpha2 = {}, bool radially_unbounded = false)
      : modes_(std::move(modes)),
        alpha1_(std::move(alpha1)),
        alpha2_(std::move(alpha2)),
        radially_unbounded_(radially_unbounded) {
    if (modes_.empty()) throw ConfigError("Lyapunov pair needs at least one mode");
  }

  const std::vector<ModeLyapunov>& modes() const { return modes_; }

  const ModeLyapunov& mode(ModeId id) const {
    for (const auto& m : modes_) {
      if (m.id == id) return m;
    }
    throw DomainError("Lyapunov pair has no entry for mode " + std::to_string(id));
  }

  bool HasMode(ModeId id) const {
    return std::any_of(modes_.begin(), modes_.end(), [&](const auto& m) { return m.id == id; });
  }

  const std::optional<ClassKFunction>& alpha1() const { return alpha1_; }
  const std::optional<ClassKFunction>& alpha2() const { return alpha2_; }
  bool radially_unbounded() const { return radially_unbounded_; }

  /// O = ∪ O_gamma covers R^n.
  bool region_is_everywhere() const {
    return std::any_of(modes_.begin(), modes_.end(),
                       [](const auto& m) { return m.region.is_everywhere(); });
  }

  /// P_gamma / C_gamma for pairs built by QuadraticPair, indexed like modes().
  std::vector<Matrix> p;
  std::vector<Matrix> c;
  bool is_quadratic() const { return !p.empty(); }

  double V(const Vector& x, ModeId gamma) const { return mode(gamma).value(x); }

 private:
  std::vector<ModeLyapunov> modes_;
  std::optional<ClassKFunction> alpha1_;
  std::optional<ClassKFunction> alpha2_;
  bool radially_unbounded_;
};

/// Smallest / largest eigenvalue of a symmetric matrix.
inline std::pair<double, double> SymmetricEigenRange(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

/// V_gamma(x) = x^T P_gamma x, grad = 2 P_gamma x, W_gamma(x) = |C_gamma x|^2
/// for modes 1..N; alpha1(r) = lambda_min r^2, alpha2(r) = lambda_max r^2 over
/// all modes.
inline LyapunovPair QuadraticPair(const std::vector<Matrix>& p_list,
                                  const std::vector<Matrix>& c_list, double box_half_width = 2.0) {
  if (p_list.empty() || p_list.size() != c_list.size()) {
    throw ConfigError("need one P and one C per mode");
  }
  const Eigen::Index n = p_list.front().rows();
  double lmin = kInfinity, lmax = 0.0;
  std::vector<ModeLyapunov> modes;
  for (std::size_t k = 0; k < p_list.size(); ++k) {
    const auto id = static_cast<ModeId>(k + 1);
    const Matrix& p = p_list[k];
    const Matrix& c = c_list[k];
    if (p.rows() != n || p.cols() != n || c.cols() != n) {
      throw ConfigError("P/C of mode " + std::to_string(id) + " have inconsistent dimensions");
    }
    if ((p - p.transpose()).norm() > 1e-12 * std::max(1.0, p.norm())) {
      throw ConfigError("P of mode " + std::to_string(id) + " is not symmetric");
    }
    const auto [lo, hi] = SymmetricEigenRange(p);
    if (!(lo > 0)) {
      throw ConfigError("P of mode " + std::to_string(id) +
                        " is not positive definite (smallest eigenvalue " + std::to_string(lo) +
                        ")");
    }
    lmin = std::min(lmin, lo);
    lmax = std::max(lmax, hi);
    const Matrix ctc = c.transpose() * c;
    modes.push_back(ModeLyapunov{
        id, [p](const Vector& x) { return x.dot(p * x); },
        [p](const Vector& x) -> Vector { return 2.0 * (p * x); },
        [ctc](const Vector& x) { return x.dot(ctc * x); }, Domain::Everywhere(n, box_half_width)});
  }
  LyapunovPair pair(std::move(modes), [lmin](double r) { return lmin * r * r; },
                    [lmax](double r) { return lmax * r * r; }, true);
  pair.p = p_list;
  pair.c = c_list;
  return pair;
}

namespace detail {

inline double RadicalInverse(std::uint64_t k, std::uint64_t base) {
  double inv = 1.0 / double(base), f = inv, r = 0.0;
  while (k > 0) {
    r += f * double(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

/// Halton points in a box with a seeded Cranley-Patterson rotation.
class HaltonSampler {
 public:
  HaltonSampler(const Box& box, std::uint64_t seed) : box_(box) {
    static constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < box.dimension(); ++i) {
      bases_.push_back(kPrimes[static_cast<std::size_t>(i) % 12] +
                       (static_cast<std::size_t>(i) / 12) * 41);
      shifts_.push_back(u(rng));
    }
  }

  Vector Next() {
    ++index_;
    Vector x(box_.dimension());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      double v = RadicalInverse(index_, bases_[static_cast<std::size_t>(i)]) +
                 shifts_[static_cast<std::size_t>(i)];
      v -= std::floor(v);
      x[i] = box_.lower[i] + v * (box_.upper[i] - box_.lower[i]);
    }
    return x;
  }

 private:
  Box box_;
  std::vector<std::uint64_t> bases_;
  std::vector<double> shifts_;
  std::uint64_t index_ = 0;
};

/// Intersection of the Lyapunov region box with the system domain box.
inline Box SamplingBox(const Mode& m, const ModeLyapunov& l) {
  return {m.domain.box().lower.cwiseMax(l.region.box().lower),
          m.domain.box().upper.cwiseMin(l.region.box().upper)};
}

}  // namespace detail

struct InequalityReport {
  bool passed = true;
  /// min over samples of min(-grad V . f - W, W), relative to the terms'
  /// magnitude only through the pass/fail tolerance.
  double worst_margin = kInfinity;
  std::optional<Vector> witness;
  ModeId witness_mode = 0;
  std::size_t n_evaluated = 0;
  std::string message;
};

/// Samples -grad V_gamma(x) f_gamma(x) >= W_gamma(x) >= 0 at n_samples
/// quasi-random points per mode in O_gamma ∩ chi_gamma.
inline InequalityReport CheckDecreaseInequality(const SwitchedSystem& sys,
                                                const LyapunovPair& pair, int n_samples,
                                                std::uint64_t seed, double rel_tol = 1e-12) {
  InequalityReport r;
  for (const auto& m : sys.modes()) {
    const ModeLyapunov& l = pair.mode(m.id);
    detail::HaltonSampler sampler(detail::SamplingBox(m, l), MixSeed(seed, std::uint64_t(m.id)));
    for (int k = 0; k < n_samples; ++k) {
      const Vector x = sampler.Next();
      if (!m.domain.Contains(x) || !l.region.Contains(x)) continue;
      ++r.n_evaluated;
      const double decrease = -l.gradient(x).dot(m.field(x));
      const double w = l.dissipation(x);
      const double margin = std::min(decrease - w, w);
      const double scale = 1.0 + std::abs(decrease) + std::abs(w);
      if (margin < r.worst_margin) {
        r.worst_margin = margin;
        if (margin < -rel_tol * scale) {
          r.witness = x;
          r.witness_mode = m.id;
        }
      }
      if (margin < -rel_tol * scale && r.passed) {
        r.passed = false;
        r.witness = x;
        r.witness_mode = m.id;
        r.message = decrease - w < w ? "-grad V . f < W in mode " + std::to_string(m.id)
                                     : "W < 0 in mode " + std::to_string(m.id);
      }
    }
  }
  if (r.n_evaluated == 0) throw DomainError("no sample point lies in O_gamma ∩ chi_gamma");
  return r;
}

struct EnvelopeReport {
  bool passed = true;
  double worst_lower_margin = kInfinity;  // min V - alpha1(|x|)
  double worst_upper_margin = kInfinity;  // min alpha2(|x|) - V
  std::optional<Vector> witness;
};

/// alpha1(|x|) <= V_gamma(x) <= alpha2(|x|) on sampled O_gamma.
inline EnvelopeReport CheckEnvelopes(const LyapunovPair& pair, int n_samples, std::uint64_t seed,
                                     double rel_tol = 1e-12) {
  if (!pair.alpha1() || !pair.alpha2()) throw ConfigError("pair has no class-K envelopes");
  EnvelopeReport r;
  for (const auto& l : pair.modes()) {
    detail::HaltonSampler sampler(l.region.box(), MixSeed(seed, std::uint64_t(l.id)));
    for (int k = 0; k < n_samples; ++k) {
      const Vector x = sampler.Next();
      if (!l.region.Contains(x)) continue;
      const double v = l.value(x);
      const double lower = v - (*pair.alpha1())(x.norm());
      const double upper = (*pair.alpha2())(x.norm()) - v;
      r.worst_lower_margin = std::min(r.worst_lower_margin, lower);
      r.worst_upper_margin = std::min(r.worst_upper_margin, upper);
      const double tol = rel_tol * (1.0 + std::abs(v));
      if ((lower < -tol || upper < -tol) && r.passed) {
        r.passed = false;
        r.witness = x;
      }
    }
  }
  return r;
}

/// Largest |grad V - central difference| / max(1, |grad V|) over random
/// points per mode.
inline double GradientConsistencyError(const LyapunovPair& pair, int n_samples,
                                       std::uint64_t seed, double h = 1e-6) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (const auto& l : pair.modes()) {
    for (int k = 0; k < n_samples; ++k) {
      const Vector x = SampleBox(l.region.box(), rng);
      const Vector g = l.gradient(x);
      Vector fd(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        fd[i] = (l.value(xp) - l.value(xm)) / (2.0 * h);
      }
      worst = std::max(worst, (g - fd).norm() / std::max(1.0, g.norm()));
    }
  }
  return worst;
}

struct MonotonicityReport {
  bool nonincreasing = true;
  std::vector<double> t;
  std::vector<double> v;
  /// First sample at which the excess over the running minimum had stayed
  /// above the slack for `persistence` consecutive samples.
  std::optional<double> violation_time;
  std::optional<ModeId> violation_mode;
  double max_excess = 0.0;
};

struct MonitorOptions {
  double slack = 1e-9;
  int persistence = 3;
};

/// v(t) along a trajectory. Global mode checks v(t) = V(x(t), sigma(t)) is
/// nonincreasing; mode_restricted checks V_gamma(x(t)) is nonincreasing on
/// I_{sigma,gamma} for every gamma. A violation is an excess over the running
/// minimum larger than `slack` that persists for `persistence` consecutive
/// samples, so isolated round-off bumps are ignored.
inline MonotonicityReport MonitorV(const Trajectory& traj, const LyapunovPair& pair,
                                   bool mode_restricted, const MonitorOptions& o = {}) {
  MonotonicityReport r;
  std::map<ModeId, double> running_min;
  std::map<ModeId, int> streak;
  for (const Sample& s : traj.samples) {
    const ModeLyapunov& l = pair.mode(s.mode);
    if (!l.region.Contains(s.x)) throw DomainViolation(s.t, s.x, s.mode);
    const double v = l.value(s.x);
    r.t.push_back(s.t);
    r.v.push_back(v);
    const ModeId key = mode_restricted ? s.mode : 0;
    auto it = running_min.find(key);
    if (it == running_min.end()) {
      running_min[key] = v;
      continue;
    }
    const double excess = v - it->second;
    r.max_excess = std::max(r.max_excess, excess);
    if (excess > o.slack) {
      if (++streak[key] >= o.persistence && r.nonincreasing) {
        r.nonincreasing = false;
        r.violation_time = s.t;
        r.violation_mode = s.mode;
      }
    } else {
      streak[key] = 0;
    }
    it->second = std::min(it->second, v);
  }
  return r;
}

/// (x, gamma) ∈ Z_V: |grad V_gamma(x) . f_gamma(x)| <= tol.
inline bool InZV(const SwitchedSystem& sys, const LyapunovPair& pair, const Vector& x,
                 ModeId gamma, double tol) {
  const ModeLyapunov& l = pair.mode(gamma);
  if (!l.region.Contains(x)) throw DomainViolation(0.0, x, gamma);
  return std::abs(l.gradient(x).dot(EvalField(sys, x, gamma))) <= tol;
}

struct PositivityReport {
  bool passed = true;
  bool analytic = false;
  std::optional<Vector> witness;
  std::optional<ModeId> witness_mode;
};

namespace detail {

/// Projected gradient descent of V on the sphere |x| = |x0| inside the mode
/// domain and region; returns the smallest value reached and where.
inline std::pair<double, Vector> MinimizeOnSphere(const ModeLyapunov& l, const Domain& domain,
                                                  Vector x, int iterations = 300) {
  const double radius = x.norm();
  double value = l.value(x);
  for (int it = 0; it < iterations && value > 0; ++it) {
    const Vector g = l.gradient(x);
    const Vector tangent = g - (g.dot(x) / (radius * radius)) * x;
    if (tangent.norm() <= 1e-14 * (1.0 + g.norm())) break;
    bool moved = false;
    for (double step = radius / tangent.norm(); step > 1e-12 * radius; step *= 0.5) {
      const Vector y = (x - step * tangent).normalized() * radius;
      if (!domain.Contains(y) || !l.region.Contains(y)) continue;
      const double vy = l.value(y);
      if (vy < value) {
        x = y;
        value = vy;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return {value, x};
}

}  // namespace detail

/// V_gamma^{-1}(0) ∩ chi_gamma = {0} for every gamma with 0 ∈ chi_gamma.
/// Exact for quadratic pairs, whose P_gamma are positive definite by
/// construction; otherwise V_gamma is minimised on spheres through sampled
/// points and a minimum at or below 1e-12 of the starting value counts as a
/// zero away from the origin.
inline PositivityReport CheckZeroLevelIsolated(const SwitchedSystem& sys,
                                               const LyapunovPair& pair, int n_samples,
                                               std::uint64_t seed) {
  PositivityReport r;
  if (pair.is_quadratic()) {
    r.analytic = true;
    return r;
  }
  const Vector zero = Vector::Zero(sys.dimension());
  const int n_descents = std::min(n_samples, 32);
  for (const auto& m : sys.modes()) {
    if (!m.domain.Contains(zero)) continue;
    const ModeLyapunov& l = pair.mode(m.id);
    detail::HaltonSampler sampler(detail::SamplingBox(m, l), MixSeed(seed, std::uint64_t(m.id)));
    for (int k = 0; k < n_samples; ++k) {
      Vector x = sampler.Next();
      if (x.norm() < 1e-9 || !m.domain.Contains(x) || !l.region.Contains(x)) continue;
      const double start = l.value(x);
      if (start > 0 && k < n_descents) {
        auto [lowest, at] = detail::MinimizeOnSphere(l, m.domain, x);
        if (lowest <= 1e-12 * start) x = at;
      }
      if (!(l.value(x) > 1e-12 * start)) {
        r.passed = false;
        r.witness = x;
        r.witness_mode = m.id;
        return r;
      }
    }
  }
  return r;
}

}  // namespace switchstab
