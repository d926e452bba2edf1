#pragma once

// Finite-sample estimates of the omega-limit set Omega(x) and of the refined
// set Omega#(x, sigma) of (state, mode) pairs seen at times bounded away from
// the next switch. The limit objects themselves are not computable; these
// estimators expose tail_fraction, cluster_tol and r_min as knobs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "switchstab/core.hpp"
#include "switchstab/integrator.hpp"
#include "switchstab/signal.hpp"

namespace switchstab {

struct SetEstimate {
  std::vector<Vector> points;
  /// Mode paired with each point (Omega# estimates); empty otherwise.
  std::vector<ModeId> modes;
  double cluster_tol = 1e-3;

  bool has_modes() const { return !modes.empty(); }
  std::size_t size() const { return points.size(); }

  double Distance(const Vector& x) const {
    double best = kInfinity;
    for (const auto& p : points) best = std::min(best, (p - x).norm());
    return best;
  }

  /// Projection pi_1 onto the state component.
  SetEstimate Project() const { return SetEstimate{points, {}, cluster_tol}; }
};

/// One-sided Hausdorff distance sup_{a in from} d(a, to).
inline double DirectedHausdorff(const SetEstimate& from, const SetEstimate& to) {
  double worst = 0.0;
  for (const auto& p : from.points) worst = std::max(worst, to.Distance(p));
  return worst;
}

inline double Hausdorff(const SetEstimate& a, const SetEstimate& b) {
  return std::max(DirectedHausdorff(a, b), DirectedHausdorff(b, a));
}

struct LimitSetOptions {
  double tail_fraction = 0.2;
  double cluster_tol = 1e-3;
  /// States with norm above this (or non-finite) mark the run as unbounded.
  double bound = 1e9;
};

namespace detail {

/// Greedy deduplication: keep a sample unless a kept point (with the same mode
/// when modes are tracked) lies within cluster_tol.
class Clusterer {
 public:
  Clusterer(double tol, bool track_modes) : tol_(tol), track_modes_(track_modes) {}

  void Add(const Vector& x, ModeId mode) {
    for (std::size_t k = 0; k < out_.points.size(); ++k) {
      if (track_modes_ && out_.modes[k] != mode) continue;
      if ((out_.points[k] - x).norm() <= tol_) return;
    }
    out_.points.push_back(x);
    if (track_modes_) out_.modes.push_back(mode);
  }

  SetEstimate Finish() && {
    out_.cluster_tol = tol_;
    return std::move(out_);
  }

 private:
  double tol_;
  bool track_modes_;
  SetEstimate out_;
};

inline std::size_t TailStart(const Trajectory& traj, const LimitSetOptions& o) {
  if (!(o.tail_fraction > 0 && o.tail_fraction < 1)) {
    throw ConfigError("tail_fraction must lie in (0, 1)");
  }
  const double cut = traj.t_end() - o.tail_fraction * (traj.t_end() - traj.t_begin());
  for (const auto& s : traj.samples) {
    if (!s.x.allFinite() || s.x.norm() > o.bound) {
      throw DomainError("trajectory is unbounded; omega-limit estimate undefined");
    }
  }
  auto it = std::lower_bound(traj.samples.begin(), traj.samples.end(), cut,
                             [](const Sample& a, double v) { return a.t < v; });
  return static_cast<std::size_t>(it - traj.samples.begin());
}

}  // namespace detail

/// Deduplicated samples from the trailing tail_fraction of the run.
inline SetEstimate OmegaLimit(const Trajectory& traj, const LimitSetOptions& o = {}) {
  const std::size_t start = detail::TailStart(traj, o);
  detail::Clusterer c(o.cluster_tol, false);
  for (std::size_t k = start; k < traj.samples.size(); ++k) c.Add(traj.samples[k].x, 0);
  return std::move(c).Finish();
}

/// Tail samples x(s) whose next switch is at least r_min away, paired with
/// sigma(s). Switches beyond the signal horizon are unknown and count as
/// +infinity.
inline SetEstimate OmegaSharp(const Trajectory& traj, double r_min,
                              const LimitSetOptions& o = {}) {
  if (!(r_min > 0)) throw ConfigError("r_min must be positive");
  const std::size_t start = detail::TailStart(traj, o);
  detail::Clusterer c(o.cluster_tol, true);
  bool any = false;
  for (std::size_t k = start; k < traj.samples.size(); ++k) {
    const Sample& s = traj.samples[k];
    const double next =
        s.t < traj.signal.t_end() ? NextSwitchTime(traj.signal, s.t) : kInfinity;
    if (next - s.t < r_min) continue;
    any = true;
    c.Add(s.x, s.mode);
  }
  if (!any) throw DomainError("r_min too large: no tail sample is that far from a switch");
  return std::move(c).Finish();
}

/// Distance-to-target function d(x, M).
using TargetDistance = std::function<double(const Vector&)>;

inline TargetDistance DistanceTo(const SetEstimate& target) {
  return [target](const Vector& x) { return target.Distance(x); };
}

inline TargetDistance DistanceToOrigin() {
  return [](const Vector& x) { return x.norm(); };
}

/// d(x(t), target) <= eps for every sample with t >= t_check.
inline bool ConvergesTo(const Trajectory& traj, const TargetDistance& target, double eps,
                        double t_check) {
  if (t_check > traj.t_end() || t_check < traj.t_begin()) {
    throw DomainError("t_check outside trajectory span");
  }
  for (const auto& s : traj.samples) {
    if (s.t >= t_check && !(target(s.x) <= eps)) return false;
  }
  return true;
}

inline bool ConvergesTo(const Trajectory& traj, const SetEstimate& target, double eps,
                        double t_check) {
  return ConvergesTo(traj, DistanceTo(target), eps, t_check);
}

/// Sampled scalar signal y(t).
struct ScalarSeries {
  std::vector<double> t;
  std::vector<double> y;
};

template <typename Fn>
ScalarSeries Tabulate(Fn&& fn, double t0, double t1, double dt) {
  ScalarSeries s;
  const auto n = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    s.t.push_back(t);
    s.y.push_back(fn(t));
  }
  return s;
}

struct MeagreVerdict {
  bool consistent = false;
  std::vector<double> infima;
  std::string reason;
};

/// Infimum of |y| over n_windows consecutive disjoint windows of length
/// `window` starting at the first sample. The series is "consistent with
/// weakly meagre" when the last infimum is <= tol and the second half of the
/// infima does not exceed the first half on average. This is a semi-decision.
inline MeagreVerdict WeaklyMeagreEstimate(const ScalarSeries& y, double window, int n_windows,
                                          double tol = 1e-3) {
  if (!(window > 0) || n_windows < 1) throw ConfigError("window and n_windows must be positive");
  if (y.t.size() != y.y.size() || y.t.empty()) throw ConfigError("malformed series");
  const double t0 = y.t.front();
  if (y.t.back() - t0 < window * n_windows - 1e-9 * window) {
    throw ConfigError("series shorter than n_windows * window");
  }
  MeagreVerdict v;
  v.infima.assign(static_cast<std::size_t>(n_windows), kInfinity);
  for (std::size_t k = 0; k < y.t.size(); ++k) {
    const auto w = static_cast<long>(std::floor((y.t[k] - t0) / window));
    if (w < 0 || w >= n_windows) continue;
    auto& inf = v.infima[static_cast<std::size_t>(w)];
    inf = std::min(inf, std::abs(y.y[k]));
  }
  for (double inf : v.infima) {
    if (!std::isfinite(inf)) throw ConfigError("a window contains no samples");
  }
  const std::size_t half = v.infima.size() / 2;
  double first = 0.0, second = 0.0;
  for (std::size_t k = 0; k < v.infima.size(); ++k) {
    (k < half ? first : second) += v.infima[k];
  }
  if (half > 0) {
    first /= double(half);
    second /= double(v.infima.size() - half);
  }
  const double last = v.infima.back();
  if (!(last <= tol)) {
    v.reason = "last window infimum " + std::to_string(last) + " exceeds tol";
  } else if (half > 0 && second > first + tol) {
    v.reason = "window infima increase in trend";
  } else {
    v.consistent = true;
    v.reason = "window infima tend to zero";
  }
  return v;
}

}  // namespace switchstab
