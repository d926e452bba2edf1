#pragma once

// Fixed-step classical RK4 for switched systems. Steps are truncated so that
// every switch time of the signal is hit exactly; the mode only changes there.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "switchstab/core.hpp"
#include "switchstab/signal.hpp"
#include "switchstab/system.hpp"

namespace switchstab {

struct Sample {
  double t;
  Vector x;
  ModeId mode;
};

struct StepStats {
  double max_step = 0.0;
  /// Richardson estimate |y_h - y_{h/2,h/2}| / 15, maximised over the steps
  /// where it was evaluated.
  double local_error_estimate = 0.0;
};

struct Trajectory {
  std::vector<Sample> samples;
  SwitchingSignal signal;
  StepStats step_stats;

  double t_begin() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }
  Eigen::Index dimension() const { return samples.front().x.size(); }
};

struct SimulationOptions {
  double step = 1e-3;
  /// Integrate xdot = -f instead of f (time reversal).
  bool backward = false;
  double blowup_bound = 1e9;
  /// Evaluate the step-doubling error estimate every this many steps
  /// (0 disables it).
  int error_estimate_stride = 64;
};

/// One classical RK4 step of xdot = sign * field(x).
template <typename Field>
Vector Rk4Step(const Field& field, const Vector& x, double h, double sign = 1.0) {
  const Vector k1 = sign * field(x);
  const Vector k2 = sign * field(x + 0.5 * h * k1);
  const Vector k3 = sign * field(x + 0.5 * h * k2);
  const Vector k4 = sign * field(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrates the switched system along `sig` from x0 over [t0, t1].
///
/// Throws DomainViolation(t, x, gamma) when an accepted step leaves
/// chi_gamma, and Blowup(t) when |x| exceeds the bound.
inline Trajectory Simulate(const SwitchedSystem& sys, const SwitchingSignal& sig,
                           const Vector& x0, double t0, double t1,
                           const SimulationOptions& options = {}) {
  if (!(options.step > 0)) throw ConfigError("step must be positive");
  if (!(t0 < t1)) throw ConfigError("simulation span must satisfy t0 < t1");
  if (t0 < sig.t_begin() || t1 > sig.t_end()) {
    throw DomainError("simulation span exceeds the signal horizon");
  }
  if (x0.size() != sys.dimension()) throw DomainError("initial state has wrong dimension");

  const double sign = options.backward ? -1.0 : 1.0;
  Trajectory traj{{}, sig, {}};
  ModeId mode = sig.ValueAt(t0);
  if (!sys.mode(mode).domain.Contains(x0)) throw DomainViolation(t0, x0, mode);
  traj.samples.push_back({t0, x0, mode});

  std::vector<double> breaks;
  for (const Switch& s : sig.switches()) {
    if (s.time > t0 && s.time < t1) breaks.push_back(s.time);
  }
  breaks.push_back(t1);

  Vector x = x0;
  double a = t0;
  long step_count = 0;
  for (double b : breaks) {
    const Mode& m = sys.mode(mode);
    const auto n_steps = static_cast<long>(std::max(1.0, std::ceil((b - a) / options.step - 1e-9)));
    double t = a;
    for (long k = 1; k <= n_steps; ++k) {
      const double t_next = (k == n_steps) ? b : a + static_cast<double>(k) * options.step;
      const double h = t_next - t;
      Vector x_next = Rk4Step(m.field, x, h, sign);
      if (options.error_estimate_stride > 0 && step_count % options.error_estimate_stride == 0) {
        const Vector half = Rk4Step(m.field, x, 0.5 * h, sign);
        const Vector two_halves = Rk4Step(m.field, half, 0.5 * h, sign);
        traj.step_stats.local_error_estimate = std::max(
            traj.step_stats.local_error_estimate, (two_halves - x_next).norm() / 15.0);
      }
      ++step_count;
      traj.step_stats.max_step = std::max(traj.step_stats.max_step, h);
      if (!x_next.allFinite() || x_next.norm() > options.blowup_bound) throw Blowup(t_next);
      if (!m.domain.Contains(x_next)) throw DomainViolation(t_next, x_next, mode);
      x = std::move(x_next);
      t = t_next;
      if (k < n_steps) traj.samples.push_back({t, x, mode});
    }
    // Land on the breakpoint; the sample carries the mode active from b on.
    mode = sig.ValueAt(b);
    if (b < t1 && !sys.mode(mode).domain.Contains(x)) throw DomainViolation(b, x, mode);
    traj.samples.push_back({b, x, mode});
    a = b;
  }
  return traj;
}

/// Linear interpolation between the samples bracketing t; exact at samples.
inline Vector SampleState(const Trajectory& traj, double t) {
  const auto& s = traj.samples;
  if (!(t >= s.front().t && t <= s.back().t)) {
    throw DomainError("time " + std::to_string(t) + " outside trajectory span");
  }
  auto it = std::lower_bound(s.begin(), s.end(), t,
                             [](const Sample& a, double v) { return a.t < v; });
  if (it->t == t) return it->x;
  const Sample& hi = *it;
  const Sample& lo = *std::prev(it);
  const double w = (t - lo.t) / (hi.t - lo.t);
  return (1.0 - w) * lo.x + w * hi.x;
}

/// Shortest round-trip decimal representation.
inline std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// CSV with columns t, x_1..x_n, mode.
inline void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index n = traj.dimension();
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x_" << (i + 1);
  out << ",mode\n";
  for (const Sample& s : traj.samples) {
    out << FormatDouble(s.t);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << FormatDouble(s.x[i]);
    out << ',' << s.mode << '\n';
  }
}

}  // namespace switchstab
