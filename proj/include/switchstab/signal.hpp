#pragma once

// Switching signals on a finite horizon and the classes they can belong to:
// average dwell-time S_a[tau_d, N0], dwell-time S_d[tau_d], ergodic S_e[T]
// and graph-constrained S^H, plus intersections of those.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "switchstab/core.hpp"

namespace switchstab {

struct Switch {
  double time;
  ModeId mode;

  bool operator==(const Switch&) const = default;
};

/// Piecewise-constant, right-continuous mode schedule on [t_begin, t_end].
/// Switch times are strictly increasing inside (t_begin, t_end) and every
/// switch changes the mode.
class SwitchingSignal {
 public:
  SwitchingSignal(double t_begin, double t_end, ModeId initial_mode,
                  std::vector<Switch> switches = {})
      : t_begin_(t_begin),
        t_end_(t_end),
        initial_mode_(initial_mode),
        switches_(std::move(switches)) {
    if (!(std::isfinite(t_begin) && std::isfinite(t_end) && t_end > t_begin)) {
      throw DomainError("signal horizon must satisfy t_begin < t_end");
    }
    ModeId previous = initial_mode_;
    double last = t_begin_;
    for (const Switch& s : switches_) {
      if (!(s.time > last) || !(s.time < t_end_)) {
        throw DomainError("switch times must be strictly increasing inside (" +
                          std::to_string(t_begin_) + ", " + std::to_string(t_end_) +
                          "), offending time " + std::to_string(s.time));
      }
      if (s.mode == previous) {
        throw DomainError("switch at t=" + std::to_string(s.time) +
                          " does not change the mode");
      }
      previous = s.mode;
      last = s.time;
    }
  }

  /// Constant signal sigma == mode.
  static SwitchingSignal Constant(double t_begin, double t_end, ModeId mode) {
    return SwitchingSignal(t_begin, t_end, mode);
  }

  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  ModeId initial_mode() const { return initial_mode_; }
  const std::vector<Switch>& switches() const { return switches_; }

  /// Mode of the last switch <= t, or the initial mode if none.
  ModeId ValueAt(double t) const {
    auto it = std::upper_bound(
        switches_.begin(), switches_.end(), t,
        [](double v, const Switch& s) { return v < s.time; });
    return it == switches_.begin() ? initial_mode_ : std::prev(it)->mode;
  }

  /// sigma(t^-): mode active immediately before t.
  ModeId ValueBefore(double t) const {
    auto it = std::lower_bound(
        switches_.begin(), switches_.end(), t,
        [](const Switch& s, double v) { return s.time < v; });
    return it == switches_.begin() ? initial_mode_ : std::prev(it)->mode;
  }

  /// Every mode the signal takes on its horizon, sorted.
  std::vector<ModeId> ModesVisited() const {
    std::set<ModeId> modes{initial_mode_};
    for (const Switch& s : switches_) modes.insert(s.mode);
    return {modes.begin(), modes.end()};
  }

  bool operator==(const SwitchingSignal&) const = default;

 private:
  double t_begin_;
  double t_end_;
  ModeId initial_mode_;
  std::vector<Switch> switches_;
};

/// Smallest switch time strictly greater than t, or +infinity when no switch
/// follows t inside the horizon.
inline double NextSwitchTime(const SwitchingSignal& sig, double t) {
  if (!(t >= sig.t_begin() && t < sig.t_end())) {
    throw DomainError("time " + std::to_string(t) + " outside signal horizon");
  }
  const auto& sw = sig.switches();
  auto it = std::upper_bound(sw.begin(), sw.end(), t,
                             [](double v, const Switch& s) { return v < s.time; });
  return it == sw.end() ? kInfinity : it->time;
}

/// card(Lambda(sigma) ∩ (lo, hi)). An empty interval counts zero.
inline std::size_t CountSwitches(const SwitchingSignal& sig, double lo, double hi) {
  if (!(lo < hi)) return 0;
  const auto& sw = sig.switches();
  auto first = std::upper_bound(sw.begin(), sw.end(), lo,
                                [](double v, const Switch& s) { return v < s.time; });
  auto last = std::lower_bound(sw.begin(), sw.end(), hi,
                               [](const Switch& s, double v) { return s.time < v; });
  return first < last ? static_cast<std::size_t>(last - first) : 0;
}

/// Signal t -> sig(t + s) on the horizon [t_begin - s, t_end - s].
inline SwitchingSignal Shift(const SwitchingSignal& sig, double s) {
  if (s == 0.0) return sig;
  std::vector<Switch> moved;
  moved.reserve(sig.switches().size());
  for (const Switch& sw : sig.switches()) moved.push_back({sw.time - s, sw.mode});
  return SwitchingSignal(sig.t_begin() - s, sig.t_end() - s, sig.initial_mode(),
                         std::move(moved));
}

/// Restriction of a signal to [t0, t1] ⊂ [t_begin, t_end].
inline SwitchingSignal Restrict(const SwitchingSignal& sig, double t0, double t1) {
  if (t0 < sig.t_begin() || t1 > sig.t_end() || !(t0 < t1)) {
    throw DomainError("restriction window outside signal horizon");
  }
  std::vector<Switch> kept;
  for (const Switch& s : sig.switches()) {
    if (s.time > t0 && s.time < t1) kept.push_back(s);
  }
  return SwitchingSignal(t0, t1, sig.ValueAt(t0), std::move(kept));
}

/// Set-valued map H : Gamma ~> Gamma on a finite mode list.
class SetValuedMap {
 public:
  SetValuedMap() = default;

  explicit SetValuedMap(std::map<ModeId, std::set<ModeId>> successors)
      : successors_(std::move(successors)) {
    for (const auto& [mode, next] : successors_) {
      for (ModeId m : next) {
        if (!successors_.count(m)) {
          throw DomainError("successor " + std::to_string(m) + " of mode " +
                            std::to_string(mode) + " is not in the domain");
        }
      }
    }
  }

  /// Every ordered pair of distinct modes: the unconstrained switching logic.
  static SetValuedMap Complete(const std::vector<ModeId>& modes) {
    std::map<ModeId, std::set<ModeId>> succ;
    for (ModeId a : modes) {
      auto& s = succ[a];
      for (ModeId b : modes) {
        if (a != b) s.insert(b);
      }
    }
    return SetValuedMap(std::move(succ));
  }

  std::vector<ModeId> Domain() const {
    std::vector<ModeId> d;
    for (const auto& kv : successors_) d.push_back(kv.first);
    return d;
  }

  bool Contains(ModeId mode) const { return successors_.count(mode) != 0; }

  const std::set<ModeId>& Successors(ModeId mode) const {
    auto it = successors_.find(mode);
    if (it == successors_.end()) {
      throw DomainError("mode " + std::to_string(mode) + " not in map domain");
    }
    return it->second;
  }

  bool Allows(ModeId from, ModeId to) const {
    auto it = successors_.find(from);
    return it != successors_.end() && it->second.count(to) != 0;
  }

  const std::map<ModeId, std::set<ModeId>>& successors() const { return successors_; }

  bool operator==(const SetValuedMap&) const = default;

 private:
  std::map<ModeId, std::set<ModeId>> successors_;
};

/// S_a[tau_d, n0].
struct AverageDwell {
  double tau_d;
  int n0;
};

/// S_d[tau_d], identical to S_a[tau_d, 1].
struct Dwell {
  double tau_d;
};

/// S_e[T] over the full mode list.
struct Ergodic {
  double period;
  std::vector<ModeId> modes;
};

/// S^H.
struct GraphConstrained {
  SetValuedMap graph;
};

struct SignalClassSpec;

struct Intersection {
  std::vector<SignalClassSpec> members;
};

struct SignalClassSpec {
  std::variant<AverageDwell, Dwell, Ergodic, GraphConstrained, Intersection> kind;

  using Kind = std::variant<AverageDwell, Dwell, Ergodic, GraphConstrained, Intersection>;

  template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, SignalClassSpec> &&
             std::is_constructible_v<Kind, T>)
  SignalClassSpec(T k) : kind(std::move(k)) {}  // NOLINT(runtime/explicit)
};

inline SignalClassSpec Intersect(std::vector<SignalClassSpec> members) {
  return SignalClassSpec(Intersection{std::move(members)});
}

/// All non-intersection members of a spec, with nested intersections
/// flattened.
inline void FlattenInto(const SignalClassSpec& spec,
                        std::vector<const SignalClassSpec*>& out) {
  if (const auto* in = std::get_if<Intersection>(&spec.kind)) {
    for (const auto& m : in->members) FlattenInto(m, out);
  } else {
    out.push_back(&spec);
  }
}

inline std::vector<const SignalClassSpec*> Flatten(const SignalClassSpec& spec) {
  std::vector<const SignalClassSpec*> out;
  FlattenInto(spec, out);
  return out;
}

/// Whether spec ⊂ S_d (contains a dwell constraint, or ADT with N0 = 1).
inline std::optional<double> DwellTimeOf(const SignalClassSpec& spec) {
  std::optional<double> best;
  for (const auto* m : Flatten(spec)) {
    double tau = 0.0;
    if (const auto* d = std::get_if<Dwell>(&m->kind)) {
      tau = d->tau_d;
    } else if (const auto* a = std::get_if<AverageDwell>(&m->kind); a && a->n0 <= 1) {
      tau = a->tau_d;
    } else {
      continue;
    }
    if (!best || tau > *best) best = tau;
  }
  return best;
}

/// Whether spec ⊂ S_a.
inline bool HasAverageDwell(const SignalClassSpec& spec) {
  for (const auto* m : Flatten(spec)) {
    if (std::holds_alternative<Dwell>(m->kind) ||
        std::holds_alternative<AverageDwell>(m->kind)) {
      return true;
    }
  }
  return false;
}

inline const Ergodic* ErgodicOf(const SignalClassSpec& spec) {
  for (const auto* m : Flatten(spec)) {
    if (const auto* e = std::get_if<Ergodic>(&m->kind)) return e;
  }
  return nullptr;
}

inline const GraphConstrained* GraphOf(const SignalClassSpec& spec) {
  for (const auto* m : Flatten(spec)) {
    if (const auto* g = std::get_if<GraphConstrained>(&m->kind)) return g;
  }
  return nullptr;
}

struct ValidationReport {
  bool passed = true;
  std::string message;

  // First violating witness. For ADT/dwell: the switch indices i <= j and
  // times t_i, t_j whose count exceeds the bound. For ergodic: the window
  // start and the missing mode. For graph: the jump (from, to) at time.
  std::optional<std::pair<std::size_t, std::size_t>> switch_indices;
  std::optional<std::pair<double, double>> times;
  std::optional<std::pair<ModeId, ModeId>> jump;
  std::optional<ModeId> missing_mode;

  explicit operator bool() const { return passed; }
};

namespace detail {

inline ValidationReport ValidateAdt(const SwitchingSignal& sig, double tau_d, int n0) {
  if (!(tau_d > 0) || n0 < 1) throw ConfigError("ADT requires tau_d > 0 and N0 >= 1");
  // (j - i + 1) <= N0 + (t_j - t_i)/tau_d for all i <= j  ⇔
  // max_j [ g_j - min_{i<=j} g_i ] <= N0 - 1 + tol/tau_d,  g_k = k - t_k/tau_d.
  const auto& sw = sig.switches();
  ValidationReport report;
  std::size_t arg_min = 0;
  double g_min = kInfinity;
  const double slack = kTimeTolerance / tau_d;
  for (std::size_t j = 0; j < sw.size(); ++j) {
    const double g = static_cast<double>(j) - sw[j].time / tau_d;
    if (g < g_min) {
      g_min = g;
      arg_min = j;
    }
    const std::size_t i = arg_min;
    const double count = static_cast<double>(j - i + 1);
    const double bound = n0 + (sw[j].time - sw[i].time) / tau_d + slack;
    if (count > bound) {
      report.passed = false;
      report.switch_indices = {i, j};
      report.times = {sw[i].time, sw[j].time};
      report.message = std::to_string(j - i + 1) + " switches in [" +
                       std::to_string(sw[i].time) + ", " + std::to_string(sw[j].time) +
                       "] exceed chatter bound " +
                       std::to_string(n0 + (sw[j].time - sw[i].time) / tau_d);
      return report;
    }
  }
  return report;
}

inline ValidationReport ValidateErgodic(const SwitchingSignal& sig, const Ergodic& e) {
  if (!(e.period > 0)) throw ConfigError("ergodic period must be positive");
  if (sig.t_end() - sig.t_begin() < e.period) throw HorizonTooShort();
  ValidationReport report;
  const std::set<ModeId> allowed(e.modes.begin(), e.modes.end());
  for (ModeId m : sig.ModesVisited()) {
    if (!allowed.count(m)) {
      report.passed = false;
      report.missing_mode = m;
      report.message = "mode " + std::to_string(m) + " not in the ergodic mode set";
      return report;
    }
  }
  // Occupancy only changes at switches, so windows starting at t_begin and at
  // each switch time are the only ones that can first lose a mode.
  std::vector<double> starts{sig.t_begin()};
  for (const Switch& s : sig.switches()) {
    if (s.time <= sig.t_end() - e.period) starts.push_back(s.time);
  }
  const auto& sw = sig.switches();
  for (double t0 : starts) {
    const double t1 = t0 + e.period + kTimeTolerance;
    std::set<ModeId> seen{sig.ValueAt(t0)};
    auto it = std::upper_bound(sw.begin(), sw.end(), t0,
                               [](double v, const Switch& s) { return v < s.time; });
    for (; it != sw.end() && it->time <= t1; ++it) seen.insert(it->mode);
    for (ModeId m : e.modes) {
      if (!seen.count(m)) {
        report.passed = false;
        report.missing_mode = m;
        report.times = {t0, t0 + e.period};
        report.message = "mode " + std::to_string(m) + " absent from window [" +
                         std::to_string(t0) + ", " + std::to_string(t0 + e.period) + "]";
        return report;
      }
    }
  }
  return report;
}

inline ValidationReport ValidateGraph(const SwitchingSignal& sig, const SetValuedMap& h) {
  ValidationReport report;
  if (!h.Contains(sig.initial_mode())) {
    report.passed = false;
    report.missing_mode = sig.initial_mode();
    report.message = "initial mode " + std::to_string(sig.initial_mode()) +
                     " not in graph domain";
    return report;
  }
  ModeId previous = sig.initial_mode();
  for (std::size_t k = 0; k < sig.switches().size(); ++k) {
    const Switch& s = sig.switches()[k];
    if (!h.Allows(previous, s.mode)) {
      report.passed = false;
      report.jump = {previous, s.mode};
      report.times = {s.time, s.time};
      report.switch_indices = {k, k};
      report.message = "jump " + std::to_string(previous) + " -> " +
                       std::to_string(s.mode) + " at t=" + std::to_string(s.time) +
                       " not allowed";
      return report;
    }
    previous = s.mode;
  }
  return report;
}

}  // namespace detail

/// Decide membership of a signal in a class on its horizon. The ADT check is
/// exact: the number of switches in an open interval is maximal for intervals
/// shrinking onto [t_i, t_j], so pairs of switch indices suffice.
inline ValidationReport Validate(const SwitchingSignal& sig, const SignalClassSpec& spec) {
  return std::visit(
      [&](const auto& k) -> ValidationReport {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, AverageDwell>) {
          return detail::ValidateAdt(sig, k.tau_d, k.n0);
        } else if constexpr (std::is_same_v<K, Dwell>) {
          return detail::ValidateAdt(sig, k.tau_d, 1);
        } else if constexpr (std::is_same_v<K, Ergodic>) {
          return detail::ValidateErgodic(sig, k);
        } else if constexpr (std::is_same_v<K, GraphConstrained>) {
          return detail::ValidateGraph(sig, k.graph);
        } else {
          for (const auto& m : k.members) {
            ValidationReport r = Validate(sig, m);
            if (!r.passed) return r;
          }
          return ValidationReport{};
        }
      },
      spec.kind);
}

}  // namespace switchstab
