#pragma once

// Seeded sampler over the signal classes. Every returned signal has passed
// Validate against the requested spec; an unrealizable spec raises
// InfeasibleSpec instead.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "switchstab/core.hpp"
#include "switchstab/signal.hpp"

namespace switchstab {

struct GenerateOptions {
  /// Mode list Gamma. Defaults to the ergodic mode list, then the graph
  /// domain, then {1, 2}.
  std::vector<ModeId> modes;
  std::optional<ModeId> initial_mode;
  /// Relative weights used when several successor modes are legal.
  std::map<ModeId, double> mode_weights;
};

namespace detail {

struct TokenBucket {
  double tau_d;
  double capacity;
  double credits;
};

struct GenerationConstraints {
  std::vector<TokenBucket> buckets;
  std::optional<double> ergodic_period;
  std::vector<ModeId> ergodic_modes;
  std::optional<SetValuedMap> graph;
};

inline GenerationConstraints Collect(const SignalClassSpec& spec) {
  GenerationConstraints c;
  std::optional<std::map<ModeId, std::set<ModeId>>> graph;
  for (const auto* m : Flatten(spec)) {
    if (const auto* a = std::get_if<AverageDwell>(&m->kind)) {
      if (!(a->tau_d > 0) || a->n0 < 1) throw ConfigError("ADT requires tau_d > 0, N0 >= 1");
      c.buckets.push_back({a->tau_d, double(a->n0), double(a->n0)});
    } else if (const auto* d = std::get_if<Dwell>(&m->kind)) {
      if (!(d->tau_d > 0)) throw ConfigError("dwell time must be positive");
      c.buckets.push_back({d->tau_d, 1.0, 1.0});
    } else if (const auto* e = std::get_if<Ergodic>(&m->kind)) {
      if (!(e->period > 0)) throw ConfigError("ergodic period must be positive");
      std::vector<ModeId> modes = e->modes;
      std::sort(modes.begin(), modes.end());
      if (c.ergodic_period && modes != c.ergodic_modes) {
        throw InfeasibleSpec("ergodic constraints over different mode sets");
      }
      c.ergodic_period = c.ergodic_period ? std::min(*c.ergodic_period, e->period) : e->period;
      c.ergodic_modes = modes;
    } else if (const auto* g = std::get_if<GraphConstrained>(&m->kind)) {
      if (!graph) {
        graph = g->graph.successors();
      } else {
        // Intersection of two graph classes: edges allowed by both.
        std::map<ModeId, std::set<ModeId>> merged;
        for (const auto& [mode, next] : *graph) {
          if (!g->graph.Contains(mode)) continue;
          auto& out = merged[mode];
          for (ModeId n : next) {
            if (g->graph.Allows(mode, n)) out.insert(n);
          }
        }
        for (auto& [mode, next] : merged) {
          std::erase_if(next, [&](ModeId n) { return !merged.count(n); });
        }
        graph = std::move(merged);
      }
    }
  }
  if (graph) c.graph = SetValuedMap(std::move(*graph));
  return c;
}

inline bool Legal(const GenerationConstraints& c, ModeId from, ModeId to) {
  return from != to && (!c.graph || c.graph->Allows(from, to));
}

template <typename Rng>
ModeId PickWeighted(const std::vector<ModeId>& candidates,
                    const std::map<ModeId, double>& weights, Rng& rng) {
  if (weights.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)];
  }
  std::vector<double> w;
  w.reserve(candidates.size());
  for (ModeId m : candidates) {
    auto it = weights.find(m);
    w.push_back(it == weights.end() ? 1.0 : std::max(0.0, it->second));
  }
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  return candidates[pick(rng)];
}

/// Shortest legal path from `from` to `to` (excluding `from`), BFS.
inline std::optional<std::vector<ModeId>> ShortestPath(const GenerationConstraints& c,
                                                       const std::vector<ModeId>& modes,
                                                       ModeId from, ModeId to) {
  std::map<ModeId, ModeId> parent;
  std::deque<ModeId> queue{from};
  parent[from] = from;
  while (!queue.empty()) {
    ModeId u = queue.front();
    queue.pop_front();
    for (ModeId v : modes) {
      if (parent.count(v) || !Legal(c, u, v)) continue;
      parent[v] = u;
      if (v == to) {
        std::vector<ModeId> path{to};
        for (ModeId p = parent[to]; p != from; p = parent[p]) path.push_back(p);
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(v);
    }
  }
  return std::nullopt;
}

/// Longest cyclic run of entries different from `mode` in the closed walk.
inline std::size_t LongestAbsence(const std::vector<ModeId>& walk, ModeId mode) {
  const std::size_t n = walk.size();
  std::size_t best = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (walk[start] != mode) continue;
    std::size_t run = 0;
    for (std::size_t k = 1; k < n && walk[(start + k) % n] != mode; ++k) ++run;
    best = std::max(best, run);
  }
  return best;
}

template <typename Rng>
std::vector<Switch> GenerateErgodic(GenerationConstraints& c, const std::vector<ModeId>& modes,
                                    ModeId initial, double t0, double t1, Rng& rng) {
  if (modes.size() == 1) return {};
  // Closed walk from the initial mode visiting every mode, repeated round-robin.
  std::vector<ModeId> targets;
  for (ModeId m : modes) {
    if (m != initial) targets.push_back(m);
  }
  std::shuffle(targets.begin(), targets.end(), rng);
  std::vector<ModeId> walk{initial};
  std::set<ModeId> visited{initial};
  for (ModeId target : targets) {
    if (visited.count(target)) continue;
    auto path = ShortestPath(c, modes, walk.back(), target);
    if (!path) throw InfeasibleSpec("graph does not allow visiting every ergodic mode");
    for (ModeId m : *path) {
      walk.push_back(m);
      visited.insert(m);
    }
  }
  auto back = ShortestPath(c, modes, walk.back(), initial);
  if (!back) throw InfeasibleSpec("graph admits no closed walk through every ergodic mode");
  walk.insert(walk.end(), back->begin(), back->end() - 1);

  std::size_t gap_segments = 0;
  for (ModeId m : modes) gap_segments = std::max(gap_segments, LongestAbsence(walk, m));

  double lo = 0.0;
  for (const auto& b : c.buckets) lo = std::max(lo, b.tau_d);
  const double hi = *c.ergodic_period / double(gap_segments);
  if (lo > hi) {
    throw InfeasibleSpec("ergodic period too short for the dwell constraint: need T >= " +
                         std::to_string(lo * double(gap_segments)));
  }
  if (lo == 0.0) lo = 0.25 * hi;
  std::uniform_real_distribution<double> duration(lo, hi);

  std::vector<Switch> switches;
  double t = t0;
  for (std::size_t k = 1;; ++k) {
    t += duration(rng);
    if (!(t < t1)) break;
    switches.push_back({t, walk[k % walk.size()]});
  }
  return switches;
}

template <typename Rng>
std::vector<Switch> GenerateFree(GenerationConstraints& c, const std::vector<ModeId>& modes,
                                 const std::map<ModeId, double>& weights, ModeId initial,
                                 double t0, double t1, Rng& rng) {
  double tau_ref = 0.0;
  for (const auto& b : c.buckets) tau_ref = std::max(tau_ref, b.tau_d);
  if (tau_ref == 0.0) tau_ref = (t1 - t0) / 20.0;
  std::bernoulli_distribution burst(0.5);
  std::uniform_real_distribution<double> short_extra(0.0, 0.1 * tau_ref);
  std::uniform_real_distribution<double> long_extra(0.0, 2.0 * tau_ref);

  std::vector<Switch> switches;
  ModeId mode = initial;
  double t = t0;
  for (;;) {
    // Earliest time at which every bucket holds a full credit.
    double wait = 0.0;
    for (const auto& b : c.buckets) wait = std::max(wait, (1.0 - b.credits) * b.tau_d);
    const double extra = burst(rng) ? short_extra(rng) : long_extra(rng);
    const double next = t + wait + extra + 1e-9 * tau_ref;
    if (!(next < t1)) break;

    std::vector<ModeId> candidates;
    for (ModeId m : modes) {
      if (Legal(c, mode, m)) candidates.push_back(m);
    }
    if (candidates.empty()) break;

    for (auto& b : c.buckets) {
      b.credits = std::min(b.capacity, b.credits + (next - t) / b.tau_d) - 1.0;
    }
    mode = PickWeighted(candidates, weights, rng);
    switches.push_back({next, mode});
    t = next;
  }
  return switches;
}

}  // namespace detail

/// Sample a signal of the given class on [t0, t1], deterministically per seed.
///
/// Average dwell-time constraints are enforced with a token bucket per
/// constraint (credits refill at rate 1/tau_d up to N0; a switch spends one
/// credit). Ergodic classes follow a closed walk through every mode with
/// segment lengths drawn between the dwell bound and T / (longest absence).
inline SwitchingSignal Generate(const SignalClassSpec& spec, double t0, double t1,
                                std::uint64_t seed, const GenerateOptions& options = {}) {
  if (!(t0 < t1)) throw ConfigError("generation horizon must satisfy t0 < t1");
  detail::GenerationConstraints c = detail::Collect(spec);

  std::vector<ModeId> modes = options.modes;
  if (modes.empty()) {
    if (c.ergodic_period) {
      modes = c.ergodic_modes;
    } else if (c.graph) {
      modes = c.graph->Domain();
    } else {
      modes = {1, 2};
    }
  }
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  if (c.ergodic_period) {
    if (modes != c.ergodic_modes) {
      throw InfeasibleSpec("generation modes differ from the ergodic mode set");
    }
    if (t1 - t0 < *c.ergodic_period) throw HorizonTooShort();
  }
  if (c.graph) {
    for (ModeId m : modes) {
      if (!c.graph->Contains(m)) {
        throw InfeasibleSpec("mode " + std::to_string(m) + " not in graph domain");
      }
    }
  }

  std::mt19937_64 rng(seed);
  ModeId initial;
  if (options.initial_mode) {
    initial = *options.initial_mode;
    if (!std::binary_search(modes.begin(), modes.end(), initial)) {
      throw InfeasibleSpec("initial mode not in mode list");
    }
  } else {
    initial = detail::PickWeighted(modes, options.mode_weights, rng);
  }

  std::vector<Switch> switches =
      c.ergodic_period
          ? detail::GenerateErgodic(c, modes, initial, t0, t1, rng)
          : detail::GenerateFree(c, modes, options.mode_weights, initial, t0, t1, rng);
  SwitchingSignal sig(t0, t1, initial, std::move(switches));
  if (ValidationReport r = Validate(sig, spec); !r.passed) {
    throw InfeasibleSpec("could not realize spec on horizon: " + r.message);
  }
  return sig;
}

}  // namespace switchstab
