#pragma once

// Hypothesis checking for the convergence and stability theorems, with
// three-valued verdicts. Linear-algebra facts are decided exactly; anything
// established by sampling or simulation is at most evidence.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "switchstab/core.hpp"
#include "switchstab/cycles.hpp"
#include "switchstab/generate.hpp"
#include "switchstab/integrator.hpp"
#include "switchstab/limit_sets.hpp"
#include "switchstab/lyapunov.hpp"
#include "switchstab/observability.hpp"
#include "switchstab/signal.hpp"
#include "switchstab/system.hpp"

namespace switchstab {

enum class HypothesisStatus { kHoldsAnalytic, kEvidence, kFails };
enum class Verdict { kCertified, kSupportedByEvidence, kRefuted };

inline const char* ToString(HypothesisStatus s) {
  switch (s) {
    case HypothesisStatus::kHoldsAnalytic: return "holds";
    case HypothesisStatus::kEvidence: return "evidence";
    case HypothesisStatus::kFails: return "fails";
  }
  return "?";
}

inline const char* ToString(Verdict v) {
  switch (v) {
    case Verdict::kCertified: return "Certified";
    case Verdict::kSupportedByEvidence: return "SupportedByEvidence";
    case Verdict::kRefuted: return "Refuted";
  }
  return "?";
}

enum class Theorem {
  kConvergence0,
  kErgodicConv,
  kConvergence1,
  kConvergence2,
  kGuas1,
  kGuas2,
  kGuas2bis,
  kCorollaryFinal,
};

inline const char* ToString(Theorem t) {
  switch (t) {
    case Theorem::kConvergence0: return "convergence0";
    case Theorem::kErgodicConv: return "ergodicconv";
    case Theorem::kConvergence1: return "convergence1";
    case Theorem::kConvergence2: return "convergence2";
    case Theorem::kGuas1: return "guas1";
    case Theorem::kGuas2: return "guas2";
    case Theorem::kGuas2bis: return "guas2bis";
    case Theorem::kCorollaryFinal: return "corollary_final";
  }
  return "?";
}

inline Theorem ParseTheorem(const std::string& s) {
  for (Theorem t : {Theorem::kConvergence0, Theorem::kErgodicConv, Theorem::kConvergence1,
                    Theorem::kConvergence2, Theorem::kGuas1, Theorem::kGuas2, Theorem::kGuas2bis,
                    Theorem::kCorollaryFinal}) {
    if (s == ToString(t)) return t;
  }
  throw ConfigError("unknown theorem id '" + s + "'");
}

struct HypothesisResult {
  HypothesisResult() = default;
  HypothesisResult(std::string n, std::string s) : name(std::move(n)), statement(std::move(s)) {}

  std::string name;
  std::string statement;
  HypothesisStatus status = HypothesisStatus::kEvidence;
  std::string detail;
  std::optional<double> margin;
  std::optional<Vector> witness;
  std::optional<ModeId> witness_mode;
};

enum class LimitKind { kOrigin, kSubspace, kSampledSet, kOutputZeroSet };

inline const char* ToString(LimitKind k) {
  switch (k) {
    case LimitKind::kOrigin: return "origin";
    case LimitKind::kSubspace: return "subspace";
    case LimitKind::kSampledSet: return "sampled_set";
    case LimitKind::kOutputZeroSet: return "output_zero_set";
  }
  return "?";
}

/// Target set named by a theorem's conclusion.
struct PredictedLimit {
  LimitKind kind = LimitKind::kOrigin;
  std::string description = "{0}";
  std::optional<Subspace> subspace;
  std::vector<Vector> points;
  /// Distance used for kOutputZeroSet.
  std::function<double(const Vector&)> distance;

  double Distance(const Vector& x) const {
    switch (kind) {
      case LimitKind::kOrigin: return x.norm();
      case LimitKind::kSubspace: return subspace->Distance(x);
      case LimitKind::kSampledSet: {
        double best = kInfinity;
        for (const auto& p : points) best = std::min(best, (p - x).norm());
        return best;
      }
      case LimitKind::kOutputZeroSet: return distance(x);
    }
    return kInfinity;
  }
};

struct CertificateReport {
  std::string theorem;
  std::vector<HypothesisResult> hypotheses;
  Verdict verdict = Verdict::kSupportedByEvidence;
  PredictedLimit predicted_limit;
  /// What the theorem concludes if every hypothesis holds ("GAS", "LAS",
  /// "convergence").
  std::string conclusion;

  HypothesisResult& Add(HypothesisResult h) {
    hypotheses.push_back(std::move(h));
    return hypotheses.back();
  }

  const HypothesisResult* Find(const std::string& name) const {
    for (const auto& h : hypotheses) {
      if (h.name == name) return &h;
    }
    return nullptr;
  }

  /// Certified iff every hypothesis holds analytically; Refuted if any fails.
  void Finalize() {
    bool all_analytic = !hypotheses.empty();
    for (const auto& h : hypotheses) {
      if (h.status == HypothesisStatus::kFails) {
        verdict = Verdict::kRefuted;
        return;
      }
      all_analytic = all_analytic && h.status == HypothesisStatus::kHoldsAnalytic;
    }
    verdict = all_analytic ? Verdict::kCertified : Verdict::kSupportedByEvidence;
  }
};

namespace detail {

/// Sample x0 uniformly from the closed ball of the given radius.
template <typename Rng>
Vector SampleBall(Eigen::Index n, double radius, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector d(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) d[i] = g(rng);
  } while (d.norm() == 0.0);
  return d.normalized() * radius * std::pow(u(rng), 1.0 / double(n));
}

/// Mode list a generator should use for `spec` on `sys`.
inline GenerateOptions GenerationModesFor(const SwitchedSystem& sys,
                                          const SignalClassSpec& spec) {
  GenerateOptions o;
  std::vector<ModeId> ids = sys.mode_ids();
  std::sort(ids.begin(), ids.end());
  if (const Ergodic* e = ErgodicOf(spec)) {
    std::vector<ModeId> modes = e->modes;
    std::sort(modes.begin(), modes.end());
    if (modes != ids) throw ConfigError("ergodic mode set differs from the system's modes");
  }
  if (const GraphConstrained* g = GraphOf(spec)) {
    if (g->graph.Domain() != ids) throw ConfigError("graph domain differs from the system's modes");
  }
  o.modes = ids;
  return o;
}

inline Vector FdGradient(const ScalarFunction& phi, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (phi(xp) - phi(xm)) / (2.0 * h);
  }
  return g;
}

/// Gradient descent with Armijo backtracking on phi >= 0; returns the point
/// once phi <= tol.
inline std::optional<Vector> DescendToZero(const ScalarFunction& phi, Vector x, double tol,
                                           int max_iter = 300) {
  double value = phi(x);
  for (int it = 0; it < max_iter && value > tol; ++it) {
    const Vector g = FdGradient(phi, x);
    const double gg = g.squaredNorm();
    if (!(gg > 0) || !std::isfinite(gg)) break;
    double alpha = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      const Vector y = x - alpha * g;
      const double vy = phi(y);
      if (vy <= value - 1e-4 * alpha * gg) {
        x = y;
        value = vy;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (value <= tol) return x;
  return std::nullopt;
}

/// Candidate points of the zero set {phi = 0}: descend from quasi-random
/// seeds in `box` plus any extra seeds, keep points inside `inside`.
inline std::vector<Vector> ZeroSetCandidates(const ScalarFunction& phi, const Box& box,
                                             const std::function<bool(const Vector&)>& inside,
                                             int n_seeds, std::uint64_t seed, double tol,
                                             const std::vector<Vector>& extra = {}) {
  std::vector<Vector> seeds;
  const Vector zero = Vector::Zero(box.dimension());
  seeds.push_back(zero);
  for (const auto& e : extra) seeds.push_back(e);
  HaltonSampler sampler(box, seed);
  for (int k = 0; k < n_seeds; ++k) seeds.push_back(sampler.Next());

  std::vector<Vector> out;
  for (const auto& s : seeds) {
    auto x = DescendToZero(phi, s, tol);
    if (!x || !inside(*x)) continue;
    bool duplicate = false;
    for (const auto& y : out) {
      if ((y - *x).norm() <= 1e-6) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(*x);
  }
  return out;
}

}  // namespace detail

/// Knobs of the sampled hypothesis checks.
enum class PairKind { kWeak, kFWeak };

struct ConvergenceOptions {
  std::uint64_t seed = 1;
  /// Weak pairs have v(t) nonincreasing globally, F-weak pairs only on each
  /// sigma^{-1}(gamma).
  PairKind pair_kind = PairKind::kWeak;
  /// Use the level-set variants of the pairwise conditions, with c drawn from
  /// limits of v on simulated runs plus level_probes.
  bool use_level_sets = false;
  std::vector<double> level_probes;
  /// Uniqueness of solutions from 0, asserted by the user. When unset the
  /// positive-definiteness alternative V_gamma^{-1}(0) ∩ chi_gamma = {0} is
  /// checked instead (linear fields are accepted outright).
  std::optional<bool> uniqueness_asserted;
  /// Signals the user claims belong to the class; validated exactly.
  std::vector<SwitchingSignal> observed_signals;
  /// Extra seeds for the zero-set candidate search.
  std::vector<Vector> extra_candidates;

  int decrease_samples = 400;
  int zero_set_seeds = 48;
  double zero_tol = 1e-12;
  double membership_tol = 1e-8;
  double equilibrium_tol = 1e-6;
  double origin_tol = 1e-6;
  /// Finite horizon standing in for tau = infinity; per-mode default when
  /// unset.
  std::optional<double> long_horizon;
  /// Horizon for the sets X^f(g, h) = ∪_{tau > 0} X^f(g, h, tau).
  double short_horizon = 1.0;
  double step = 1e-3;

  int n_trajectories = 8;
  double horizon = 20.0;
  double ball_radius = 1.0;
};

namespace detail {

/// Mode restricted to O_gamma ∩ chi_gamma, for membership tests.
inline Mode RestrictToRegion(const Mode& m, const ModeLyapunov& l) {
  Domain region(
      [d = m.domain, r = l.region](const Vector& x) { return d.Contains(x) && r.Contains(x); },
      SamplingBox(m, l));
  return Mode{m.id, m.field, std::move(region), m.linear};
}

struct Requirement {
  ModeId mode;
  FlowDirection direction;
  bool infinite_horizon;
};

struct ProbeResult {
  std::vector<Vector> members;
  std::optional<Vector> witness;
  std::size_t n_candidates = 0;
};

/// Sampled estimate of ∩_k X^{dir_k}_{O_k}(f_k, W_k) [∩ V_k^{-1}(c)]:
/// candidates from the zero set of the summed W_k, kept when every
/// membership test passes. `is_witness` flags members that refute the
/// inclusion being tested.
class ZeroOutputProber {
 public:
  ZeroOutputProber(const SwitchedSystem& sys, const LyapunovPair& pair,
                   const ConvergenceOptions& o)
      : sys_(sys), pair_(pair), o_(o) {}

  ProbeResult Probe(const std::vector<Requirement>& reqs, std::optional<double> level,
                    const std::function<bool(const Vector&, const Vector&)>& is_witness,
                    std::uint64_t stream) const {
    std::vector<Mode> modes;
    std::vector<const ModeLyapunov*> ls;
    for (const auto& r : reqs) {
      ls.push_back(&pair_.mode(r.mode));
      modes.push_back(RestrictToRegion(sys_.mode(r.mode), *ls.back()));
    }
    ScalarFunction phi = [&](const Vector& x) {
      double s = 0.0;
      for (const auto* l : ls) s += std::abs(l->dissipation(x));
      if (level) {
        for (const auto* l : ls) s += std::pow(l->value(x) - *level, 2);
      }
      return s;
    };
    auto inside = [&](const Vector& x) {
      for (const auto& m : modes) {
        if (!m.domain.Contains(x)) return false;
      }
      return true;
    };
    Box box = modes.front().domain.box();
    for (const auto& m : modes) {
      box.lower = box.lower.cwiseMax(m.domain.box().lower);
      box.upper = box.upper.cwiseMin(m.domain.box().upper);
    }
    ProbeResult r;
    const auto candidates =
        ZeroSetCandidates(phi, box, inside, o_.zero_set_seeds, MixSeed(o_.seed, stream),
                          o_.zero_tol, o_.extra_candidates);
    r.n_candidates = candidates.size();
    for (const auto& x : candidates) {
      bool member = true;
      Vector evidence = x;
      for (std::size_t k = 0; k < reqs.size() && member; ++k) {
        const Mode& m = modes[k];
        const double tau = reqs[k].infinite_horizon
                               ? o_.long_horizon.value_or(DefaultMembershipHorizon(m))
                               : o_.short_horizon;
        const MembershipResult res =
            ZeroOutputMembership(m, ls[k]->dissipation, x, tau, reqs[k].direction,
                                 o_.membership_tol, o_.step);
        member = res.member;
      }
      if (!member) continue;
      r.members.push_back(x);
      if (!r.witness && is_witness(x, evidence)) r.witness = x;
    }
    return r;
  }

 private:
  const SwitchedSystem& sys_;
  const LyapunovPair& pair_;
  const ConvergenceOptions& o_;
};

inline std::string ModeList(const std::vector<ModeId>& modes) {
  std::string s = "(";
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(modes[i]);
  }
  return s + ")";
}

inline bool AllRegionsEverywhere(const SwitchedSystem& sys, const LyapunovPair& pair) {
  for (const auto& m : sys.modes()) {
    if (!m.domain.is_everywhere() || !pair.mode(m.id).region.is_everywhere()) return false;
  }
  return true;
}

/// lambda_max(P A + A^T P + C^T C) and its eigenvector.
inline std::pair<double, Vector> LmiResidual(const Matrix& a, const Matrix& p, const Matrix& c) {
  const Matrix m = p * a + a.transpose() * p + c.transpose() * c;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Eigen::Index top = es.eigenvalues().size() - 1;
  return {es.eigenvalues()[top], es.eigenvectors().col(top)};
}

inline constexpr double kLmiTolerance = 1e-10;
inline constexpr double kSubspaceTolerance = 1e-9;

}  // namespace detail

struct CorollaryOptions {
  std::uint64_t seed = 1;
  /// Runs used as evidence for v nonincreasing when P_gamma differ.
  int n_trajectories = 16;
  double horizon = 20.0;
  double step = 1e-3;
  double ball_radius = 1.0;
  /// Class the evidence runs are drawn from; S_d[0.5] ∩ S_e[1] over all
  /// modes when unset.
  std::optional<SignalClassSpec> evidence_class;
};

/// Linear GAS criterion for S_d ∩ S_e: (1) P A + A^T P <= -C^T C,
/// (2) x^T P_sigma x nonincreasing, (3) unobservable subspace of (C, A) equals
/// ker A, (4) ∩ ker A_gamma = {0}. Condition 2 holds analytically only when a
/// common P is assumed and the P_gamma indeed coincide; otherwise it is
/// probed with simulated runs.
inline CertificateReport CheckCorollaryFinal(const std::vector<Matrix>& a_list,
                                             const std::vector<Matrix>& p_list,
                                             const std::vector<Matrix>& c_list,
                                             bool common_p_assumed,
                                             const CorollaryOptions& o = {}) {
  if (a_list.empty() || a_list.size() != p_list.size() || a_list.size() != c_list.size()) {
    throw ConfigError("need one A, P and C per mode");
  }
  const Eigen::Index n = a_list.front().rows();
  for (std::size_t k = 0; k < a_list.size(); ++k) {
    if (a_list[k].rows() != n || a_list[k].cols() != n) {
      throw ConfigError("A of mode " + std::to_string(k + 1) + " is not " + std::to_string(n) +
                        "x" + std::to_string(n));
    }
  }
  const LyapunovPair pair = QuadraticPair(p_list, c_list);
  CertificateReport report;
  report.theorem = ToString(Theorem::kCorollaryFinal);
  report.conclusion = "GAS";

  bool lmi_holds = true;
  for (std::size_t k = 0; k < a_list.size(); ++k) {
    const auto id = static_cast<ModeId>(k + 1);
    const auto [lmax, v] = detail::LmiResidual(a_list[k], p_list[k], c_list[k]);
    HypothesisResult h{"lmi_mode_" + std::to_string(id),
                       "P A + A^T P <= -C^T C for mode " + std::to_string(id)};
    h.margin = -lmax;
    if (lmax <= detail::kLmiTolerance) {
      h.status = HypothesisStatus::kHoldsAnalytic;
      h.detail = "largest eigenvalue " + FormatDouble(lmax);
    } else {
      lmi_holds = false;
      h.status = HypothesisStatus::kFails;
      h.detail = "largest eigenvalue " + FormatDouble(lmax) + " > 0";
      h.witness = v;
      h.witness_mode = id;
    }
    report.Add(std::move(h));
  }

  {
    HypothesisResult h{"v_nonincreasing", "v(t) = x^T P_sigma x nonincreasing"};
    bool all_equal = true;
    for (const auto& p : p_list) {
      all_equal = all_equal && (p - p_list.front()).norm() <= 1e-12 * std::max(1.0, p.norm());
    }
    if (common_p_assumed && all_equal && lmi_holds) {
      h.status = HypothesisStatus::kHoldsAnalytic;
      h.detail = "common P; every mode decreases x^T P x and jumps leave it unchanged";
    } else {
      std::vector<ModeId> ids;
      for (std::size_t k = 0; k < a_list.size(); ++k) ids.push_back(static_cast<ModeId>(k + 1));
      const SignalClassSpec cls =
          o.evidence_class.value_or(Intersect({Dwell{0.5}, Ergodic{1.0, ids}}));
      const SwitchedSystem sys = SwitchedSystem::Linear(a_list);
      const GenerateOptions gen = detail::GenerationModesFor(sys, cls);
      h.status = HypothesisStatus::kEvidence;
      h.detail = std::to_string(o.n_trajectories) + " simulated runs, no persistent increase";
      double worst = 0.0;
      for (int k = 0; k < o.n_trajectories; ++k) {
        std::mt19937_64 rng(MixSeed(o.seed, 2 * std::uint64_t(k) + 1));
        const SwitchingSignal sig =
            Generate(cls, 0.0, o.horizon, MixSeed(o.seed, 2 * std::uint64_t(k)), gen);
        const Vector x0 = detail::SampleBall(n, o.ball_radius, rng);
        SimulationOptions so;
        so.step = o.step;
        const Trajectory traj = Simulate(sys, sig, x0, 0.0, o.horizon, so);
        const MonotonicityReport m = MonitorV(traj, pair, false);
        worst = std::max(worst, m.max_excess);
        if (!m.nonincreasing) {
          h.status = HypothesisStatus::kFails;
          h.detail = "v increased persistently at t=" + FormatDouble(*m.violation_time) +
                     " on run " + std::to_string(k);
          h.witness = SampleState(traj, *m.violation_time);
          h.witness_mode = *m.violation_mode;
          break;
        }
      }
      h.margin = -worst;
      if (!common_p_assumed && h.status == HypothesisStatus::kEvidence) {
        h.detail += " (common P not assumed)";
      }
    }
    report.Add(std::move(h));
  }

  std::vector<Subspace> kernels;
  for (std::size_t k = 0; k < a_list.size(); ++k) {
    const auto id = static_cast<ModeId>(k + 1);
    const Subspace unobservable = UnobservableSubspace(c_list[k], a_list[k]);
    const Subspace ker = Kernel(a_list[k]);
    kernels.push_back(ker);
    const double d = ProjectorDistance(unobservable, ker);
    HypothesisResult h{"unobservable_is_kernel_mode_" + std::to_string(id),
                       "unobservable subspace of (C, A) equals ker A for mode " +
                           std::to_string(id)};
    h.margin = detail::kSubspaceTolerance - d;
    if (d <= detail::kSubspaceTolerance) {
      h.status = HypothesisStatus::kHoldsAnalytic;
      h.detail = "projector distance " + FormatDouble(d);
    } else {
      h.status = HypothesisStatus::kFails;
      h.detail = "projector distance " + FormatDouble(d) + ", dim U = " +
                 std::to_string(unobservable.dimension()) + ", dim ker A = " +
                 std::to_string(ker.dimension());
      // A direction in one subspace but not the other.
      const Subspace& big = unobservable.dimension() >= ker.dimension() ? unobservable : ker;
      const Subspace& small = &big == &unobservable ? ker : unobservable;
      for (Eigen::Index j = 0; j < big.dimension(); ++j) {
        const Vector b = big.basis().col(j);
        if (small.Distance(b) > 1e-6) {
          h.witness = b;
          break;
        }
      }
      h.witness_mode = id;
    }
    report.Add(std::move(h));
  }

  {
    const Subspace common = Intersect(kernels);
    HypothesisResult h{"kernels_intersect_trivially", "∩ ker A_gamma = {0}"};
    if (common.is_zero()) {
      h.status = HypothesisStatus::kHoldsAnalytic;
      h.detail = "intersection is {0}";
    } else {
      h.status = HypothesisStatus::kFails;
      h.detail = "intersection has dimension " + std::to_string(common.dimension());
      h.witness = common.basis().col(0);
    }
    report.Add(std::move(h));
  }

  report.predicted_limit = PredictedLimit{};
  report.Finalize();
  return report;
}

/// Signal class each theorem is stated for.
inline void RequireClassFor(Theorem t, const SignalClassSpec& spec) {
  switch (t) {
    case Theorem::kConvergence0:
    case Theorem::kConvergence1:
    case Theorem::kGuas1:
      if (!HasAverageDwell(spec)) {
        throw ConfigError(std::string(ToString(t)) + " needs an average dwell-time class");
      }
      return;
    case Theorem::kErgodicConv:
    case Theorem::kGuas2bis:
    case Theorem::kCorollaryFinal:
      if (!ErgodicOf(spec) || !DwellTimeOf(spec)) {
        throw ConfigError(std::string(ToString(t)) + " needs an ergodic ∩ dwell-time class");
      }
      return;
    case Theorem::kConvergence2:
    case Theorem::kGuas2:
      if (!GraphOf(spec) || !DwellTimeOf(spec)) {
        throw ConfigError(std::string(ToString(t)) + " needs a graph ∩ dwell-time class");
      }
      return;
  }
}

/// Checks the hypotheses of one convergence or stability theorem for `sys`,
/// the Lyapunov pair and the signal class, and names the predicted limit.
inline CertificateReport CheckConvergence(const SwitchedSystem& sys, const LyapunovPair& pair,
                                          const SignalClassSpec& spec, Theorem theorem,
                                          const ConvergenceOptions& o = {}) {
  if (theorem == Theorem::kCorollaryFinal) {
    throw ConfigError("corollary_final is checked by CheckCorollaryFinal");
  }
  RequireClassFor(theorem, spec);
  for (ModeId id : sys.mode_ids()) {
    if (!pair.HasMode(id)) throw ConfigError("Lyapunov pair lacks mode " + std::to_string(id));
  }
  const GenerateOptions gen = detail::GenerationModesFor(sys, spec);

  const bool guas = theorem == Theorem::kGuas1 || theorem == Theorem::kGuas2 ||
                    theorem == Theorem::kGuas2bis;
  const bool to_origin = theorem == Theorem::kConvergence1 ||
                         theorem == Theorem::kConvergence2 || guas;
  const bool ergodic = theorem == Theorem::kErgodicConv || theorem == Theorem::kGuas2bis;
  const bool cyclic = theorem == Theorem::kConvergence2 || theorem == Theorem::kGuas2;
  const PairKind kind = theorem == Theorem::kGuas2bis ? PairKind::kFWeak : o.pair_kind;
  const bool linear_quadratic = sys.all_linear() && pair.is_quadratic();
  const Eigen::Index n = sys.dimension();
  const Vector zero = Vector::Zero(n);

  CertificateReport report;
  report.theorem = ToString(theorem);
  report.conclusion = guas ? (pair.region_is_everywhere() && pair.radially_unbounded() ? "GAS"
                                                                                       : "LAS")
                           : "convergence";

  if (!o.observed_signals.empty()) {
    HypothesisResult h{"signal_class", "observed signals belong to the class"};
    h.status = HypothesisStatus::kHoldsAnalytic;
    h.detail = std::to_string(o.observed_signals.size()) + " signals validated";
    for (std::size_t k = 0; k < o.observed_signals.size(); ++k) {
      const ValidationReport v = Validate(o.observed_signals[k], spec);
      if (!v.passed) {
        h.status = HypothesisStatus::kFails;
        h.detail = "signal " + std::to_string(k) + ": " + v.message;
        break;
      }
    }
    report.Add(std::move(h));
  }

  if (to_origin) {
    HypothesisResult h{"origin_equilibrium", "0 is an equilibrium of every mode"};
    const bool ok = OriginIsCommonEquilibrium(sys);
    h.status = ok ? HypothesisStatus::kHoldsAnalytic : HypothesisStatus::kFails;
    h.detail = ok ? "f_gamma(0) = 0" : "some f_gamma(0) != 0";
    if (!ok) h.witness = zero;
    report.Add(std::move(h));

    HypothesisResult in_o{"origin_in_region", "0 ∈ O"};
    bool inside = false;
    for (const auto& l : pair.modes()) inside = inside || l.region.Contains(zero);
    in_o.status = inside ? HypothesisStatus::kHoldsAnalytic : HypothesisStatus::kFails;
    report.Add(std::move(in_o));
  }

  // -grad V . f >= W >= 0.
  bool decrease_analytic = false;
  {
    HypothesisResult h{"decrease_inequality", "-grad V_gamma . f_gamma >= W_gamma >= 0"};
    if (linear_quadratic && detail::AllRegionsEverywhere(sys, pair)) {
      h.status = HypothesisStatus::kHoldsAnalytic;
      double margin = kInfinity;
      const auto ids = sys.mode_ids();
      for (std::size_t k = 0; k < ids.size(); ++k) {
        const auto [lmax, v] = detail::LmiResidual(*sys.mode(ids[k]).linear, pair.p[k], pair.c[k]);
        margin = std::min(margin, -lmax);
        if (lmax > detail::kLmiTolerance && h.status != HypothesisStatus::kFails) {
          h.status = HypothesisStatus::kFails;
          h.witness = v;
          h.witness_mode = ids[k];
        }
      }
      h.margin = margin;
      h.detail = "eigenvalues of P A + A^T P + C^T C";
      decrease_analytic = h.status == HypothesisStatus::kHoldsAnalytic;
    } else {
      const InequalityReport r = CheckDecreaseInequality(sys, pair, o.decrease_samples, o.seed);
      h.status = r.passed ? HypothesisStatus::kEvidence : HypothesisStatus::kFails;
      h.margin = r.worst_margin;
      h.detail = r.passed ? std::to_string(r.n_evaluated) + " sampled points" : r.message;
      h.witness = r.witness;
      if (r.witness) h.witness_mode = r.witness_mode;
    }
    report.Add(std::move(h));
  }

  if (guas) {
    HypothesisResult h{"class_k_envelopes", "alpha1(|x|) <= V_gamma(x) <= alpha2(|x|)"};
    if (pair.is_quadratic()) {
      h.status = HypothesisStatus::kHoldsAnalytic;
      h.detail = "extreme eigenvalues of P_gamma";
    } else if (!pair.alpha1() || !pair.alpha2()) {
      h.status = HypothesisStatus::kFails;
      h.detail = "pair has no class-K envelopes";
    } else {
      const EnvelopeReport r = CheckEnvelopes(pair, o.decrease_samples, o.seed);
      h.status = r.passed ? HypothesisStatus::kEvidence : HypothesisStatus::kFails;
      h.margin = std::min(r.worst_lower_margin, r.worst_upper_margin);
      h.witness = r.witness;
    }
    report.Add(std::move(h));
  }

  if (theorem == Theorem::kConvergence1 || theorem == Theorem::kConvergence2 ||
      theorem == Theorem::kGuas1) {
    HypothesisResult h{"uniqueness_from_origin",
                       "solutions from 0 are unique (or V_gamma^{-1}(0) ∩ chi_gamma = {0})"};
    if (o.uniqueness_asserted.value_or(false)) {
      h.status = HypothesisStatus::kHoldsAnalytic;
      h.detail = "asserted by the user";
    } else if (sys.all_linear()) {
      h.status = HypothesisStatus::kHoldsAnalytic;
      h.detail = "linear fields are Lipschitz";
    } else {
      const PositivityReport r = CheckZeroLevelIsolated(sys, pair, o.decrease_samples, o.seed);
      h.status = !r.passed ? HypothesisStatus::kFails
                 : r.analytic ? HypothesisStatus::kHoldsAnalytic
                              : HypothesisStatus::kEvidence;
      h.detail = "V_gamma positive away from 0";
      h.witness = r.witness;
      h.witness_mode = r.witness_mode;
    }
    report.Add(std::move(h));
  }

  // Simulated runs from the class: monotonicity evidence and realized levels.
  std::vector<double> levels = o.level_probes;
  {
    const bool global = kind == PairKind::kWeak;
    HypothesisResult h{global ? "v_nonincreasing" : "v_nonincreasing_per_mode",
                       global ? "v(t) = V(x(t), sigma(t)) nonincreasing"
                              : "V_gamma(x(t)) nonincreasing on sigma^{-1}(gamma)"};
    bool common_p = pair.is_quadratic();
    for (const auto& p : pair.p) common_p = common_p && (p - pair.p.front()).norm() <= 1e-12;
    std::vector<SwitchingSignal> signals;
    for (int k = 0; k < o.n_trajectories; ++k) {
      signals.push_back(Generate(spec, 0.0, o.horizon, MixSeed(o.seed, 100 + 2 * std::uint64_t(k)),
                                 gen));
    }
    int completed = 0, errors = 0;
    double worst = 0.0;
    std::optional<std::string> failure;
    for (std::size_t k = 0; k < signals.size(); ++k) {
      std::mt19937_64 rng(MixSeed(o.seed, 101 + 2 * std::uint64_t(k)));
      const Vector x0 = detail::SampleBall(n, o.ball_radius, rng);
      try {
        SimulationOptions so;
        so.step = o.step;
        const Trajectory traj =
            Simulate(sys, signals[k], x0, signals[k].t_begin(), signals[k].t_end(), so);
        const MonotonicityReport m = MonitorV(traj, pair, !global);
        ++completed;
        worst = std::max(worst, m.max_excess);
        levels.push_back(m.v.back());
        if (!m.nonincreasing && !failure) {
          failure = "persistent increase at t=" + FormatDouble(*m.violation_time) + " on run " +
                    std::to_string(k);
          h.witness = SampleState(traj, *m.violation_time);
          h.witness_mode = *m.violation_mode;
        }
      } catch (const Error&) {
        ++errors;
      }
    }
    h.margin = -worst;
    if (failure) {
      h.status = HypothesisStatus::kFails;
      h.detail = *failure;
    } else if (completed == 0) {
      h.status = HypothesisStatus::kFails;
      h.detail = "no simulated run stayed inside O and the domains";
    } else if (common_p && decrease_analytic) {
      h.status = HypothesisStatus::kHoldsAnalytic;
      h.detail = "common P with the decrease inequality";
    } else {
      h.status = HypothesisStatus::kEvidence;
      h.detail = std::to_string(completed) + " runs monotone";
      if (errors) h.detail += ", " + std::to_string(errors) + " left the domain or blew up";
    }
    report.Add(std::move(h));
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end(),
                           [](double a, double b) { return std::abs(a - b) <= 1e-9; }),
               levels.end());

  const detail::ZeroOutputProber prober(sys, pair, o);
  const std::vector<ModeId> ids = sys.mode_ids();
  std::uint64_t stream = 1000;
  auto nonzero = [&](const Vector& x, const Vector&) { return x.norm() > o.origin_tol; };

  // O^b_a ∩ O^f_b [∩ V_a^{-1}(c) ∩ V_b^{-1}(c)] ⊂ {0}; returns a witness.
  const bool level_variant = o.use_level_sets && kind == PairKind::kWeak;
  auto mixed_witness = [&](ModeId a, ModeId b) -> std::optional<Vector> {
    const std::vector<detail::Requirement> reqs{{a, FlowDirection::kBackward, false},
                                                {b, FlowDirection::kForward, false}};
    if (!level_variant) return prober.Probe(reqs, std::nullopt, nonzero, ++stream).witness;
    for (double c : levels) {
      if (auto w = prober.Probe(reqs, c, nonzero, ++stream).witness) return w;
    }
    return std::nullopt;
  };
  const std::string level_suffix = level_variant ? " ∩ V^{-1}(c) for realized c" : "";

  if (theorem == Theorem::kConvergence1 || theorem == Theorem::kGuas1) {
    for (ModeId g : ids) {
      HypothesisResult h{"forward_backward_trivial_mode_" + std::to_string(g),
                         "O^f(inf) ∩ O^b(inf) ⊂ {0} for mode " + std::to_string(g)};
      const auto r = prober.Probe({{g, FlowDirection::kForward, true},
                                   {g, FlowDirection::kBackward, true}},
                                  std::nullopt, nonzero, ++stream);
      h.status = r.witness ? HypothesisStatus::kFails : HypothesisStatus::kEvidence;
      h.detail = std::to_string(r.n_candidates) + " candidates, " +
                 std::to_string(r.members.size()) + " members";
      h.witness = r.witness;
      if (r.witness) h.witness_mode = g;
      report.Add(std::move(h));
    }
    for (ModeId a : ids) {
      for (ModeId b : ids) {
        if (a == b) continue;
        HypothesisResult h{"mixed_trivial_" + std::to_string(a) + "_" + std::to_string(b),
                           "O^b_" + std::to_string(a) + " ∩ O^f_" + std::to_string(b) +
                               level_suffix + " ⊂ {0}"};
        const auto w = mixed_witness(a, b);
        h.status = w ? HypothesisStatus::kFails : HypothesisStatus::kEvidence;
        h.witness = w;
        report.Add(std::move(h));
      }
    }
  }

  if (cyclic) {
    {
      HypothesisResult h{"one_sided_trivial",
                         "O^f_gamma(inf) ⊂ {0} for every gamma, or O^b_gamma(inf) ⊂ {0} for "
                         "every gamma"};
      std::optional<Vector> forward_witness, backward_witness;
      for (ModeId g : ids) {
        if (!forward_witness) {
          forward_witness = prober.Probe({{g, FlowDirection::kForward, true}}, std::nullopt,
                                         nonzero, ++stream).witness;
        }
        if (!backward_witness) {
          backward_witness = prober.Probe({{g, FlowDirection::kBackward, true}}, std::nullopt,
                                          nonzero, ++stream).witness;
        }
      }
      if (forward_witness && backward_witness) {
        h.status = HypothesisStatus::kFails;
        h.witness = forward_witness;
        h.detail = "nonzero points in both a forward and a backward set";
      } else {
        h.status = HypothesisStatus::kEvidence;
        h.detail = !forward_witness ? "forward sets sampled trivial" : "backward sets sampled trivial";
      }
      report.Add(std::move(h));
    }
    const std::vector<Cycle> cycles = SimpleCycles(GraphOf(spec)->graph);
    for (const Cycle& c : cycles) {
      HypothesisResult h{"cycle_" + detail::ModeList(c),
                         "some j on cycle " + detail::ModeList(c) + " has O^b_j ∩ O^f_{j+1}" +
                             level_suffix + " ⊂ {0}"};
      h.status = HypothesisStatus::kFails;
      std::optional<Vector> first_witness;
      for (std::size_t j = 0; j + 1 < c.size(); ++j) {
        const auto w = mixed_witness(c[j], c[j + 1]);
        if (!w) {
          h.status = HypothesisStatus::kEvidence;
          h.detail = "j = " + std::to_string(j + 1) + " (" + std::to_string(c[j]) + " -> " +
                     std::to_string(c[j + 1]) + ")";
          break;
        }
        if (!first_witness) first_witness = w;
      }
      if (h.status == HypothesisStatus::kFails) {
        h.detail = "every jump on the cycle has a nonzero indistinguishable point";
        h.witness = first_witness;
      }
      report.Add(std::move(h));
    }
  }

  if (ergodic) {
    for (ModeId g : ids) {
      HypothesisResult h{"zero_output_is_equilibria_mode_" + std::to_string(g),
                         "O^b_gamma = E_gamma ∩ O_gamma or O^f_gamma = E_gamma ∩ O_gamma for mode " +
                             std::to_string(g)};
      const Mode& m = sys.mode(g);
      auto moving = [&](const Vector& x, const Vector&) {
        return m.field(x).norm() > o.equilibrium_tol;
      };
      const auto fwd = prober.Probe({{g, FlowDirection::kForward, false}}, std::nullopt, moving,
                                    ++stream);
      const auto bwd = prober.Probe({{g, FlowDirection::kBackward, false}}, std::nullopt, moving,
                                    ++stream);
      if (fwd.witness && bwd.witness) {
        h.status = HypothesisStatus::kFails;
        h.witness = fwd.witness;
        h.witness_mode = g;
        h.detail = "non-equilibrium points in both zero-output sets";
      } else {
        h.status = HypothesisStatus::kEvidence;
        h.detail = !fwd.witness ? "forward set sampled inside E_gamma"
                                : "backward set sampled inside E_gamma";
      }
      report.Add(std::move(h));
    }
  }

  // ∩ (E_gamma ∩ O_gamma): exact for linear modes on R^n, sampled otherwise.
  std::optional<Subspace> equilibria_subspace;
  std::vector<Vector> equilibria_points;
  if (ergodic) {
    if (sys.all_linear() && detail::AllRegionsEverywhere(sys, pair)) {
      std::vector<Subspace> kernels;
      for (const auto& a : sys.linear_matrices()) kernels.push_back(Kernel(a));
      equilibria_subspace = Intersect(kernels);
    } else {
      ScalarFunction phi = [&](const Vector& x) {
        double s = 0.0;
        for (const auto& m : sys.modes()) s += m.field(x).squaredNorm();
        return s;
      };
      auto inside = [&](const Vector& x) {
        for (const auto& m : sys.modes()) {
          if (!m.domain.Contains(x) || !pair.mode(m.id).region.Contains(x)) return false;
        }
        return true;
      };
      const Mode& first = sys.modes().front();
      equilibria_points = detail::ZeroSetCandidates(
          phi, detail::SamplingBox(first, pair.mode(first.id)), inside, o.zero_set_seeds,
          MixSeed(o.seed, 999), o.equilibrium_tol * o.equilibrium_tol, o.extra_candidates);
    }
  }

  if (theorem == Theorem::kGuas2bis) {
    HypothesisResult h{"common_equilibria_trivial", "∩ (E_gamma ∩ O_gamma) = {0}"};
    if (equilibria_subspace) {
      h.status = equilibria_subspace->is_zero() ? HypothesisStatus::kHoldsAnalytic
                                                : HypothesisStatus::kFails;
      h.detail = "∩ ker A_gamma has dimension " + std::to_string(equilibria_subspace->dimension());
      if (!equilibria_subspace->is_zero()) h.witness = equilibria_subspace->basis().col(0);
    } else {
      h.status = HypothesisStatus::kEvidence;
      for (const auto& x : equilibria_points) {
        if (x.norm() > o.origin_tol) {
          h.status = HypothesisStatus::kFails;
          h.witness = x;
          break;
        }
      }
      h.detail = std::to_string(equilibria_points.size()) + " sampled common equilibria";
    }
    report.Add(std::move(h));
  }

  // Predicted limit.
  PredictedLimit limit;
  if (to_origin) {
    limit.kind = LimitKind::kOrigin;
  } else if (ergodic) {
    limit.description = "∩ (E_gamma ∩ O_gamma)";
    if (equilibria_subspace) {
      if (equilibria_subspace->is_zero()) {
        limit.kind = LimitKind::kOrigin;
        limit.description = "{0}";
      } else {
        limit.kind = LimitKind::kSubspace;
        limit.subspace = equilibria_subspace;
      }
    } else {
      limit.kind = LimitKind::kSampledSet;
      limit.points = equilibria_points;
    }
  } else {
    limit.kind = LimitKind::kSampledSet;
    limit.description = "∪ (O^f_gamma ∩ O^b_gamma')";
    auto any = [](const Vector&, const Vector&) { return false; };
    for (ModeId a : ids) {
      for (ModeId b : ids) {
        const auto r = prober.Probe({{a, FlowDirection::kForward, false},
                                     {b, FlowDirection::kBackward, false}},
                                    std::nullopt, any, ++stream);
        for (const auto& x : r.members) limit.points.push_back(x);
      }
    }
    const bool only_origin = std::all_of(limit.points.begin(), limit.points.end(),
                                         [&](const Vector& x) { return x.norm() <= o.origin_tol; });
    if (only_origin) {
      limit = PredictedLimit{};
    }
  }
  report.predicted_limit = std::move(limit);
  report.Finalize();
  return report;
}

/// Output-invariance check: y(t) = h(x(t)) weakly meagre along runs from the
/// class, with predicted limit h^{-1}(0). The distance to h^{-1}(0) is
/// estimated by descending |h| from the query point.
struct OutputInvarianceOptions {
  std::uint64_t seed = 1;
  int n_trajectories = 8;
  double horizon = 20.0;
  double step = 1e-3;
  double ball_radius = 1.0;
  double window = 1.0;
  double tol = 1e-3;
};

inline CertificateReport CheckOutputInvariance(const SwitchedSystem& sys,
                                               const SignalClassSpec& spec,
                                               const ScalarFunction& h,
                                               const OutputInvarianceOptions& o = {}) {
  if (!HasAverageDwell(spec)) throw ConfigError("output invariance needs an average dwell class");
  const GenerateOptions gen = detail::GenerationModesFor(sys, spec);
  CertificateReport report;
  report.theorem = "output_invariance";
  report.conclusion = "convergence";
  PredictedLimit limit;
  limit.kind = LimitKind::kOutputZeroSet;
  limit.description = "h^{-1}(0)";
  limit.distance = [h](const Vector& x) {
    ScalarFunction phi = [&](const Vector& y) { return h(y) * h(y); };
    const auto z = detail::DescendToZero(phi, x, 1e-16);
    return z ? (*z - x).norm() : kInfinity;
  };

  HypothesisResult meagre{"output_weakly_meagre", "y(t) = h(x(t)) weakly meagre"};
  meagre.status = HypothesisStatus::kEvidence;
  HypothesisResult conv{"converges_to_output_zero_set", "x(t) -> h^{-1}(0) on simulated runs"};
  conv.status = HypothesisStatus::kEvidence;
  const auto n_windows = static_cast<int>(std::floor(o.horizon / o.window));
  double worst_distance = 0.0;
  for (int k = 0; k < o.n_trajectories; ++k) {
    const SwitchingSignal sig =
        Generate(spec, 0.0, o.horizon, MixSeed(o.seed, 2 * std::uint64_t(k)), gen);
    std::mt19937_64 rng(MixSeed(o.seed, 2 * std::uint64_t(k) + 1));
    const Vector x0 = detail::SampleBall(sys.dimension(), o.ball_radius, rng);
    SimulationOptions so;
    so.step = o.step;
    const Trajectory traj = Simulate(sys, sig, x0, 0.0, o.horizon, so);
    ScalarSeries y;
    for (const auto& s : traj.samples) {
      if (!y.t.empty() && s.t == y.t.back()) continue;
      y.t.push_back(s.t);
      y.y.push_back(h(s.x));
    }
    const MeagreVerdict v = WeaklyMeagreEstimate(y, o.window, n_windows, o.tol);
    if (!v.consistent && meagre.status != HypothesisStatus::kFails) {
      meagre.status = HypothesisStatus::kFails;
      meagre.detail = "run " + std::to_string(k) + ": " + v.reason;
      meagre.witness = x0;
    }
    const double d = limit.Distance(traj.samples.back().x);
    worst_distance = std::max(worst_distance, d);
    if (!(d <= o.tol) && conv.status != HypothesisStatus::kFails) {
      conv.status = HypothesisStatus::kFails;
      conv.detail = "run " + std::to_string(k) + " ends at distance " + FormatDouble(d);
      conv.witness = traj.samples.back().x;
    }
  }
  conv.margin = o.tol - worst_distance;
  if (meagre.detail.empty()) meagre.detail = std::to_string(o.n_trajectories) + " runs";
  if (conv.detail.empty()) conv.detail = "worst final distance " + FormatDouble(worst_distance);
  report.Add(std::move(meagre));
  report.Add(std::move(conv));
  report.predicted_limit = std::move(limit);
  report.Finalize();
  return report;
}

struct StabilityTrial {
  std::uint64_t signal_seed = 0;
  Vector x0;
  double sup_norm = 0.0;
  /// sup_t |x(t)| / |x0|.
  double gain = 0.0;
  double final_distance = kInfinity;
  bool converged = false;
  std::string error;
};

struct StabilityStatistics {
  std::vector<StabilityTrial> trials;
  double max_gain = 0.0;
  double max_final_distance = 0.0;
  std::size_t n_converged = 0;
  std::size_t n_errors = 0;
};

struct StabilityOptions {
  std::uint64_t seed = 1;
  double step = 1e-3;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Runs n_trials seeded (signal, x0) pairs with |x0| <= ball_radius and
/// records the uniform-stability gain and the final distance to the target.
/// Trials run in parallel; results are stored by trial index.
inline StabilityStatistics EmpiricalStabilityTest(const SwitchedSystem& sys,
                                                  const SignalClassSpec& spec, int n_trials,
                                                  double ball_radius, double horizon, double eps,
                                                  const TargetDistance& target = DistanceToOrigin(),
                                                  const StabilityOptions& o = {}) {
  if (n_trials < 1 || !(ball_radius > 0) || !(horizon > 0) || !(eps > 0)) {
    throw ConfigError("n_trials, ball_radius, horizon and eps must be positive");
  }
  const GenerateOptions gen = detail::GenerationModesFor(sys, spec);
  StabilityStatistics stats;
  stats.trials.resize(static_cast<std::size_t>(n_trials));

  auto run = [&](std::size_t k) {
    StabilityTrial& t = stats.trials[k];
    t.signal_seed = MixSeed(o.seed, 2 * k);
    std::mt19937_64 rng(MixSeed(o.seed, 2 * k + 1));
    t.x0 = detail::SampleBall(sys.dimension(), ball_radius, rng);
    try {
      const SwitchingSignal sig = Generate(spec, 0.0, horizon, t.signal_seed, gen);
      SimulationOptions so;
      so.step = o.step;
      const Trajectory traj = Simulate(sys, sig, t.x0, 0.0, horizon, so);
      for (const auto& s : traj.samples) t.sup_norm = std::max(t.sup_norm, s.x.norm());
      t.gain = t.sup_norm / t.x0.norm();
      t.final_distance = target(traj.samples.back().x);
      t.converged = t.final_distance <= eps;
    } catch (const Error& e) {
      t.error = e.what();
    }
  };

  unsigned workers = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n_trials));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < stats.trials.size(); k = next++) run(k);
    });
  }
  for (auto& th : pool) th.join();

  for (const auto& t : stats.trials) {
    if (!t.error.empty()) {
      ++stats.n_errors;
      continue;
    }
    stats.max_gain = std::max(stats.max_gain, t.gain);
    stats.max_final_distance = std::max(stats.max_final_distance, t.final_distance);
    if (t.converged) ++stats.n_converged;
  }
  return stats;
}

}  // namespace switchstab
