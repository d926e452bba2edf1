#pragma once

// Switched system xdot = f(x, sigma): one vector field and one state domain
// chi_gamma per mode, with an optional exact linear form A_gamma.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "switchstab/core.hpp"

namespace switchstab {

using VectorField = std::function<Vector(const Vector&)>;

/// Axis-aligned box used to sample a set.
struct Box {
  Vector lower;
  Vector upper;

  static Box Symmetric(Eigen::Index n, double half_width) {
    return {Vector::Constant(n, -half_width), Vector::Constant(n, half_width)};
  }

  Eigen::Index dimension() const { return lower.size(); }

  bool Contains(const Vector& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }

  double Distance(const Vector& x) const {
    return (x.cwiseMax(lower).cwiseMin(upper) - x).norm();
  }
};

/// Halfspace {x : normal · x >= offset}.
struct Halfspace {
  Vector normal;
  double offset;
};

/// Membership predicate for a (user-asserted closed) set, plus a bounding box
/// for sampling. Halfspace domains accept points within `tolerance` of the
/// boundary.
class Domain {
 public:
  using Predicate = std::function<bool(const Vector&)>;

  Domain(Predicate contains, Box box, std::vector<Halfspace> halfspaces = {})
      : contains_(std::move(contains)), box_(std::move(box)), halfspaces_(std::move(halfspaces)) {}

  /// All of R^n, sampled on [-half_width, half_width]^n.
  static Domain Everywhere(Eigen::Index n, double half_width = 2.0) {
    Domain d([](const Vector&) { return true; }, Box::Symmetric(n, half_width));
    d.everywhere_ = true;
    return d;
  }

  static Domain Halfspaces(std::vector<Halfspace> hs, Box box, double tolerance = 1e-9) {
    auto pred = [hs, tolerance](const Vector& x) {
      for (const auto& h : hs) {
        if (h.normal.dot(x) < h.offset - tolerance) return false;
      }
      return true;
    };
    return Domain(std::move(pred), std::move(box), std::move(hs));
  }

  bool Contains(const Vector& x) const { return contains_(x); }
  const Box& box() const { return box_; }
  /// True only for domains built by Everywhere().
  bool is_everywhere() const { return everywhere_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }

 private:
  Predicate contains_;
  Box box_;
  std::vector<Halfspace> halfspaces_;
  bool everywhere_ = false;
};

/// One subsystem f_gamma with its domain chi_gamma.
struct Mode {
  ModeId id;
  VectorField field;
  Domain domain;
  std::optional<Matrix> linear;
};

inline Mode LinearMode(ModeId id, Matrix a, std::optional<Domain> domain = std::nullopt) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw ConfigError("A_gamma must be square");
  VectorField f = [a](const Vector& x) -> Vector { return a * x; };
  return Mode{id, std::move(f), domain ? std::move(*domain) : Domain::Everywhere(n),
              std::move(a)};
}

class SwitchedSystem {
 public:
  SwitchedSystem(Eigen::Index dimension, std::vector<Mode> modes)
      : dimension_(dimension), modes_(std::move(modes)) {
    if (dimension_ <= 0) throw ConfigError("state dimension must be positive");
    if (modes_.empty()) throw ConfigError("switched system needs at least one mode");
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      const Mode& m = modes_[k];
      if (index_.count(m.id)) throw ConfigError("duplicate mode id " + std::to_string(m.id));
      if (m.domain.box().dimension() != dimension_) {
        throw ConfigError("domain box of mode " + std::to_string(m.id) + " has wrong dimension");
      }
      if (m.linear && (m.linear->rows() != dimension_ || m.linear->cols() != dimension_)) {
        throw ConfigError("A of mode " + std::to_string(m.id) + " has wrong dimension");
      }
      index_[m.id] = k;
    }
  }

  /// Linear switched system xdot = A_sigma x on R^n; modes numbered 1..N.
  static SwitchedSystem Linear(const std::vector<Matrix>& a_list) {
    if (a_list.empty()) throw ConfigError("need at least one matrix");
    std::vector<Mode> modes;
    for (std::size_t k = 0; k < a_list.size(); ++k) {
      modes.push_back(LinearMode(static_cast<ModeId>(k + 1), a_list[k]));
    }
    return SwitchedSystem(a_list.front().rows(), std::move(modes));
  }

  Eigen::Index dimension() const { return dimension_; }
  const std::vector<Mode>& modes() const { return modes_; }

  std::vector<ModeId> mode_ids() const {
    std::vector<ModeId> ids;
    for (const auto& m : modes_) ids.push_back(m.id);
    return ids;
  }

  bool HasMode(ModeId id) const { return index_.count(id) != 0; }

  const Mode& mode(ModeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DomainError("unknown mode " + std::to_string(id));
    return modes_[it->second];
  }

  bool all_linear() const {
    for (const auto& m : modes_) {
      if (!m.linear) return false;
    }
    return true;
  }

  std::vector<Matrix> linear_matrices() const {
    std::vector<Matrix> out;
    for (const auto& m : modes_) {
      if (!m.linear) throw ConfigError("mode " + std::to_string(m.id) + " is not linear");
      out.push_back(*m.linear);
    }
    return out;
  }

 private:
  Eigen::Index dimension_;
  std::vector<Mode> modes_;
  std::map<ModeId, std::size_t> index_;
};

/// f_gamma(x); throws DomainViolation when x is outside chi_gamma.
inline Vector EvalField(const SwitchedSystem& sys, const Vector& x, ModeId gamma) {
  const Mode& m = sys.mode(gamma);
  if (x.size() != sys.dimension()) throw DomainError("state has wrong dimension");
  if (!m.domain.Contains(x)) throw DomainViolation(0.0, x, gamma);
  return m.field(x);
}

/// |f_gamma(x)| <= tol.
inline bool IsEquilibrium(const SwitchedSystem& sys, ModeId gamma, const Vector& x,
                          double tol) {
  return EvalField(sys, x, gamma).norm() <= tol;
}

/// 0 is an equilibrium of every mode whose domain contains it.
inline bool OriginIsCommonEquilibrium(const SwitchedSystem& sys, double tol = 1e-12) {
  const Vector zero = Vector::Zero(sys.dimension());
  for (const auto& m : sys.modes()) {
    if (m.domain.Contains(zero) && m.field(zero).norm() > tol) return false;
  }
  return true;
}

/// Uniform sample from a box.
template <typename Rng>
Vector SampleBox(const Box& box, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(box.dimension());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = box.lower[i] + u(rng) * (box.upper[i] - box.lower[i]);
  }
  return x;
}

/// Largest |f_gamma(x) - A_gamma x| over random samples in each linear mode's
/// box.
inline double LinearConsistencyError(const SwitchedSystem& sys, int n_samples,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (const auto& m : sys.modes()) {
    if (!m.linear) continue;
    for (int k = 0; k < n_samples; ++k) {
      const Vector x = SampleBox(m.domain.box(), rng);
      worst = std::max(worst, (m.field(x) - *m.linear * x).norm());
    }
  }
  return worst;
}

/// Spot check of the purity contract: evaluating a field twice at the same
/// point returns the same value.
inline bool FieldsArePure(const SwitchedSystem& sys, int n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (const auto& m : sys.modes()) {
    for (int k = 0; k < n_samples; ++k) {
      const Vector x = SampleBox(m.domain.box(), rng);
      if (!m.domain.Contains(x)) continue;
      if (m.field(x) != m.field(x)) return false;
    }
  }
  return true;
}

/// Registered example systems addressable by name from configs.
///
///   decay            1-D xdot = -x (one mode)
///   decoupled        A1 = diag(-1, 0), A2 = diag(0, -1)
///   harmonic         one rotation mode, A = [[0, 1], [-1, 0]]
///   switched_rotation  rotations at rate 1 and rate 2
///   cubic_decoupled  xdot1 = -x1^3 / xdot2 = -x2^3, one coordinate per mode
///   damped_pendulum  pendulum with friction on (mode 1) and off (mode 2)
inline std::optional<SwitchedSystem> BuiltinSystem(const std::string& name) {
  auto diag = [](double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
  };
  auto rotation = [](double w) {
    Matrix m(2, 2);
    m << 0, w, -w, 0;
    return m;
  };
  if (name == "decay") return SwitchedSystem::Linear({Matrix::Constant(1, 1, -1.0)});
  if (name == "decoupled") return SwitchedSystem::Linear({diag(-1, 0), diag(0, -1)});
  if (name == "harmonic") return SwitchedSystem::Linear({rotation(1.0)});
  if (name == "switched_rotation") {
    return SwitchedSystem::Linear({rotation(1.0), rotation(2.0)});
  }
  if (name == "cubic_decoupled") {
    std::vector<Mode> modes;
    modes.push_back(Mode{1,
                         [](const Vector& x) -> Vector {
                           Vector v(2);
                           v << -x[0] * x[0] * x[0], 0.0;
                           return v;
                         },
                         Domain::Everywhere(2), std::nullopt});
    modes.push_back(Mode{2,
                         [](const Vector& x) -> Vector {
                           Vector v(2);
                           v << 0.0, -x[1] * x[1] * x[1];
                           return v;
                         },
                         Domain::Everywhere(2), std::nullopt});
    return SwitchedSystem(2, std::move(modes));
  }
  if (name == "damped_pendulum") {
    std::vector<Mode> modes;
    modes.push_back(Mode{1,
                         [](const Vector& x) -> Vector {
                           Vector v(2);
                           v << x[1], -std::sin(x[0]) - 0.5 * x[1];
                           return v;
                         },
                         Domain::Everywhere(2, 1.5), std::nullopt});
    modes.push_back(Mode{2,
                         [](const Vector& x) -> Vector {
                           Vector v(2);
                           v << x[1], -std::sin(x[0]);
                           return v;
                         },
                         Domain::Everywhere(2, 1.5), std::nullopt});
    return SwitchedSystem(2, std::move(modes));
  }
  return std::nullopt;
}

inline std::vector<std::string> BuiltinSystemNames() {
  return {"decay", "decoupled", "harmonic", "switched_rotation", "cubic_decoupled",
          "damped_pendulum"};
}

}  // namespace switchstab
