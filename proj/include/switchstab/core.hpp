#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace switchstab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Mode identifiers are the integers 1..N of a finite index set.
using ModeId = int;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Slack (seconds) used when comparing switch-time differences against
/// dwell-time and window bounds. Keeps generated signals with gaps of exactly
/// tau_d from failing on round-off.
inline constexpr double kTimeTolerance = 1e-9;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A query or construction outside the valid domain of an object.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Signal class specification cannot be realized on the requested horizon.
class InfeasibleSpec : public Error {
 public:
  using Error::Error;
};

/// Horizon shorter than a window the check needs.
class HorizonTooShort : public Error {
 public:
  HorizonTooShort() : Error("horizon too short to decide") {}
};

/// Inconsistent configuration (class/theorem mismatch, bad dimensions...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// State left the domain chi_gamma of the active mode.
class DomainViolation : public Error {
 public:
  DomainViolation(double t, Vector x, ModeId mode)
      : Error(Describe(t, x, mode)), time(t), state(std::move(x)), mode(mode) {}

  double time;
  Vector state;
  ModeId mode;

 private:
  static std::string Describe(double t, const Vector& x, ModeId mode) {
    std::string s = "state left the domain of mode " + std::to_string(mode) +
                    " at t=" + std::to_string(t) + ", x=(";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(x[i]);
    }
    return s + ")";
  }
};

/// State norm exceeded the configured bound.
class Blowup : public Error {
 public:
  explicit Blowup(double t)
      : Error("state norm exceeded bound at t=" + std::to_string(t)), time(t) {}

  double time;
};

/// SplitMix64 finalizer; derives independent per-trial seeds from a base seed.
inline std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace switchstab
