#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace acflow {

/// Configuration rejected; what() names the offending field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A NaN or Inf appeared in a field update.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Constraint residual exceeded the hard drift bound before projection.
class ConstraintBlowupError : public std::runtime_error {
 public:
  ConstraintBlowupError(double drift, double t)
      : std::runtime_error("constraint drift " + std::to_string(drift) +
                           " exceeded 0.1 at t=" + std::to_string(t)),
        drift_(drift) {}
  double drift() const { return drift_; }

 private:
  double drift_;
};

/// An endomorphism field could not be expressed in the modeled basis.
class ReconstructionFailure : public std::runtime_error {
 public:
  ReconstructionFailure(double residual, std::int64_t point)
      : std::runtime_error("basis reconstruction residual " +
                           std::to_string(residual) + " at point " +
                           std::to_string(point)),
        residual_(residual),
        point_(point) {}
  double residual() const { return residual_; }
  std::int64_t point() const { return point_; }

 private:
  double residual_;
  std::int64_t point_;
};

/// Snapshot file malformed, truncated, or incompatible with the target grid.
class SnapshotError : public std::runtime_error {
 public:
  explicit SnapshotError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A diagnostics window is not covered by the available samples.
class CoverageError : public std::runtime_error {
 public:
  explicit CoverageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace acflow
