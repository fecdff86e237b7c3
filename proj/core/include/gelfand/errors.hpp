#ifndef GELFAND_ERRORS_HPP
#define GELFAND_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gelfand {

/// Bad run parameters, file formats, or grid setups.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Mathematical precondition violated (negative order, empty range, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Requested frequency outside the reachable momentum region.
class InfeasibleFrequencyError : public std::runtime_error {
 public:
  explicit InfeasibleFrequencyError(const std::string& what) : std::runtime_error(what) {}
};

/// Shifted operator is too close to singular; the energy must be re-seeded.
class NearEigenvalueError : public std::runtime_error {
 public:
  NearEigenvalueError(const std::string& what, double margin)
      : std::runtime_error(what), margin(margin) {}
  double margin;
};

/// Interior linear solve failed.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Fixed-point iteration is not contracting.
class NoConvergenceError : public std::runtime_error {
 public:
  NoConvergenceError(const std::string& what, double factor)
      : std::runtime_error(what), contraction(factor) {}
  double contraction;
};

/// Two objects built on different discretizations or energies.
class IncompatibilityError : public std::runtime_error {
 public:
  explicit IncompatibilityError(const std::string& what) : std::runtime_error(what) {}
};

/// Operation requires a converged state.
class InvalidStateError : public std::runtime_error {
 public:
  explicit InvalidStateError(const std::string& what) : std::runtime_error(what) {}
};

/// Constant fit could not satisfy the training rows.
class CalibrationError : public std::runtime_error {
 public:
  explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gelfand

#endif
