#pragma once

#include <stdexcept>
#include <string>

namespace socrl {

/// Thrown when a caller breaks an operation's preconditions
/// (dimension mismatches, out-of-range arguments).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation produces non-finite values or a
/// factorization fails. `step` is the rollout step at which the
/// failure occurred, or -1 when no step context exists.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what, long step = -1)
      : std::runtime_error(what), step(step) {}
  long step;
};

/// Thrown when a fixed-point iteration exhausts its iteration budget.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

/// Thrown on malformed or invalid configuration input. `line` is the
/// 1-based line number in the config file, or 0 when not applicable.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(what), line(line) {}
  int line;
};

}  // namespace socrl
