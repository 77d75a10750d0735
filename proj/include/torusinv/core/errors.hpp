#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace torusinv {

/// Invalid sizes, resolutions, or configuration values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold for its inputs.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// NaN/Inf encountered where a finite number is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A time integrator produced a non-finite state.
class SolverDivergence : public std::runtime_error {
 public:
  SolverDivergence(const std::string& solver, double time)
      : std::runtime_error(solver + ": non-finite state at t=" + std::to_string(time)),
        time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// An iterative procedure hit its iteration cap; carries the residual history.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace torusinv
