#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hjsel {

/// Invalid arguments or violated preconditions.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A sampled structural assumption on H or a does not hold.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative procedure failed; carries the residual history.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// The assembled linearization lost its M-matrix sign pattern.
class SignViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A competitor measure in the minimization check is not holonomic enough.
class NotHolonomic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hjsel
