#ifndef LANGINC_ERRORS_HPP_
#define LANGINC_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace langinc {

/// Precondition or argument-shape violation (bad dimensions, invalid config).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (u outside (0,1), t out of range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Base for failures of a numerical procedure on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampler produced a non-finite state or left the |x| <= 1e8 box.
class DivergedError : public NumericalError {
 public:
  DivergedError(std::uint64_t step, const std::string& what)
      : NumericalError("chain diverged at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::uint64_t step() const noexcept { return step_; }

 private:
  std::uint64_t step_;
};

class NoConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolverError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace langinc

#endif  // LANGINC_ERRORS_HPP_
