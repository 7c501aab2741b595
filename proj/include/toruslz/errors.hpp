#pragma once

#include <stdexcept>
#include <string>

namespace toruslz {

/// Argument outside the mathematical domain of an operation (e.g. r > sqrt(2) ell).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Evaluation at a point where mu(r) = 0 and the quantity diverges.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested allocation exceeds the configured memory budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input matrix failed the Hermiticity check.
class NotHermitian : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative eigensolver stopped before reaching the requested tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double achieved_residual)
      : std::runtime_error(what), achieved_residual_(achieved_residual) {}
  double achieved_residual() const noexcept { return achieved_residual_; }

 private:
  double achieved_residual_;
};

/// Grid too coarse to resolve the highest Fourier mode.
class UndersampledGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace toruslz
