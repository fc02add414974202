#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dpinv {

/// Invalid input: malformed domain, exponent out of range, size mismatch.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A formula was evaluated where it is singular (e.g. a vanishing gradient).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Vanishing gradient on a specific element.
class DegenerateGradient : public DomainError {
 public:
  DegenerateGradient(std::size_t element, const std::string& what)
      : DomainError(what), element_(element) {}
  std::size_t element() const noexcept { return element_; }

 private:
  std::size_t element_;
};

/// Coefficient matrix not positive definite on some element.
class EllipticityError : public DomainError {
 public:
  EllipticityError(std::size_t element, const std::string& what)
      : DomainError(what), element_(element) {}
  std::size_t element() const noexcept { return element_; }

 private:
  std::size_t element_;
};

/// An iterative solver stopped without meeting its tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int iterations, double residual)
      : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace dpinv
