#pragma once

#include <stdexcept>
#include <string>

namespace heisosc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector lengths or field indices that do not fit the group context.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation (zero point, negative scale, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The quadrature grid does not resolve the oscillation of a kernel.
///
/// `max_feasible()` is the largest oscillation parameter (lambda or dyadic j,
/// depending on the caller) that the same grid would accept, or a negative
/// value when nothing is feasible.
class NyquistError : public Error {
 public:
  NyquistError(const std::string& what, double max_increment, double max_feasible)
      : Error(what), max_increment_(max_increment), max_feasible_(max_feasible) {}

  double max_increment() const noexcept { return max_increment_; }
  double max_feasible() const noexcept { return max_feasible_; }

 private:
  double max_increment_;
  double max_feasible_;
};

/// A discretised operator is too large to store or apply within the
/// configured budget.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace heisosc
