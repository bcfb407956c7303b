#pragma once

#include <stdexcept>
#include <string>

namespace hypoguard {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bernstein pair with v = b = 0.
class DegeneratePairError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Chi-square norm of an initial law that is not square integrable against the stationary law.
class DivergentNormError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Hypocoercivity parameters with Lambda(eps) <= 0.
class AdmissibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A thinning envelope was exceeded by the true event rate.
class BoundViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or missing configuration field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace hypoguard
