#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace maglat {

/// Invalid configuration or parameters (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Spec validation failure; carries every violated invariant.
class ValidationError : public ConfigError {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : ConfigError(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

/// Evaluation outside an operation's domain (z <= 0, inside a prism, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// |B| vanishes where a derivative of the norm is requested.
class SingularPointError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Hessian at a requested trap site is not positive definite.
class NotAMinimumError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Input has the wrong shape for the operation (CLI exit code 3).
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadratic Hamiltonian is not dynamically stable (CLI exit code 4).
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output (CLI exit code 2).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace maglat
