#pragma once

#include <stdexcept>
#include <string>

namespace pseudomode {

/// Failure categories. The numeric values are the CLI exit codes.
enum class ErrorKind : int { config = 2, precondition = 3, numeric = 4 };

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

// Point outside a coefficient domain, or an ellipticity failure.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& m) : Error(ErrorKind::precondition, "domain", m) {}
};

// d(sigma)/d(xi) = 0: turning point of the symbol.
class SingularPointError : public Error {
 public:
  explicit SingularPointError(const std::string& m)
      : Error(ErrorKind::precondition, "singular_point", m) {}
};

// w(.,0) = 0 in the eikonal square root.
class BranchPointError : public Error {
 public:
  explicit BranchPointError(const std::string& m)
      : Error(ErrorKind::precondition, "branch_point", m) {}
};

class NotInOmegaError : public Error {
 public:
  explicit NotInOmegaError(const std::string& m)
      : Error(ErrorKind::precondition, "not_in_omega", m) {}
};

// Coincident roots, proportional modes, singular 2x2 systems.
class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& m)
      : Error(ErrorKind::precondition, "degenerate", m) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& m)
      : Error(ErrorKind::precondition, "precondition", m) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error(ErrorKind::numeric, "numeric", m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error(ErrorKind::config, "config", m) {}
};

}  // namespace pseudomode
