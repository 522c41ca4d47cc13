#pragma once

#include <stdexcept>
#include <string>

namespace tfddrl {

// Base of every error thrown by the library. `kind()` is a stable
// machine-readable tag used by the CLI when reporting failures.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what)
      : Error("precondition", what) {}
};

class ConstraintViolation : public Error {
 public:
  ConstraintViolation(std::string constraint, const std::string& what)
      : Error("constraint", constraint + ": " + what),
        constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

class InvalidDagError : public Error {
 public:
  explicit InvalidDagError(const std::string& what) : Error("invalid_dag", what) {}
};

class ReferenceError : public Error {
 public:
  explicit ReferenceError(const std::string& what) : Error("reference", what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

class LimitError : public Error {
 public:
  explicit LimitError(const std::string& what) : Error("limit", what) {}
};

}  // namespace tfddrl
