#pragma once

#include <stdexcept>
#include <string>

namespace curveflow {

/// Root of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry. Raised where a formula would otherwise divide by a vanishing
// geometric quantity.
class GeometryError : public Error {
 public:
  using Error::Error;
};
class DegenerateEdge : public GeometryError {
 public:
  using GeometryError::GeometryError;
};
class CuspAtVertex : public GeometryError {
 public:
  using GeometryError::GeometryError;
};
class DegenerateStencil : public GeometryError {
 public:
  using GeometryError::GeometryError;
};
class InvalidCurve : public GeometryError {
 public:
  using GeometryError::GeometryError;
};
class LengthMismatch : public Error {
 public:
  using Error::Error;
};

// Constraint gradients (dL, dA) are numerically parallel.
class SingularGram : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

// Linear algebra and the Newton solver.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};
class SolverError : public Error {
 public:
  using Error::Error;
};
class SingularJacobian : public SolverError {
 public:
  using SolverError::SolverError;
};
class NonFiniteResidual : public SolverError {
 public:
  using SolverError::SolverError;
};

// Input and output.
class BadSpec : public Error {
 public:
  using Error::Error;
};
class ParseError : public Error {
 public:
  using Error::Error;
};
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace curveflow
