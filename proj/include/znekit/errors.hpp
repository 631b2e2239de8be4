#pragma once

#include <stdexcept>
#include <string>

namespace znekit {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Malformed or out-of-contract input (bad files, bad circuits, bad
/// parameters). CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooManyQubits : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MeasurementPresent : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyCircuit : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidScaleFactor : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CoefficientFileError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical / inference failures. CLI maps these to exit code 3.
class FitError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public FitError {
 public:
  using FitError::FitError;
};

class DegenerateFit : public FitError {
 public:
  using FitError::FitError;
};

class NonConvergence : public FitError {
 public:
  using FitError::FitError;
};

class SingularSystem : public FitError {
 public:
  using FitError::FitError;
};

/// Factory state-machine misuse.
class Exhausted : public FitError {
 public:
  using FitError::FitError;
};

class ScaleMismatch : public FitError {
 public:
  using FitError::FitError;
};

/// Wraps a failure raised by an executor, annotated with the scale factor
/// that was being evaluated.
class ExecutorError : public Error {
 public:
  using Error::Error;
};

}  // namespace znekit
