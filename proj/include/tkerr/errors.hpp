#pragma once

#include <stdexcept>
#include <string>

namespace tkerr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hilbert-space construction and bookkeeping.
class InvalidSpaceError : public Error {
 public:
  using Error::Error;
};

class SpaceMismatchError : public Error {
 public:
  using Error::Error;
};

class TruncationLeakageError : public Error {
 public:
  using Error::Error;
};

// Physics validity. The CLI maps everything deriving from PhysicsError to
// exit code 3.
class PhysicsError : public Error {
 public:
  using Error::Error;
};

class WrongDriveKindError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class ResonancePoleError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class IllDefinedAverageError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class ConvergenceError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class SingularConfigurationError : public PhysicsError {
 public:
  using PhysicsError::PhysicsError;
};

class InstabilityError : public PhysicsError {
 public:
  InstabilityError(const std::string& what, char axis, int mode)
      : PhysicsError(what), axis_(axis), mode_(mode) {}

  char axis() const { return axis_; }
  int mode() const { return mode_; }

 private:
  char axis_;
  int mode_;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace tkerr
