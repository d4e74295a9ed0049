#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace secgames {

// Base class for every error the engine raises deliberately.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatches, labels that do not exist,
// probabilities off the simplex, preconditions violated.
class InvalidInputError : public Error {
public:
  using Error::Error;
};

// Instance exceeds a solver's documented enumeration bound.
class UnsupportedSizeError : public Error {
public:
  using Error::Error;
};

// Spec-document parsing/validation failure. `location` is a
// JSON-pointer-style path to the offending field.
class ValidationError : public Error {
public:
  ValidationError(std::string location, const std::string& message)
      : Error(location + ": " + message), location_(std::move(location)) {}
  const std::string& location() const { return location_; }

private:
  std::string location_;
};

// An iterative solver hit its iteration cap. Carries the last iterate so
// callers can inspect how far it got.
class ConvergenceFailure : public Error {
public:
  ConvergenceFailure(const std::string& message, std::vector<double> last_iterate)
      : Error(message), last_iterate_(std::move(last_iterate)) {}
  const std::vector<double>& last_iterate() const { return last_iterate_; }

private:
  std::vector<double> last_iterate_;
};

// An external policy endpoint returned a sample that is not an action label.
class UnparseableActionError : public Error {
public:
  UnparseableActionError(const std::string& message, std::string sample)
      : Error(message), sample_(std::move(sample)) {}
  const std::string& sample() const { return sample_; }

private:
  std::string sample_;
};

// Transport-level failure talking to an external policy endpoint.
class EndpointUnreachableError : public Error {
public:
  using Error::Error;
};

// Workflow wiring problems detected before or during a run.
class ConfigurationError : public Error {
public:
  using Error::Error;
};

}  // namespace secgames
