#pragma once

#include <stdexcept>
#include <string>

namespace scpnum {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Network construction failure that names the offending link or source id.
class NetworkError : public Error {
 public:
  NetworkError(const std::string& what, int id) : Error(what), id_(id) {}
  int id() const noexcept { return id_; }

 private:
  int id_;
};

class DuplicateId : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

class EmptyRoute : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

class UnknownLink : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

class NonPositiveCapacity : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

/// Utility or solver parameters outside their admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class NegativeTransformedRate : public Error {
 public:
  using Error::Error;
};

class NonPositiveExpansionPoint : public NetworkError {
 public:
  using NetworkError::NetworkError;
};

class MissingReport : public Error {
 public:
  using Error::Error;
};

class NoFeasiblePoint : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class InfeasibleCandidate : public Error {
 public:
  using Error::Error;
};

class DomainBoundary : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario document; `what()` carries line/column or field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed scenario that fails model validation; `what()` carries the field path.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace scpnum
