#pragma once

#include <stdexcept>
#include <string>

namespace smartroute {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: templates, hyperparameters, distributions, file schemas.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Domain value violates a precondition (amount <= 0, malformed request, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Feature schema / model schema disagreement.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// File or payload could not be read/parsed (truncation, bad magic, ...).
class IoError : public Error {
 public:
  using Error::Error;
};

// Lookup of an unregistered terminal, gateway or payment.
class UnknownEntityError : public Error {
 public:
  using Error::Error;
};

class NoEligibleTerminalsError : public Error {
 public:
  using Error::Error;
};

// Metric has no defined value for the given counts (e.g. tp+fp == 0).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace smartroute
