#pragma once

#include <stdexcept>
#include <string>

namespace stle {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (wrong field kind, k = 0, ...).
class ContractError : public Error {
  public:
    using Error::Error;
};

/// Malformed or physically inconsistent run configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A simulated coefficient became NaN/Inf; carries the offending step.
class BlowUpError : public Error {
  public:
    BlowUpError(const std::string& what, long step) : Error(what), step(step) {}
    long step;
};

}  // namespace stle
