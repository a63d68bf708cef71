#pragma once

#include <stdexcept>
#include <string>

namespace poe {

// Base of every error the harness raises. Context frames (instance id, step)
// are prepended as the error travels up, so `what()` reads outermost-first.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) {}

  const char* what() const noexcept override { return message_.c_str(); }

  void add_context(const std::string& frame) { message_ = frame + ": " + message_; }

 private:
  std::string message_;
};

// Input violates a documented precondition (bad instance, bad mask, NaN score).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// More options than there are symbol letters A..Z.
class UnsupportedSymbolRange : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Network / server-side failure. Retrying may help.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Backend cannot do what was asked (no logprobs, no generation).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Backend answered but the answer breaks the response contract.
class BackendContractError : public Error {
 public:
  using Error::Error;
};

// Dataset file could not be parsed.
class DataError : public Error {
 public:
  using Error::Error;
};

// Configuration or CLI usage error.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Every instance of a cell failed at the transport layer.
class SystemicBackendFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace poe
