#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace archevo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document. `offset` is the byte position reported by the
/// JSON reader (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed input that breaks a model or payload invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (bounds, weights, schedule sizes...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Feedback that does not match what was shown at the current stop.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ReplayError : public Error {
 public:
  using Error::Error;
};

}  // namespace archevo
