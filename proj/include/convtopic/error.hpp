#ifndef CONVTOPIC_ERROR_HPP
#define CONVTOPIC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace convtopic {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (bad JSON, missing fields).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but structurally inconsistent (dangling reply links).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or precondition violation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Bad configuration (unknown keys, missing model files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace convtopic

#endif  // CONVTOPIC_ERROR_HPP
