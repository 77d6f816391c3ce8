#pragma once

#include <stdexcept>
#include <string>

namespace bridgeml {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, parameters or configuration: the caller asked for something invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The data itself is unusable: unreadable files, malformed content, empty inputs.
class DataError : public Error {
 public:
  using Error::Error;
};

class UnknownAttribute : public ConfigError {
 public:
  explicit UnknownAttribute(const std::string& name)
      : ConfigError("unknown attribute '" + name + "'") {}
};

class SchemaMismatch : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace bridgeml
