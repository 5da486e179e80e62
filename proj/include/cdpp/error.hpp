#pragma once

#include <stdexcept>
#include <string>

namespace cdpp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or an unsupported kernel/method/domain combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-convergence, rank collapse or a violated numerical invariant.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File-system and parse failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdpp
