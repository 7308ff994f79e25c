#pragma once

#include <stdexcept>
#include <string>

namespace pidparse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Image bytes could not be decoded into a raster.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// A configuration or rule file is missing, malformed, or violates an invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pidparse
