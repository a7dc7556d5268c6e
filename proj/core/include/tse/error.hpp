#pragma once

#include <stdexcept>
#include <string>

namespace tse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input text or binary data does not follow the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid combination of options or parameters (a caller mistake).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Lookup of a word that is not in the vocabulary or model.
class OovError : public Error {
 public:
  explicit OovError(const std::string& what) : Error("OOV: " + what) {}
};

}  // namespace tse
