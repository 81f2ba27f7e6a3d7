#pragma once

#include <stdexcept>
#include <string>

namespace lmd {

// Base class for domain errors raised by the library. Precondition violations
// on plain arguments use std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The event stream could not be read at all (missing header, I/O failure).
class UnreadableInputError : public Error {
 public:
  using Error::Error;
};

// A requested day has no login graph in the history.
class MissingGraphError : public Error {
 public:
  using Error::Error;
};

// Katz attenuation too large for the graph's spectral radius.
class DivergentAttenuationError : public Error {
 public:
  using Error::Error;
};

// Every evaluation iteration had zero novel systems.
class NoNovelSystemsError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration or schema mismatch in a structured file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lmd
