#pragma once

#include <stdexcept>
#include <string>

namespace driftwin {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Period or index outside the available range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Column names that do not exist, duplicate names, type mismatches.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration; the message carries the offending field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A shift metric could not be computed on the given inputs.
class MetricError : public Error {
 public:
  using Error::Error;
};

// Model fitting is impossible, e.g. single-class labels.
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace driftwin
