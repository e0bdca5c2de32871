#pragma once

#include <stdexcept>
#include <string>

namespace incube {

// Base for every error raised by the library. Callers that only need to know
// "something went wrong" catch this; the CLI and service map subclasses to
// exit codes and HTTP statuses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text: event ids, numeric cells, delimited files, JSON.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A code, dimension, member or measure that does not exist.
class LookupError : public Error {
 public:
  using Error::Error;
};

// A structurally invalid cube query or OLAP operation (depth out of range,
// roll-up past the root, empty dice, ...).
class QueryError : public Error {
 public:
  using Error::Error;
};

// Mining thresholds or inputs outside their documented domain.
class MiningError : public Error {
 public:
  using Error::Error;
};

class SnapshotError : public Error {
 public:
  enum class Kind { kIo, kCorrupt, kVersionMismatch };

  SnapshotError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace incube
