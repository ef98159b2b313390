#pragma once

#include <stdexcept>
#include <string>

namespace adinfer {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed network/evidence/spec document. Carries 1-based line and column
// when the failure can be located in the source text (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0,
             std::size_t column = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ")"
                   : what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A well-formed document violates a network invariant (cycle, row sum,
// table dimension, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Unknown node, value, network or session.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Observed evidence has probability zero under the model.
class ImpossibleEvidenceError : public Error {
 public:
  using Error::Error;
};

// Re-observation of a node with a different value, or evidence on a node
// that cannot carry it (e.g. a cutset member).
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Bad argument to an operation (empty cutset, zero retained instances, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace adinfer
