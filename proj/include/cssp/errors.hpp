#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cssp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter violates an operation's precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The input is well-formed but degenerate for the requested operation
/// (all-zero matrix, zero denominator, empty distribution).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// An underlying factorization failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// An internal algorithm invariant was violated. Always a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed file contents, with a 1-based location where known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t col = 0)
      : Error(row == 0 ? what
                       : what + " (row " + std::to_string(row) +
                             (col == 0 ? "" : ", column " + std::to_string(col)) + ")"),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

}  // namespace cssp
