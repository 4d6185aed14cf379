#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drhai {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed formula text or KB document. Line and column are 1-based; a
/// column of 0 means the error concerns the whole line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class DuplicateFormulaError : public ParseError {
 public:
  DuplicateFormulaError(const std::string& what, std::size_t line,
                        std::size_t first_line)
      : ParseError(what, line, 0), first_line_(first_line) {}

  std::size_t first_line() const { return first_line_; }

 private:
  std::size_t first_line_;
};

/// An operation was called outside its contract (e.g. find_mus on a
/// satisfiable input).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A solver call ran out of its conflict or time allowance. Never conflated
/// with an unsatisfiable answer.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Dialogue-protocol violation: illegal move, wrong agent, terminated
/// dialogue.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace drhai
