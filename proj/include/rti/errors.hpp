#pragma once

#include <stdexcept>
#include <string>

namespace rti {

/// Base class for all errors raised by the analysis.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Syntactically invalid input; carries a 1-based source position.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line(line),
        column(column) {}

  int line;
  int column;
};

/// A body atom refers to a predicate the program does not define.
class UnknownPredicateError : public Error {
public:
  using Error::Error;
};

/// Raised by the solver (iteration limit, unexpected equation shapes).
class SolveError : public Error {
public:
  using Error::Error;
};

/// Invariant violation; indicates a bug rather than bad input.
class InternalError : public Error {
public:
  using Error::Error;
};

} // namespace rti
