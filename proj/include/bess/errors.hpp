#pragma once

#include <stdexcept>
#include <string>

namespace bess {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number of the offending row.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, long line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Well-formed data that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent inputs while assembling the optimization model.
class BuildError : public Error {
 public:
  using Error::Error;
};

/// Independent recomputation disagrees with the solver.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Instance is too large for exhaustive enumeration.
class OracleRefusal : public Error {
 public:
  using Error::Error;
};

}  // namespace bess
