#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kdc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// malformed or inconsistent data (bad genotype values, size mismatches, ...)
struct InvalidInput : Error {
  using Error::Error;
};

// a parameter outside its documented domain (rho <= 0, degree < 1, ...)
struct InvalidParameter : Error {
  using Error::Error;
};

struct RankDeficient : Error {
  using Error::Error;
};

struct DegenerateFit : Error {
  using Error::Error;
};

struct TooFewSamples : Error {
  using Error::Error;
};

struct TooLarge : Error {
  using Error::Error;
};

// bad command-line usage (unknown kernel spec, unknown study, ...)
struct UsageError : Error {
  using Error::Error;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0,
                      std::size_t column = 0)
      : Error(decorate(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string decorate(const std::string& what, std::size_t line,
                              std::size_t column) {
    if (line == 0) return what;
    std::string msg = what + " (line " + std::to_string(line);
    if (column > 0) msg += ", column " + std::to_string(column);
    return msg + ")";
  }

  std::size_t line_;
  std::size_t column_;
};

}  // namespace kdc
