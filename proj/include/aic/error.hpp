#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aic {

/// Base of every error raised by the library. Carries a stable kind tag so
/// the CLI and HTTP layers can map failures to exit codes and status codes.
class Error : public std::runtime_error {
 public:
  enum class Kind {
    kInvalidArgument,
    kInsufficientHistory,
    kParse,
    kDataIntegrity,
    kNotFound,
    kInvalidPrice,
    kConvergence,
    kNoRuleFired,
  };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error(Kind::kInvalidArgument, what) {}
};

struct InsufficientHistory : Error {
  explicit InsufficientHistory(const std::string& what)
      : Error(Kind::kInsufficientHistory, "insufficient history: " + what) {}
};

struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error(Kind::kParse, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct DataIntegrityError : Error {
  explicit DataIntegrityError(const std::string& what) : Error(Kind::kDataIntegrity, what) {}
};

struct NotFound : Error {
  explicit NotFound(const std::string& what) : Error(Kind::kNotFound, what + ": not found") {}
};

struct InvalidPrice : Error {
  explicit InvalidPrice(const std::string& what) : Error(Kind::kInvalidPrice, "invalid price: " + what) {}
};

/// Raised when an iterative solver stops at its iteration cap.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double residual)
      : Error(Kind::kConvergence, what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

struct NoRuleFired : Error {
  explicit NoRuleFired(const std::string& what) : Error(Kind::kNoRuleFired, "no rule fired: " + what) {}
};

/// Stable snake_case name of an error kind.
inline const char* kind_name(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::kInvalidArgument: return "invalid_argument";
    case Error::Kind::kInsufficientHistory: return "insufficient_history";
    case Error::Kind::kParse: return "parse_error";
    case Error::Kind::kDataIntegrity: return "data_integrity";
    case Error::Kind::kNotFound: return "not_found";
    case Error::Kind::kInvalidPrice: return "invalid_price";
    case Error::Kind::kConvergence: return "convergence";
    case Error::Kind::kNoRuleFired: return "no_rule_fired";
  }
  return "error";
}

}  // namespace aic
