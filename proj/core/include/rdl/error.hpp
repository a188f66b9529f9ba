#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rdl {

enum class ErrorCode {
  kQuadratureNotConverged,
  kMainAssumptionViolated,
  kValueOutOfSupport,
  kInvalidModel,
  kGridTooCoarse,
  kCouplingOutOfRange,
  kMissingRobinData,
  kNoConvergence,
  kSingularMass,
  kProblemTooLarge,
  kShiftTooCloseToSpectrum,
  kGroundStateSignChange,
  kGroundStateVanishesOnBoundary,
  kWindowTooHigh,
  kWindowEmpty,
  kInsufficientEvents,
  kParseError,
  kValidationError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(int iterations, std::vector<double> residuals);

  int iterations() const noexcept { return iterations_; }
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  int iterations_;
  std::vector<double> residuals_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace rdl
