#include "rdl/error.hpp"

#include <sstream>

namespace rdl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kQuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::kMainAssumptionViolated: return "MainAssumptionViolated";
    case ErrorCode::kValueOutOfSupport: return "ValueOutOfSupport";
    case ErrorCode::kInvalidModel: return "InvalidModel";
    case ErrorCode::kGridTooCoarse: return "GridTooCoarse";
    case ErrorCode::kCouplingOutOfRange: return "CouplingOutOfRange";
    case ErrorCode::kMissingRobinData: return "MissingRobinData";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kSingularMass: return "SingularMass";
    case ErrorCode::kProblemTooLarge: return "ProblemTooLarge";
    case ErrorCode::kShiftTooCloseToSpectrum: return "ShiftTooCloseToSpectrum";
    case ErrorCode::kGroundStateSignChange: return "GroundStateSignChange";
    case ErrorCode::kGroundStateVanishesOnBoundary: return "GroundStateVanishesOnBoundary";
    case ErrorCode::kWindowTooHigh: return "WindowTooHigh";
    case ErrorCode::kWindowEmpty: return "WindowEmpty";
    case ErrorCode::kInsufficientEvents: return "InsufficientEvents";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

std::string describe_residuals(int iterations, const std::vector<double>& residuals) {
  std::ostringstream os;
  os << "no convergence after " << iterations << " iterations; residuals [";
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    os << (i ? ", " : "") << residuals[i];
  }
  os << "]";
  return os.str();
}

std::string join_violations(const std::vector<std::string>& violations) {
  std::string out = std::to_string(violations.size()) + " violation(s)";
  for (const auto& v : violations) out += "\n  - " + v;
  return out;
}

}  // namespace

NoConvergenceError::NoConvergenceError(int iterations, std::vector<double> residuals)
    : Error(ErrorCode::kNoConvergence, describe_residuals(iterations, residuals)),
      iterations_(iterations),
      residuals_(std::move(residuals)) {}

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(ErrorCode::kValidationError, join_violations(violations)),
      violations_(std::move(violations)) {}

}  // namespace rdl
