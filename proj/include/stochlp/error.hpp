#ifndef STOCHLP_ERROR_HPP
#define STOCHLP_ERROR_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stochlp {

enum class ErrorCode {
  DimensionMismatch,
  EmptyScenarioSet,
  NonPositiveProbability,
  ProbabilityDrift,
  IndexOutOfRange,
  InvalidArgument,
  NumericalBreakdown,
  UnsupportedQuadratic,
  ParseError,
  UnsupportedSection,
  TwoPeriodOnly,
  ScenarioExplosion,
  UnboundedSubproblem,
  MixedOutcome,
  NotInfeasible,
  MasterInfeasible,
  MasterUnbounded,
  InfeasibleScenario,
  FirstStageInfeasible,
  SecondStageInfeasible,
  BudgetExceeded,
  TooFewBatches,
  InternalConsistency,
  WorkerPanic,
  Deadlock,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a code so callers (and the
/// CLI exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> scenario = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        scenario_(scenario) {}

  ErrorCode code() const noexcept { return code_; }
  /// Scenario index the failure is attributed to, when there is one.
  std::optional<std::size_t> scenario() const noexcept { return scenario_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> scenario_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyScenarioSet: return "EmptyScenarioSet";
    case ErrorCode::NonPositiveProbability: return "NonPositiveProbability";
    case ErrorCode::ProbabilityDrift: return "ProbabilityDrift";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::UnsupportedQuadratic: return "UnsupportedQuadratic";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedSection: return "UnsupportedSection";
    case ErrorCode::TwoPeriodOnly: return "TwoPeriodOnly";
    case ErrorCode::ScenarioExplosion: return "ScenarioExplosion";
    case ErrorCode::UnboundedSubproblem: return "UnboundedSubproblem";
    case ErrorCode::MixedOutcome: return "MixedOutcome";
    case ErrorCode::NotInfeasible: return "NotInfeasible";
    case ErrorCode::MasterInfeasible: return "MasterInfeasible";
    case ErrorCode::MasterUnbounded: return "MasterUnbounded";
    case ErrorCode::InfeasibleScenario: return "InfeasibleScenario";
    case ErrorCode::FirstStageInfeasible: return "FirstStageInfeasible";
    case ErrorCode::SecondStageInfeasible: return "SecondStageInfeasible";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::TooFewBatches: return "TooFewBatches";
    case ErrorCode::InternalConsistency: return "InternalConsistency";
    case ErrorCode::WorkerPanic: return "WorkerPanic";
    case ErrorCode::Deadlock: return "Deadlock";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace stochlp

#endif  // STOCHLP_ERROR_HPP
