#ifndef STOCHLP_REPORT_HPP
#define STOCHLP_REPORT_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "stochlp/exec.hpp"

namespace stochlp {

enum class RunStatus { Optimal, IterationLimit, Infeasible, Unbounded };

std::string to_string(RunStatus s);

/// One row of an iteration trace. Fields that a method does not use stay 0.
struct IterationRecord {
  std::size_t iteration = 0;
  double lower = 0.0;  // -inf until every aggregate has a cut
  double upper = 0.0;
  double gap = 0.0;
  std::size_t cuts_added = 0;
  /// Regularization data: distance of the candidate from the center and the
  /// radius (trust region) or weight (regularized decomposition) used.
  double step = 0.0;
  double radius = 0.0;
  double primal_gap = 0.0;
  double dual_gap = 0.0;
  double penalty = 0.0;
  double objective = 0.0;
  double wall_seconds = 0.0;
};

/// Outcome of solving a two-stage problem. The objective is in the declared
/// sense of the first stage; recourse values are in the declared sense of the
/// second stage.
struct SolveReport {
  std::string method;
  RunStatus status = RunStatus::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> recourse_values;
  std::vector<std::vector<double>> recourse;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  std::vector<IterationRecord> trace;
  double wall_seconds = 0.0;
  std::vector<std::string> notes;
  /// Filled by async runs.
  AsyncStats async;
};

}  // namespace stochlp

#endif  // STOCHLP_REPORT_HPP
