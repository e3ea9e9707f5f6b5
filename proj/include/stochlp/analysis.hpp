#ifndef STOCHLP_ANALYSIS_HPP
#define STOCHLP_ANALYSIS_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochlp/exec.hpp"
#include "stochlp/lp.hpp"
#include "stochlp/lshaped.hpp"
#include "stochlp/model.hpp"
#include "stochlp/report.hpp"
#include "stochlp/sampling.hpp"

namespace stochlp {

struct AnalysisConfig {
  /// The recourse problem is solved as an extensive form up to this many
  /// scenarios and by the L-shaped method beyond.
  std::size_t extensive_limit = 1000;
  LShapedConfig lshaped;
  ExecConfig exec;
  KernelConfig kernel;
};

/// Solves the extensive form in one LP. Method "dep".
SolveReport solve_extensive_form(const TwoStageProblem& p, const KernelConfig& kernel = {});

/// VRP with the solver picked by AnalysisConfig::extensive_limit.
SolveReport solve_vrp(const TwoStageProblem& p, const AnalysisConfig& cfg = {});

struct DecisionValue {
  /// c^T x + sum_s p_s Q_s(x) in the first-stage sense; +inf (or -inf for a
  /// maximization) when some scenario has no feasible recourse.
  double value = 0.0;
  bool finite = true;
  /// First scenario without a feasible recourse.
  std::optional<std::size_t> infeasible_scenario;
  /// Q_s(x) in the first-stage sense; +-inf for infeasible scenarios.
  std::vector<double> scenario_values;
};

/// Expected result of a fixed first-stage decision. Throws
/// FirstStageInfeasible when x violates the first stage by more than
/// kernel.feas_tol.
DecisionValue evaluate_decision(const TwoStageProblem& p, const std::vector<double>& x,
                                const AnalysisConfig& cfg = {});

/// Expected value of the wait-and-see problems, in the first-stage sense.
double ews(const TwoStageProblem& p, const AnalysisConfig& cfg = {});

/// Optimal first stage of the problem with every random entry replaced by
/// its expectation.
std::vector<double> expected_value_decision(const TwoStageProblem& p, const KernelConfig& kernel = {});

/// Value of the expected value decision (DecisionValue::value).
double eev(const TwoStageProblem& p, const AnalysisConfig& cfg = {});

struct MeasureResult {
  std::string measure;
  /// "exact" or "sampled".
  std::string mode = "exact";
  /// Reported value: clamped at 0 when the raw value lies in (-tol, 0).
  double value = 0.0;
  double raw = 0.0;
  bool clamped = false;
  bool infinite = false;
  /// Terms the measure is made of (e.g. "vrp", "eev").
  std::map<std::string, double> components;
  std::string solver;
  std::optional<ConfidenceReport> interval;
  std::vector<std::string> warnings;
};

/// EVPI and VSS are nonnegative in both senses: EVPI = |EWS - VRP| with the
/// sign chosen by the first-stage sense, VSS likewise for EEV - VRP. A raw
/// value below -1e-6 (1 + |VRP|) throws InternalConsistency.
MeasureResult evpi(const TwoStageProblem& p, const AnalysisConfig& cfg = {});
MeasureResult vss(const TwoStageProblem& p, const AnalysisConfig& cfg = {});

/// Exact-mode measure from its raw value: values in (-tol, 0) become 0 with
/// `clamped` set, values below -tol throw InternalConsistency, with
/// tol = 1e-6 (1 + |vrp|). Infinite values pass through.
MeasureResult clamp_measure(std::string name, double raw, double vrp);

/// All exact measures sharing one VRP solve.
struct MeasureSet {
  SolveReport vrp;
  double ews = 0.0;
  std::vector<double> ev_decision;
  DecisionValue eev;
  MeasureResult evpi;
  MeasureResult vss;
};

MeasureSet exact_measures(const TwoStageProblem& p, const AnalysisConfig& cfg = {});

struct SampledMeasures {
  SaaResult saa;
  MeasureResult vrp;
  MeasureResult evpi;
  MeasureResult vss;
};

/// Interval estimates of VRP, EVPI and VSS. VRP comes from saa_solve; EWS
/// and EEV are estimated on their own batches, and the measure intervals
/// combine the term intervals end to end (lo = lo_a - hi_b). A VSS interval
/// containing 0 adds the warning "VSS is not statistically significant".
SampledMeasures sampled_measures(const TwoStageProblem& model, const Sampler& sampler, const SaaConfig& cfg = {});

}  // namespace stochlp

#endif  // STOCHLP_ANALYSIS_HPP
