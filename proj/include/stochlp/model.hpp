#ifndef STOCHLP_MODEL_HPP
#define STOCHLP_MODEL_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "stochlp/lp.hpp"
#include "stochlp/sparse.hpp"

namespace stochlp {

/// First-stage data: optimize c^T x + offset subject to A x (senses) b and
/// bounds.
struct FirstStage {
  Sense sense = Sense::Minimize;
  std::vector<double> c;
  double offset = 0.0;
  SparseMatrix A;
  std::vector<RowSense> row_senses;
  std::vector<double> b;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> col_names;
  std::vector<std::string> row_names;

  std::size_t cols() const noexcept { return c.size(); }
  std::size_t rows() const noexcept { return b.size(); }
};

/// Data shared by every scenario: the fixed recourse matrix W (r x m) and the
/// direction of the second-stage objective.
struct RecourseShape {
  Sense sense = Sense::Minimize;
  SparseMatrix W;
  std::vector<std::string> col_names;
  std::vector<std::string> row_names;

  std::size_t cols() const noexcept { return W.cols(); }
  std::size_t rows() const noexcept { return W.rows(); }
};

/// One realization of the second stage:
///
///   optimize q^T y  s.t.  T x + W y (senses) h,  lower <= y <= upper
///
/// Bounds live here rather than in the shape because data such as demand
/// limits commonly enters as scenario-specific variable bounds.
struct Scenario {
  double probability = 1.0;
  std::vector<double> q;
  SparseMatrix T;
  std::vector<double> h;
  std::vector<RowSense> row_senses;
  std::vector<double> lower;
  std::vector<double> upper;
  std::string name;
};

struct TwoStageProblem {
  FirstStage first;
  RecourseShape shape;
  std::vector<Scenario> scenarios;
  /// Non-fatal observations made while building (e.g. renormalized weights).
  std::vector<std::string> warnings;

  std::size_t first_cols() const noexcept { return first.cols(); }
  std::size_t second_cols() const noexcept { return shape.cols(); }
  std::size_t second_rows() const noexcept { return shape.rows(); }
  std::size_t num_scenarios() const noexcept { return scenarios.size(); }

  /// Sign mapping the declared first-stage objective to minimization.
  double first_sign() const noexcept { return first.sense == Sense::Minimize ? 1.0 : -1.0; }
  /// Sign mapping the declared second-stage objective to minimization.
  double second_sign() const noexcept { return shape.sense == Sense::Minimize ? 1.0 : -1.0; }
};

struct BuildOptions {
  /// Treat probabilities as relative weights and rescale them silently.
  /// Otherwise drift beyond 1e-6 is renormalized with a warning and drift
  /// beyond 0.1 is rejected.
  bool normalize_weights = false;
};

/// Checks every dimension against the shared shape, validates probabilities
/// and returns a problem whose probabilities sum to one.
TwoStageProblem build_problem(FirstStage first, RecourseShape shape, std::vector<Scenario> scenarios,
                              const BuildOptions& opts = {});

/// Extensive form over (x, y_1, ..., y_S). The objective carries the first
/// stage's declared sense; second-stage costs are converted to that sense and
/// weighted by probability. Scenario columns and rows are suffixed with the
/// 1-based scenario index.
LPInstance build_deterministic_equivalent(const TwoStageProblem& p);

/// Extensive form restricted to a single scenario with weight one.
LPInstance build_wait_and_see(const TwoStageProblem& p, std::size_t s);

/// Probability-weighted mean of q, T, h and the second-stage bounds (an
/// infinite bound stays infinite). Row senses must agree across scenarios.
Scenario expected_scenario(const std::vector<Scenario>& scenarios);

LPInstance build_expected_value_problem(const TwoStageProblem& p);

/// Second-stage LP of scenario s at a fixed first-stage point, in
/// minimization form: min (sign) q^T y s.t. W y (senses) h - T x.
LPInstance build_recourse_lp(const TwoStageProblem& p, std::size_t s, const std::vector<double>& x);

/// The first-stage LP on its own, in minimization form.
LPInstance build_first_stage_lp(const TwoStageProblem& p);

enum class Severity { Warning, Error };

struct Diagnostic {
  Severity severity = Severity::Warning;
  std::string message;
};

/// Structural checks on a possibly hand-assembled problem. An empty result
/// means the problem is clean.
std::vector<Diagnostic> validate(const TwoStageProblem& p);

}  // namespace stochlp

#endif  // STOCHLP_MODEL_HPP
