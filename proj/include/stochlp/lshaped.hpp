#ifndef STOCHLP_LSHAPED_HPP
#define STOCHLP_LSHAPED_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "stochlp/exec.hpp"
#include "stochlp/lp.hpp"
#include "stochlp/model.hpp"
#include "stochlp/report.hpp"

namespace stochlp {

enum class CutKind { Optimality, Feasibility };

/// Half-space over the first stage, in minimization form:
///   optimality:  gradient . x + theta_a >= rhs
///   feasibility: gradient . x           >= rhs
struct Cut {
  CutKind kind = CutKind::Optimality;
  std::vector<double> gradient;
  double rhs = 0.0;
  /// Scenario indices aggregated into the cut (sorted).
  std::vector<std::size_t> source;
  /// Aggregate (theta slot) of an optimality cut.
  std::size_t aggregate = 0;
  std::size_t iteration = 0;

  /// Lower estimate of the aggregate's recourse cost at x.
  double value(const std::vector<double>& x) const;
};

/// Second-stage result for one scenario at a fixed first-stage point. Values
/// are in minimization form.
///
/// Feasible:   value = Q_s(x); duals lambda of W y ~ h - T x, and
///             bound_term = the column-bound part of the dual objective, so
///             Q_s(z) >= lambda^T (h - T z) + bound_term for every z.
/// Infeasible: value = w > 0, the least total violation of the rows; duals
///             and bound_term come from that auxiliary problem, so every z
///             with a feasible second stage has lambda^T (h - T z) + bound_term <= 0.
struct SubproblemOutcome {
  std::size_t scenario = 0;
  bool feasible = true;
  double value = 0.0;
  std::vector<double> duals;
  double bound_term = 0.0;
  std::vector<double> y;
  double wall_seconds = 0.0;
};

SubproblemOutcome solve_subproblem(const TwoStageProblem& p, std::size_t s, const std::vector<double>& x,
                                   const KernelConfig& kernel = {});

/// Weighted optimality cut over the given feasible outcomes, with
/// weights[k] the weight of outcomes[k].
Cut make_optimality_cut(const TwoStageProblem& p, const std::vector<SubproblemOutcome>& outcomes,
                        const std::vector<double>& weights);

Cut make_feasibility_cut(const TwoStageProblem& p, const SubproblemOutcome& outcome);

enum class CutMode { Single, Multi, Partial };

/// Contiguous scenario groups: single = one group, multi = one per scenario,
/// partial = ceil(S / bundle_size) groups of bundle_size (last one shorter).
std::vector<std::vector<std::size_t>> cut_groups(std::size_t scenarios, CutMode mode, std::size_t bundle_size);

/// One optimality cut per group over feasible outcomes (indexed by scenario).
std::vector<Cut> aggregate_cuts(const TwoStageProblem& p, const std::vector<SubproblemOutcome>& outcomes,
                                CutMode mode, std::size_t bundle_size);

enum class Regularization { None, TrustRegion, RegularizedDecomposition, Level };

struct LShapedConfig {
  CutMode cut_mode = CutMode::Multi;
  std::size_t bundle_size = 1;
  Regularization regularization = Regularization::None;
  /// Trust region; a nonpositive initial radius selects max(1, 0.1 |x0|_inf).
  double tr_radius = 0.0;
  double tr_max_radius = 1e6;
  double tr_factor = 2.0;
  double tr_accept = 1e-4;
  /// Regularized decomposition weight.
  double rd_sigma = 1.0;
  /// Level parameter in (0, 1).
  double level_lambda = 0.5;
  bool consolidate = false;
  std::size_t consolidation_threshold = 5;
  std::size_t consolidation_period = 10;
  double gap_tolerance = 1e-6;
  std::size_t max_iterations = 1000;
  double theta_min = -1e10;
  ExecConfig exec;
  KernelConfig kernel;
  /// Called with every cut the run generates (testing and tracing).
  std::function<void(const Cut&)> on_cut;

  void check() const;
};

std::string to_string(CutMode m);
std::string to_string(Regularization r);

/// Solves the problem by the L-shaped method. Gap: (U - L) / (1 + |U|) with
/// U the best evaluated objective and L the master value without any
/// regularization term.
SolveReport solve_lshaped(const TwoStageProblem& p, const LShapedConfig& cfg = {});

}  // namespace stochlp

#endif  // STOCHLP_LSHAPED_HPP
