#ifndef STOCHLP_PHEDGING_HPP
#define STOCHLP_PHEDGING_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "stochlp/exec.hpp"
#include "stochlp/lp.hpp"
#include "stochlp/model.hpp"
#include "stochlp/report.hpp"

namespace stochlp {

struct PhSubproblemResult {
  std::vector<double> x;
  std::vector<double> y;
  /// c^T x + q^T y (without the penalty terms), minimization form.
  double objective = 0.0;
};

enum class ProximalTerm { Quadratic, L1, LInf };

/// Scenario s with the augmented objective
///   c^T x + q^T y + rho^T (x - xi) + r/2 ||x - xi||^2
/// in minimization form. Throws InfeasibleScenario when the scenario has no
/// feasible (x, y).
PhSubproblemResult solve_ph_subproblem(const TwoStageProblem& p, std::size_t s, const std::vector<double>& xi,
                                       const std::vector<double>& rho, double r, const KernelConfig& kernel = {},
                                       ProximalTerm term = ProximalTerm::Quadratic);

/// xi = sum_s weights_s xs_s.
std::vector<double> aggregate_implementable(const std::vector<std::vector<double>>& xs,
                                            const std::vector<double>& weights);

/// rho_s + r (x_s - xi) for every scenario.
std::vector<std::vector<double>> update_multipliers(const std::vector<std::vector<double>>& rho,
                                                    const std::vector<std::vector<double>>& xs,
                                                    const std::vector<double>& xi, double r);

struct AdaptivePenalty {
  double zeta = 10.0;
  double increase = 2.0;
  double decrease = 0.5;
  /// The penalty is only adapted during the first `horizon` iterations; a
  /// penalty that keeps changing can keep the iteration from settling.
  std::size_t horizon = 100;
};

/// Residual balancing on the squared gaps: r grows when the consensus
/// violation (dual gap) exceeds zeta * r^2 * primal gap, shrinks when
/// r^2 * primal gap exceeds zeta * dual gap. Clamped to [1e-6, 1e8].
double update_penalty(double r, double primal_gap, double dual_gap, const AdaptivePenalty& rule);

struct PhState {
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<double>> ys;
  std::vector<double> xi;
  std::vector<std::vector<double>> rho;
  double r = 1.0;
  double primal_gap = 0.0;  // ||xi_k - xi_{k-1}||^2
  double dual_gap = 0.0;    // sum_s p_s ||x_s - xi_k||^2
  std::size_t iteration = 0;
};

struct PhConfig {
  bool adaptive = false;
  double penalty = 1.0;
  AdaptivePenalty rule;
  double primal_tolerance = 1e-5;
  double dual_tolerance = 1e-5;
  std::size_t max_iterations = 20000;
  ProximalTerm proximal = ProximalTerm::Quadratic;
  ExecConfig exec;
  KernelConfig kernel;
  /// Called after every iteration with the current state.
  std::function<void(const PhState&)> on_iteration;

  void check() const;
};

struct PhReport : SolveReport {
  PhState state;
  /// Objective of the implementable decision xi (first-stage sense), or NaN
  /// when xi is infeasible for the first stage or some scenario.
  double implementable_value = 0.0;
};

/// Progressive hedging. The objective is sum_s p_s (c^T x_s + q^T y_s) in
/// the declared first-stage sense; x in the report is xi.
PhReport solve_ph(const TwoStageProblem& p, const PhConfig& cfg = {});

}  // namespace stochlp

#endif  // STOCHLP_PHEDGING_HPP
