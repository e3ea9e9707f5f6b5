#include "stochlp/phedging.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "stochlp/error.hpp"
#include "stochlp/lshaped.hpp"

namespace stochlp {

void PhConfig::check() const {
  if (!(penalty > 0.0)) throw Error(ErrorCode::ConfigError, "penalty must be positive");
  if (adaptive && !(rule.increase > 1.0 && rule.decrease > 0.0 && rule.decrease < 1.0)) {
    throw Error(ErrorCode::ConfigError, "adaptive penalty needs increase > 1 > decrease > 0");
  }
  if (adaptive && !(rule.zeta > 0.0)) throw Error(ErrorCode::ConfigError, "balancing factor must be positive");
  if (!(primal_tolerance >= 0.0 && dual_tolerance >= 0.0)) throw Error(ErrorCode::ConfigError, "gap tolerances must be nonnegative");
  exec.check();
}

namespace {

// Wait-and-see problem of scenario s over (x, y) in minimization form.
LPInstance scenario_lp(const TwoStageProblem& p, std::size_t s) {
  LPInstance lp = build_wait_and_see(p, s);
  if (lp.sense == Sense::Maximize) {
    for (double& c : lp.objective) c = -c;
    lp.objective_offset = -lp.objective_offset;
    lp.sense = Sense::Minimize;
  }
  return lp;
}

PhSubproblemResult unpack(const TwoStageProblem& p, const LPInstance& base, const std::vector<double>& primal) {
  const std::size_t n = p.first_cols();
  const std::size_t m = p.second_cols();
  PhSubproblemResult out;
  out.x.assign(primal.begin(), primal.begin() + static_cast<std::ptrdiff_t>(n));
  out.y.assign(primal.begin() + static_cast<std::ptrdiff_t>(n), primal.begin() + static_cast<std::ptrdiff_t>(n + m));
  out.objective = base.objective_offset;
  for (std::size_t j = 0; j < n + m; ++j) out.objective += base.objective[j] * primal[j];
  return out;
}

[[noreturn]] void infeasible(std::size_t s) {
  throw Error(ErrorCode::InfeasibleScenario,
              "scenario " + std::to_string(s) +
                  " has no feasible first- and second-stage pair; progressive hedging cannot recover from this, "
                  "use the L-shaped method whose feasibility cuts handle it",
              s);
}

PhSubproblemResult wait_and_see(const TwoStageProblem& p, std::size_t s, const KernelConfig& kernel) {
  const LPInstance lp = scenario_lp(p, s);
  const LPSolution sol = solve_lp(lp, kernel);
  if (sol.status == SolveStatus::Infeasible) infeasible(s);
  if (sol.status == SolveStatus::Unbounded) {
    throw Error(ErrorCode::UnboundedSubproblem, "wait-and-see problem of scenario " + std::to_string(s) + " is unbounded", s);
  }
  if (sol.status != SolveStatus::Optimal) throw Error(ErrorCode::NumericalBreakdown, "iteration limit", s);
  return unpack(p, lp, sol.primal);
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d += (a[j] - b[j]) * (a[j] - b[j]);
  return d;
}

}  // namespace

PhSubproblemResult solve_ph_subproblem(const TwoStageProblem& p, std::size_t s, const std::vector<double>& xi,
                                       const std::vector<double>& rho, double r, const KernelConfig& kernel,
                                       ProximalTerm term) {
  const std::size_t n = p.first_cols();
  if (xi.size() != n || rho.size() != n) throw Error(ErrorCode::DimensionMismatch, "xi and rho need one entry per first-stage variable", s);
  const LPInstance base = scenario_lp(p, s);
  LPInstance qp = base;
  qp.quadratic.assign(base.cols(), 0.0);
  qp.center.assign(base.cols(), 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    qp.objective[j] += rho[j];
    qp.objective_offset -= rho[j] * xi[j];
    qp.quadratic[j] = r;
    qp.center[j] = xi[j];
  }
  LPSolution sol;
  if (term == ProximalTerm::Quadratic) {
    sol = solve_qp_diagonal(qp, kernel);
  } else {
    sol = solve_lp(linearize_penalty(qp, term == ProximalTerm::L1 ? PenaltyNorm::L1 : PenaltyNorm::LInf), kernel);
  }
  if (sol.status == SolveStatus::Infeasible) infeasible(s);
  if (sol.status == SolveStatus::Unbounded) {
    throw Error(ErrorCode::UnboundedSubproblem, "proximal problem of scenario " + std::to_string(s) + " is unbounded", s);
  }
  if (sol.status != SolveStatus::Optimal) {
    throw Error(ErrorCode::NumericalBreakdown, "proximal problem of scenario " + std::to_string(s) + " did not converge (status " + std::to_string(static_cast<int>(sol.status)) + ", " + std::to_string(sol.iterations) + " iterations)", s);
  }
  return unpack(p, base, sol.primal);
}

std::vector<double> aggregate_implementable(const std::vector<std::vector<double>>& xs,
                                            const std::vector<double>& weights) {
  if (xs.size() != weights.size()) throw Error(ErrorCode::DimensionMismatch, "one weight per scenario decision");
  if (xs.empty()) return {};
  std::vector<double> xi(xs.front().size(), 0.0);
  for (std::size_t s = 0; s < xs.size(); ++s) {
    if (xs[s].size() != xi.size()) throw Error(ErrorCode::DimensionMismatch, "scenario decisions differ in length", s);
    for (std::size_t j = 0; j < xi.size(); ++j) xi[j] += weights[s] * xs[s][j];
  }
  return xi;
}

std::vector<std::vector<double>> update_multipliers(const std::vector<std::vector<double>>& rho,
                                                    const std::vector<std::vector<double>>& xs,
                                                    const std::vector<double>& xi, double r) {
  if (rho.size() != xs.size()) throw Error(ErrorCode::DimensionMismatch, "one multiplier vector per scenario");
  std::vector<std::vector<double>> out = rho;
  for (std::size_t s = 0; s < xs.size(); ++s) {
    if (rho[s].size() != xi.size() || xs[s].size() != xi.size()) {
      throw Error(ErrorCode::DimensionMismatch, "multiplier length mismatch", s);
    }
    for (std::size_t j = 0; j < xi.size(); ++j) out[s][j] += r * (xs[s][j] - xi[j]);
  }
  return out;
}

double update_penalty(double r, double primal_gap, double dual_gap, const AdaptivePenalty& rule) {
  // Residual balancing: the consensus violation (dual gap) is weighed
  // against the movement of xi scaled by the penalty, r^2 * primal gap.
  const double movement = r * r * primal_gap;
  double next = r;
  if (dual_gap > rule.zeta * movement) {
    next = r * rule.increase;
  } else if (movement > rule.zeta * dual_gap) {
    next = r * rule.decrease;
  }
  return std::clamp(next, 1e-6, 1e8);
}

PhReport solve_ph(const TwoStageProblem& p, const PhConfig& cfg) {
  cfg.check();
  if (p.num_scenarios() == 0) throw Error(ErrorCode::EmptyScenarioSet, "no scenarios");
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t S = p.num_scenarios();
  const std::size_t n = p.first_cols();
  std::vector<double> pi(S);
  for (std::size_t s = 0; s < S; ++s) pi[s] = p.scenarios[s].probability;

  PhReport report;
  report.method = "ph";
  if (cfg.exec.mode == ExecMode::Async) {
    report.notes.push_back("async execution runs progressive hedging as synchronous waves");
  }
  ExecConfig exec = cfg.exec;
  if (exec.mode == ExecMode::Async) exec.mode = ExecMode::Sync;
  Executor ex(exec);

  PhState st;
  st.r = cfg.penalty;
  std::vector<double> objectives(S);
  auto collect = [&](const std::vector<ResultEnvelope<PhSubproblemResult>>& wave) {
    st.xs.resize(S);
    st.ys.resize(S);
    for (const auto& e : wave) {
      st.xs[e.item] = e.payload.x;
      st.ys[e.item] = e.payload.y;
      objectives[e.item] = e.payload.objective;
    }
  };
  collect(ex.run_wave<PhSubproblemResult>(0, S, [&](std::size_t s) { return wait_and_see(p, s, cfg.kernel); }));
  st.xi = aggregate_implementable(st.xs, pi);
  st.rho.assign(S, std::vector<double>(n, 0.0));

  bool converged = false;
  while (st.iteration < cfg.max_iterations) {
    ++st.iteration;
    st.rho = update_multipliers(st.rho, st.xs, st.xi, st.r);
    const std::vector<double> xi = st.xi;
    const std::vector<std::vector<double>> rho = st.rho;
    const double r = st.r;
    collect(ex.run_wave<PhSubproblemResult>(st.iteration, S, [&](std::size_t s) {
      return solve_ph_subproblem(p, s, xi, rho[s], r, cfg.kernel, cfg.proximal);
    }));
    st.xi = aggregate_implementable(st.xs, pi);
    st.primal_gap = sq_dist(st.xi, xi);
    st.dual_gap = 0.0;
    for (std::size_t s = 0; s < S; ++s) st.dual_gap += pi[s] * sq_dist(st.xs[s], st.xi);

    IterationRecord rec;
    rec.iteration = st.iteration;
    rec.primal_gap = st.primal_gap;
    rec.dual_gap = st.dual_gap;
    rec.penalty = st.r;
    for (std::size_t s = 0; s < S; ++s) rec.objective += pi[s] * objectives[s];
    rec.objective *= p.first_sign();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.trace.push_back(rec);
    if (cfg.on_iteration) cfg.on_iteration(st);

    if (st.primal_gap <= cfg.primal_tolerance && st.dual_gap <= cfg.dual_tolerance) {
      converged = true;
      break;
    }
    if (cfg.adaptive && st.iteration <= cfg.rule.horizon) st.r = update_penalty(st.r, st.primal_gap, st.dual_gap, cfg.rule);
  }

  report.status = converged ? RunStatus::Optimal : RunStatus::IterationLimit;
  report.iterations = st.iteration;
  report.objective = 0.0;
  for (std::size_t s = 0; s < S; ++s) report.objective += pi[s] * objectives[s];
  report.objective *= p.first_sign();
  report.x = st.xi;
  report.recourse = st.ys;
  for (std::size_t s = 0; s < S; ++s) {
    double q = 0.0;
    for (std::size_t j = 0; j < st.ys[s].size(); ++j) q += p.scenarios[s].q[j] * st.ys[s][j];
    report.recourse_values.push_back(q);
  }

  // xi itself may be infeasible before consensus is exact
  report.implementable_value = std::numeric_limits<double>::quiet_NaN();
  if (build_first_stage_lp(p).max_violation(st.xi) <= cfg.kernel.feas_tol * 10) {
    double v = p.first_sign() * p.first.offset;
    for (std::size_t j = 0; j < n; ++j) v += p.first_sign() * p.first.c[j] * st.xi[j];
    bool ok = true;
    for (std::size_t s = 0; s < S && ok; ++s) {
      const SubproblemOutcome o = solve_subproblem(p, s, st.xi, cfg.kernel);
      ok = o.feasible;
      v += pi[s] * o.value;
    }
    if (ok) report.implementable_value = p.first_sign() * v;
  }
  report.upper_bound = report.lower_bound = report.objective;
  report.gap = std::max(st.primal_gap, st.dual_gap);
  report.state = std::move(st);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace stochlp
