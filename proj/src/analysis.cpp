#include "stochlp/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "stochlp/error.hpp"

namespace stochlp {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double first_stage_cost(const TwoStageProblem& p, const std::vector<double>& x) {
  return p.first.offset + dot(p.first.c, x);
}

RunStatus run_status(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return RunStatus::Optimal;
    case SolveStatus::Infeasible: return RunStatus::Infeasible;
    case SolveStatus::Unbounded: return RunStatus::Unbounded;
    case SolveStatus::IterationLimit: break;
  }
  return RunStatus::IterationLimit;
}

void require_optimal(const SolveReport& r, const std::string& what) {
  switch (r.status) {
    case RunStatus::Optimal: return;
    case RunStatus::Infeasible: throw Error(ErrorCode::MasterInfeasible, what + " is infeasible");
    case RunStatus::Unbounded: throw Error(ErrorCode::MasterUnbounded, what + " is unbounded");
    case RunStatus::IterationLimit: break;
  }
  throw Error(ErrorCode::NumericalBreakdown, what + " stopped at the iteration limit");
}

}  // namespace

// Measures are nonnegative theorems; small negative values are rounding.
MeasureResult clamp_measure(std::string name, double raw, double vrp) {
  MeasureResult m;
  m.measure = std::move(name);
  m.raw = raw;
  m.value = raw;
  if (std::isinf(raw)) {
    m.infinite = true;
    return m;
  }
  const double tol = 1e-6 * (1.0 + std::abs(vrp));
  if (raw < -tol) {
    throw Error(ErrorCode::InternalConsistency,
                m.measure + " = " + std::to_string(raw) + " is negative beyond the tolerance " + std::to_string(tol));
  }
  if (raw < 0.0) {
    m.value = 0.0;
    m.clamped = true;
  }
  return m;
}

SolveReport solve_extensive_form(const TwoStageProblem& p, const KernelConfig& kernel) {
  const auto t0 = std::chrono::steady_clock::now();
  const LPInstance lp = build_deterministic_equivalent(p);
  const LPSolution sol = solve_lp(lp, kernel);
  SolveReport r;
  r.method = "dep";
  r.status = run_status(sol.status);
  r.iterations = sol.iterations;
  if (sol.status == SolveStatus::Optimal) {
    const std::size_t n = p.first_cols();
    const std::size_t m = p.second_cols();
    r.objective = sol.objective;
    r.x.assign(sol.primal.begin(), sol.primal.begin() + static_cast<std::ptrdiff_t>(n));
    for (std::size_t s = 0; s < p.num_scenarios(); ++s) {
      const auto begin = sol.primal.begin() + static_cast<std::ptrdiff_t>(n + s * m);
      std::vector<double> y(begin, begin + static_cast<std::ptrdiff_t>(m));
      r.recourse_values.push_back(dot(p.scenarios[s].q, y));
      r.recourse.push_back(std::move(y));
    }
    r.lower_bound = r.upper_bound = r.objective;
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

SolveReport solve_vrp(const TwoStageProblem& p, const AnalysisConfig& cfg) {
  if (p.num_scenarios() <= cfg.extensive_limit) return solve_extensive_form(p, cfg.kernel);
  LShapedConfig lc = cfg.lshaped;
  lc.exec = cfg.exec;
  lc.kernel = cfg.kernel;
  return solve_lshaped(p, lc);
}

DecisionValue evaluate_decision(const TwoStageProblem& p, const std::vector<double>& x, const AnalysisConfig& cfg) {
  if (x.size() != p.first_cols()) {
    throw Error(ErrorCode::DimensionMismatch, "decision has " + std::to_string(x.size()) + " entries, the first stage " +
                                                  std::to_string(p.first_cols()));
  }
  const double violation = build_first_stage_lp(p).max_violation(x);
  if (violation > cfg.kernel.feas_tol) {
    throw Error(ErrorCode::FirstStageInfeasible,
                "decision violates the first stage by " + std::to_string(violation));
  }
  Executor ex(cfg.exec);
  const auto wave = ex.run_wave<SubproblemOutcome>(
      0, p.num_scenarios(), [&](std::size_t s) { return solve_subproblem(p, s, x, cfg.kernel); });

  const double sign = p.first_sign();
  DecisionValue out;
  out.scenario_values.assign(p.num_scenarios(), 0.0);
  double total = sign * first_stage_cost(p, x);  // minimization form
  for (const auto& e : wave) {
    const SubproblemOutcome& o = e.payload;
    if (!o.feasible) {
      out.scenario_values[e.item] = sign * kInfinity;
      if (!out.infeasible_scenario || e.item < *out.infeasible_scenario) out.infeasible_scenario = e.item;
      continue;
    }
    out.scenario_values[e.item] = sign * o.value;
    total += p.scenarios[e.item].probability * o.value;
  }
  out.finite = !out.infeasible_scenario.has_value();
  out.value = out.finite ? sign * total : sign * kInfinity;
  return out;
}

double ews(const TwoStageProblem& p, const AnalysisConfig& cfg) {
  Executor ex(cfg.exec);
  const auto wave = ex.run_wave<double>(0, p.num_scenarios(), [&](std::size_t s) {
    const LPSolution sol = solve_lp(build_wait_and_see(p, s), cfg.kernel);
    if (sol.status == SolveStatus::Infeasible) {
      throw Error(ErrorCode::InfeasibleScenario, "wait-and-see problem of scenario " + std::to_string(s) + " is infeasible", s);
    }
    if (sol.status == SolveStatus::Unbounded) {
      throw Error(ErrorCode::UnboundedSubproblem, "wait-and-see problem of scenario " + std::to_string(s) + " is unbounded", s);
    }
    if (sol.status != SolveStatus::Optimal) {
      throw Error(ErrorCode::NumericalBreakdown, "wait-and-see problem of scenario " + std::to_string(s) + " hit the iteration limit", s);
    }
    return sol.objective;
  });
  double total = 0.0;
  for (const auto& e : wave) total += p.scenarios[e.item].probability * e.payload;
  return total;
}

std::vector<double> expected_value_decision(const TwoStageProblem& p, const KernelConfig& kernel) {
  const LPSolution sol = solve_lp(build_expected_value_problem(p), kernel);
  if (sol.status == SolveStatus::Infeasible) {
    throw Error(ErrorCode::SecondStageInfeasible, "the expected value problem is infeasible");
  }
  if (sol.status == SolveStatus::Unbounded) throw Error(ErrorCode::UnboundedSubproblem, "the expected value problem is unbounded");
  if (sol.status != SolveStatus::Optimal) throw Error(ErrorCode::NumericalBreakdown, "the expected value problem hit the iteration limit");
  return {sol.primal.begin(), sol.primal.begin() + static_cast<std::ptrdiff_t>(p.first_cols())};
}

double eev(const TwoStageProblem& p, const AnalysisConfig& cfg) {
  return evaluate_decision(p, expected_value_decision(p, cfg.kernel), cfg).value;
}

MeasureSet exact_measures(const TwoStageProblem& p, const AnalysisConfig& cfg) {
  MeasureSet m;
  m.vrp = solve_vrp(p, cfg);
  require_optimal(m.vrp, "the recourse problem");
  const double sign = p.first_sign();
  const double vrp = m.vrp.objective;
  m.ews = ews(p, cfg);
  m.ev_decision = expected_value_decision(p, cfg.kernel);
  m.eev = evaluate_decision(p, m.ev_decision, cfg);

  m.evpi = clamp_measure("evpi", sign * (vrp - m.ews), vrp);
  m.evpi.components = {{"vrp", vrp}, {"ews", m.ews}};
  m.evpi.solver = m.vrp.method;

  m.vss = clamp_measure("vss", m.eev.finite ? sign * (m.eev.value - vrp) : kInfinity, vrp);
  m.vss.components = {{"vrp", vrp}, {"eev", m.eev.value}};
  m.vss.solver = m.vrp.method;
  if (!m.eev.finite) {
    m.vss.warnings.push_back("the expected value decision has no feasible recourse in scenario " +
                             std::to_string(*m.eev.infeasible_scenario) + ", so EEV and VSS are infinite");
  }
  return m;
}

MeasureResult evpi(const TwoStageProblem& p, const AnalysisConfig& cfg) {
  SolveReport vrp = solve_vrp(p, cfg);
  require_optimal(vrp, "the recourse problem");
  const double e = ews(p, cfg);
  MeasureResult m = clamp_measure("evpi", p.first_sign() * (vrp.objective - e), vrp.objective);
  m.components = {{"vrp", vrp.objective}, {"ews", e}};
  m.solver = vrp.method;
  return m;
}

MeasureResult vss(const TwoStageProblem& p, const AnalysisConfig& cfg) {
  SolveReport vrp = solve_vrp(p, cfg);
  require_optimal(vrp, "the recourse problem");
  const DecisionValue ev = evaluate_decision(p, expected_value_decision(p, cfg.kernel), cfg);
  MeasureResult m =
      clamp_measure("vss", ev.finite ? p.first_sign() * (ev.value - vrp.objective) : kInfinity, vrp.objective);
  m.components = {{"vrp", vrp.objective}, {"eev", ev.value}};
  m.solver = vrp.method;
  if (!ev.finite) {
    m.warnings.push_back("the expected value decision has no feasible recourse in scenario " +
                         std::to_string(*ev.infeasible_scenario) + ", so EEV and VSS are infinite");
  }
  return m;
}

namespace {

// Intervals below are in minimization form; `sign` maps to and from the
// first-stage sense.
ConfidenceReport to_min_form(ConfidenceReport c, double sign) {
  if (sign < 0) {
    c.point = -c.point;
    std::swap(c.lo, c.hi);
    c.lo = -c.lo;
    c.hi = -c.hi;
  }
  return c;
}

ConfidenceReport difference(const ConfidenceReport& a, const ConfidenceReport& b) {
  ConfidenceReport d;
  d.point = a.point - b.point;
  d.lo = a.lo - b.hi;
  d.hi = a.hi - b.lo;
  d.level = a.level;
  d.n = a.n;
  d.batches = a.batches;
  d.relative_error = relative_width(d.lo, d.hi, d.point);
  return d;
}

MeasureResult sampled_measure(std::string name, const ConfidenceReport& c) {
  MeasureResult m;
  m.measure = std::move(name);
  m.mode = "sampled";
  m.value = m.raw = c.point;
  m.infinite = std::isinf(c.point) || std::isinf(c.hi);
  m.interval = c;
  m.solver = "saa";
  return m;
}

}  // namespace

SampledMeasures sampled_measures(const TwoStageProblem& model, const Sampler& sampler, const SaaConfig& cfg) {
  cfg.check();
  SampledMeasures out;
  out.saa = saa_solve(model, sampler, cfg);
  const double sign = model.first_sign();
  const std::size_t n = out.saa.n;
  AnalysisConfig ac;
  ac.exec = cfg.exec;
  ac.kernel = cfg.kernel;

  // Sub-stream ids far above the SAA rounds keep these batches independent.
  constexpr std::uint64_t kEws = 1u << 20;
  constexpr std::uint64_t kEv = kEws + 1;
  constexpr std::uint64_t kEev = kEws + 2;

  std::vector<double> ews_values;
  for (std::size_t b = 0; b < cfg.batches; ++b) {
    const TwoStageProblem inst = sample_instance(model, sampler, n, derive_seed(cfg.seed, kEws, b));
    ews_values.push_back(sign * ews(inst, ac));
  }
  ConfidenceReport ews_ci = confidence_interval(ews_values, cfg.confidence);
  ews_ci.n = n;

  const TwoStageProblem ev_sample = sample_instance(model, sampler, cfg.eval_samples, derive_seed(cfg.seed, kEv));
  const std::vector<double> x_bar = expected_value_decision(ev_sample, cfg.kernel);
  const TwoStageProblem eev_sample = sample_instance(model, sampler, cfg.eval_samples, derive_seed(cfg.seed, kEev));
  const DecisionValue dv = evaluate_decision(eev_sample, x_bar, ac);
  ConfidenceReport eev_ci;
  if (dv.finite) {
    std::vector<double> totals;
    const double cx = first_stage_cost(model, x_bar);
    for (double q : dv.scenario_values) totals.push_back(sign * (cx + q));
    eev_ci = confidence_interval(totals, cfg.confidence);
  } else {
    eev_ci.point = eev_ci.lo = eev_ci.hi = kInfinity;
    eev_ci.level = cfg.confidence;
    eev_ci.relative_error = kInfinity;
  }
  eev_ci.n = cfg.eval_samples;
  eev_ci.batches = 1;

  const ConfidenceReport vrp_ci = to_min_form(out.saa.interval, sign);
  out.vrp = sampled_measure("vrp", out.saa.interval);
  out.vrp.components = {{"batch_mean", out.saa.batch.point}, {"incumbent", out.saa.incumbent.point}};

  out.evpi = sampled_measure("evpi", difference(vrp_ci, ews_ci));
  out.evpi.components = {{"vrp", out.saa.interval.point}, {"ews", sign * ews_ci.point}};

  ConfidenceReport vss_ci = difference(eev_ci, vrp_ci);
  out.vss = sampled_measure("vss", vss_ci);
  out.vss.components = {{"vrp", out.saa.interval.point}, {"eev", sign * eev_ci.point}};
  if (!dv.finite) {
    out.vss.warnings.push_back("the expected value decision has no feasible recourse in a sampled scenario, so EEV and VSS are infinite");
  } else if (vss_ci.lo <= 0.0 && 0.0 <= vss_ci.hi) {
    out.vss.warnings.push_back("VSS is not statistically significant at the requested confidence level");
  }
  if (out.saa.budget_exceeded) {
    out.vrp.warnings.push_back("sample size budget exhausted before the relative tolerance was met");
  }
  return out;
}

}  // namespace stochlp
