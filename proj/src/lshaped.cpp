#include "stochlp/lshaped.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "stochlp/error.hpp"

namespace stochlp {

double Cut::value(const std::vector<double>& x) const {
  double v = rhs;
  for (std::size_t j = 0; j < gradient.size(); ++j) v -= gradient[j] * x[j];
  return v;
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Optimal: return "optimal";
    case RunStatus::IterationLimit: return "iteration_limit";
    case RunStatus::Infeasible: return "infeasible";
    case RunStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

std::string to_string(CutMode m) {
  switch (m) {
    case CutMode::Single: return "single";
    case CutMode::Multi: return "multi";
    case CutMode::Partial: return "partial";
  }
  return "multi";
}

std::string to_string(Regularization r) {
  switch (r) {
    case Regularization::None: return "none";
    case Regularization::TrustRegion: return "tr";
    case Regularization::RegularizedDecomposition: return "rd";
    case Regularization::Level: return "level";
  }
  return "none";
}

void LShapedConfig::check() const {
  if (cut_mode == CutMode::Partial && bundle_size < 1) throw Error(ErrorCode::ConfigError, "bundle size must be at least 1");
  if (!(level_lambda > 0.0 && level_lambda < 1.0)) throw Error(ErrorCode::ConfigError, "level parameter must lie in (0, 1)");
  if (!(rd_sigma > 0.0)) throw Error(ErrorCode::ConfigError, "regularization weight must be positive");
  if (!(tr_factor > 1.0)) throw Error(ErrorCode::ConfigError, "trust-region factor must exceed 1");
  if (!(gap_tolerance >= 0.0)) throw Error(ErrorCode::ConfigError, "gap tolerance must be nonnegative");
  if (consolidate && (consolidation_threshold < 1 || consolidation_period < 1)) {
    throw Error(ErrorCode::ConfigError, "consolidation threshold and period must be at least 1");
  }
  exec.check();
}

SubproblemOutcome solve_subproblem(const TwoStageProblem& p, std::size_t s, const std::vector<double>& x,
                                   const KernelConfig& kernel) {
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "first-stage point is not finite", s);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const LPInstance lp = build_recourse_lp(p, s, x);
  const LPSolution sol = solve_lp(lp, kernel);
  SubproblemOutcome out;
  out.scenario = s;
  if (sol.status == SolveStatus::Optimal) {
    out.value = sol.objective;
    out.duals = sol.dual;
    out.bound_term = bound_contribution(lp, sol);
    out.y = sol.primal;
  } else if (sol.status == SolveStatus::Unbounded) {
    throw Error(ErrorCode::UnboundedSubproblem, "second stage of scenario " + std::to_string(s) + " is unbounded", s);
  } else if (sol.status == SolveStatus::Infeasible) {
    // Least total row violation: W y + v+ - v- ~ h - T x, v >= 0.
    LPInstance aux = lp;
    const std::size_t m = lp.cols();
    const std::size_t r = lp.rows();
    std::fill(aux.objective.begin(), aux.objective.end(), 0.0);
    auto trip = lp.matrix.triplets();
    for (std::size_t i = 0; i < r; ++i) {
      trip.push_back({i, m + 2 * i, 1.0});
      trip.push_back({i, m + 2 * i + 1, -1.0});
      for (int k = 0; k < 2; ++k) {
        aux.objective.push_back(1.0);
        aux.lower.push_back(0.0);
        aux.upper.push_back(kInf);
      }
    }
    aux.matrix = SparseMatrix::from_triplets(r, m + 2 * r, std::move(trip));
    aux.col_names.clear();
    const LPSolution a = solve_lp(aux, kernel);
    if (a.status != SolveStatus::Optimal || a.objective <= kernel.feas_tol) {
      throw Error(ErrorCode::NumericalBreakdown,
                  "feasibility problem of scenario " + std::to_string(s) + " did not confirm infeasibility", s);
    }
    out.feasible = false;
    out.value = a.objective;
    out.duals = a.dual;
    out.bound_term = bound_contribution(aux, a);
  } else {
    throw Error(ErrorCode::NumericalBreakdown, "second stage of scenario " + std::to_string(s) + " hit the iteration limit", s);
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

Cut make_optimality_cut(const TwoStageProblem& p, const std::vector<SubproblemOutcome>& outcomes,
                        const std::vector<double>& weights) {
  if (outcomes.size() != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one weight per outcome required");
  }
  Cut cut;
  cut.gradient.assign(p.first_cols(), 0.0);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const SubproblemOutcome& o = outcomes[k];
    if (!o.feasible) throw Error(ErrorCode::MixedOutcome, "optimality cut from an infeasible outcome", o.scenario);
    const Scenario& sc = p.scenarios.at(o.scenario);
    const auto tl = sc.T.transpose_multiply(o.duals);
    double lh = o.bound_term;
    for (std::size_t i = 0; i < sc.h.size(); ++i) lh += o.duals[i] * sc.h[i];
    for (std::size_t j = 0; j < tl.size(); ++j) cut.gradient[j] += weights[k] * tl[j];
    cut.rhs += weights[k] * lh;
    cut.source.push_back(o.scenario);
  }
  std::sort(cut.source.begin(), cut.source.end());
  return cut;
}

Cut make_feasibility_cut(const TwoStageProblem& p, const SubproblemOutcome& outcome) {
  if (outcome.feasible) throw Error(ErrorCode::NotInfeasible, "feasibility cut from a feasible outcome", outcome.scenario);
  Cut cut = make_optimality_cut(p, {SubproblemOutcome{outcome.scenario, true, 0.0, outcome.duals, outcome.bound_term, {}, 0.0}},
                                {1.0});
  cut.kind = CutKind::Feasibility;
  return cut;
}

std::vector<std::vector<std::size_t>> cut_groups(std::size_t scenarios, CutMode mode, std::size_t bundle_size) {
  std::size_t b = scenarios;
  if (mode == CutMode::Multi) b = 1;
  if (mode == CutMode::Partial) {
    if (bundle_size < 1) throw Error(ErrorCode::ConfigError, "bundle size must be at least 1");
    b = bundle_size;
  }
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t s = 0; s < scenarios; s += std::max<std::size_t>(b, 1)) {
    std::vector<std::size_t> g;
    for (std::size_t t = s; t < std::min(scenarios, s + b); ++t) g.push_back(t);
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<Cut> aggregate_cuts(const TwoStageProblem& p, const std::vector<SubproblemOutcome>& outcomes,
                                CutMode mode, std::size_t bundle_size) {
  std::vector<Cut> cuts;
  const auto groups = cut_groups(p.num_scenarios(), mode, bundle_size);
  for (std::size_t a = 0; a < groups.size(); ++a) {
    std::vector<SubproblemOutcome> os;
    std::vector<double> w;
    for (std::size_t s : groups[a]) {
      os.push_back(outcomes.at(s));
      w.push_back(p.scenarios[s].probability);
    }
    Cut c = make_optimality_cut(p, os, w);
    c.aggregate = a;
    cuts.push_back(std::move(c));
  }
  return cuts;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Candidate {
  std::vector<double> x;
  std::size_t iteration = 0;
};

struct VersionData {
  std::vector<double> x;
  double lower = kNegInf;
  double model = kNegInf;   // cut model at x, minimization form
  double center = kNegInf;  // incumbent value when x was proposed (inf if none)
  double step = 0.0;
  double radius = 0.0;
  std::vector<std::optional<SubproblemOutcome>> outcomes;
  std::size_t received = 0;
  bool infeasible = false;
  std::size_t cuts_added = 0;
};

class Coordinator {
 public:
  Coordinator(const TwoStageProblem& p, const LShapedConfig& cfg, SolveReport& report)
      : p_(p), cfg_(cfg), report_(report), t0_(std::chrono::steady_clock::now()) {
    groups_ = cut_groups(p.num_scenarios(), cfg.cut_mode, cfg.bundle_size);
    group_of_.resize(p.num_scenarios());
    for (std::size_t a = 0; a < groups_.size(); ++a) {
      for (std::size_t s : groups_[a]) group_of_[s] = a;
    }
    has_cut_.assign(groups_.size(), false);
    sigma_ = cfg.rd_sigma;
  }

  /// Solves the master and proposes the next first-stage point.
  Candidate propose() {
    const std::size_t n = p_.first_cols();
    VersionData v;
    const LPInstance plain = build_master();
    const Basis* warm = basis_.status.size() == plain.cols() + plain.rows() ? &basis_ : nullptr;
    const LPSolution sol = solve_lp(plain, cfg_.kernel, warm);
    if (sol.status == SolveStatus::Infeasible) {
      throw Error(ErrorCode::MasterInfeasible,
                  "no first-stage point satisfies the first-stage constraints and the feasibility cuts");
    }
    if (sol.status == SolveStatus::Unbounded) {
      throw Error(ErrorCode::MasterUnbounded, "master problem is unbounded; bound the first-stage variables");
    }
    if (sol.status != SolveStatus::Optimal) throw Error(ErrorCode::NumericalBreakdown, "master iteration limit");
    basis_ = sol.basis;
    track_activity(plain, sol);
    const bool floor = std::find(has_cut_.begin(), has_cut_.end(), false) != has_cut_.end();
    v.lower = floor ? kNegInf : sol.objective;
    latest_lower_ = v.lower;
    v.x.assign(sol.primal.begin(), sol.primal.begin() + static_cast<std::ptrdiff_t>(n));
    v.center = incumbent_.empty() ? kInf : upper_;

    if (!incumbent_.empty() && cfg_.regularization != Regularization::None) {
      std::optional<std::vector<double>> reg = regularized(plain, v);
      if (reg) {
        v.x = std::move(*reg);
      } else if (!fallback_noted_) {
        report_.notes.push_back("regularized master failed; used the plain master candidate");
        fallback_noted_ = true;
      }
    }
    v.model = model_value(v.x);
    if (!incumbent_.empty()) {
      for (std::size_t j = 0; j < n; ++j) v.step = std::max(v.step, std::abs(v.x[j] - incumbent_[j]));
    }
    v.outcomes.resize(p_.num_scenarios());
    const std::size_t id = versions_.size();
    versions_.push_back(std::move(v));
    ++report_.iterations;
    if (cfg_.consolidate && id > 0 && id % cfg_.consolidation_period == 0) consolidate();
    return {versions_.back().x, id};
  }

  /// Folds in one subproblem result. Optimality cuts are skipped when
  /// `optimality` is false.
  void absorb(const SubproblemOutcome& o, std::size_t version, bool optimality) {
    VersionData& v = versions_.at(version);
    v.outcomes[o.scenario] = o;
    ++v.received;
    if (!o.feasible) {
      v.infeasible = true;
      Cut c = make_feasibility_cut(p_, o);
      c.iteration = version;
      add_cut(std::move(c), v);
      return;
    }
    if (!optimality) return;
    const std::size_t a = group_of_[o.scenario];
    std::vector<SubproblemOutcome> os;
    std::vector<double> w;
    for (std::size_t s : groups_[a]) {
      if (!v.outcomes[s] || !v.outcomes[s]->feasible) return;
      os.push_back(*v.outcomes[s]);
      w.push_back(p_.scenarios[s].probability);
    }
    Cut c = make_optimality_cut(p_, os, w);
    c.aggregate = a;
    c.iteration = version;
    // only cuts that raise the model at the point they were generated
    const double current = aggregate_model(a, v.x);
    const double value = c.value(v.x);
    if (has_cut_[a] && value <= current + 1e-9 * (1.0 + std::abs(value))) return;
    add_cut(std::move(c), v);
  }

  /// Every result of `version` is in; returns true on convergence.
  bool complete(std::size_t version) {
    VersionData& v = versions_.at(version);
    IterationRecord rec;
    rec.iteration = version;
    rec.cuts_added = v.cuts_added;
    rec.step = v.step;
    rec.radius = v.radius;
    if (!v.infeasible) {
      double f = p_.first_sign() * p_.first.offset;
      for (std::size_t j = 0; j < v.x.size(); ++j) f += p_.first_sign() * p_.first.c[j] * v.x[j];
      for (std::size_t s = 0; s < p_.num_scenarios(); ++s) f += p_.scenarios[s].probability * v.outcomes[s]->value;
      rec.objective = f;
      update_incumbent(v, f);
    }
    rec.lower = latest_lower_;
    rec.upper = upper_;
    rec.gap = gap();
    rec.wall_seconds = elapsed();
    report_.trace.push_back(rec);
    v.outcomes.clear();
    v.outcomes.shrink_to_fit();
    return rec.gap <= cfg_.gap_tolerance;
  }

  void finish(bool converged) {
    report_.status = converged ? RunStatus::Optimal : RunStatus::IterationLimit;
    report_.lower_bound = p_.first_sign() * latest_lower_;
    report_.upper_bound = p_.first_sign() * upper_;
    report_.gap = gap();
    report_.objective = p_.first_sign() * upper_;
    report_.x = incumbent_.empty() && !versions_.empty() ? versions_.back().x : incumbent_;
    report_.recourse_values.clear();
    report_.recourse.clear();
    for (const auto& o : incumbent_outcomes_) {
      report_.recourse_values.push_back(p_.second_sign() * o.value);
      report_.recourse.push_back(o.y);
    }
    report_.wall_seconds = elapsed();
  }

  std::size_t optimality_cuts = 0;
  std::size_t feasibility_cuts = 0;

 private:
  double gap() const {
    if (!std::isfinite(upper_) || !std::isfinite(latest_lower_)) return kInf;
    return std::max(0.0, upper_ - latest_lower_) / (1.0 + std::abs(upper_));
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

  double first_part(const std::vector<double>& x) const {
    double f = p_.first_sign() * p_.first.offset;
    for (std::size_t j = 0; j < x.size(); ++j) f += p_.first_sign() * p_.first.c[j] * x[j];
    return f;
  }

  double aggregate_model(std::size_t a, const std::vector<double>& x) const {
    if (!has_cut_[a]) return cfg_.theta_min;
    double best = kNegInf;
    for (const Cut& c : cuts_) {
      if (c.kind == CutKind::Optimality && c.aggregate == a) best = std::max(best, c.value(x));
    }
    return best;
  }

  double model_value(const std::vector<double>& x) const {
    double m = first_part(x);
    for (std::size_t a = 0; a < groups_.size(); ++a) m += aggregate_model(a, x);
    return m;
  }

  void add_cut(Cut c, VersionData& v) {
    if (c.kind == CutKind::Optimality) {
      has_cut_[c.aggregate] = true;
      ++optimality_cuts;
    } else {
      ++feasibility_cuts;
    }
    if (cfg_.on_cut) cfg_.on_cut(c);
    cuts_.push_back(std::move(c));
    inactive_.push_back(0);
    ++v.cuts_added;
    if (!basis_.empty()) basis_.status.push_back(VarStatus::Basic);
  }

  LPInstance build_master() const {
    const FirstStage& f = p_.first;
    const std::size_t n = f.cols();
    const std::size_t na = groups_.size();
    LPInstance lp;
    lp.sense = Sense::Minimize;
    lp.objective.resize(n + na, 1.0);
    for (std::size_t j = 0; j < n; ++j) lp.objective[j] = p_.first_sign() * f.c[j];
    lp.objective_offset = p_.first_sign() * f.offset;
    lp.lower = f.lower;
    lp.upper = f.upper;
    for (std::size_t a = 0; a < na; ++a) {
      lp.lower.push_back(has_cut_[a] ? kNegInf : cfg_.theta_min);
      lp.upper.push_back(kInf);
    }
    TripletBuilder tb(f.rows() + cuts_.size(), n + na);
    tb.add_block(f.A, 0, 0);
    lp.row_senses = f.row_senses;
    lp.rhs = f.b;
    for (std::size_t k = 0; k < cuts_.size(); ++k) {
      const Cut& c = cuts_[k];
      const std::size_t row = f.rows() + k;
      for (std::size_t j = 0; j < n; ++j) {
        if (c.gradient[j] != 0.0) tb.add(row, j, c.gradient[j]);
      }
      if (c.kind == CutKind::Optimality) tb.add(row, n + c.aggregate, 1.0);
      lp.row_senses.push_back(RowSense::GreaterEqual);
      lp.rhs.push_back(c.rhs);
    }
    lp.matrix = std::move(tb).build();
    return lp;
  }

  void track_activity(const LPInstance& lp, const LPSolution& sol) {
    const std::size_t base = p_.first.rows();
    const auto act = lp.matrix.multiply(sol.primal);
    for (std::size_t k = 0; k < cuts_.size(); ++k) {
      const double slack = act[base + k] - cuts_[k].rhs;
      if (slack > 1e-7 * (1.0 + std::abs(cuts_[k].rhs))) {
        ++inactive_[k];
      } else {
        inactive_[k] = 0;
      }
    }
  }

  void consolidate() {
    const std::size_t base = p_.first.rows();
    const std::size_t cols = p_.first_cols() + groups_.size();
    std::vector<Cut> kept;
    std::vector<std::size_t> kept_inactive;
    std::vector<VarStatus> status(basis_.status.begin(),
                                  basis_.status.begin() + static_cast<std::ptrdiff_t>(std::min(basis_.status.size(), cols + base)));
    bool basis_ok = basis_.status.size() == cols + base + cuts_.size();
    std::size_t removed = 0;
    for (std::size_t k = 0; k < cuts_.size(); ++k) {
      if (cuts_[k].kind == CutKind::Optimality && inactive_[k] >= cfg_.consolidation_threshold) {
        if (basis_ok && basis_.status[cols + base + k] != VarStatus::Basic) basis_ok = false;
        ++removed;
        continue;
      }
      kept.push_back(std::move(cuts_[k]));
      kept_inactive.push_back(inactive_[k]);
      if (basis_ok) status.push_back(basis_.status[cols + base + k]);
    }
    cuts_ = std::move(kept);
    inactive_ = std::move(kept_inactive);
    // an aggregate left without cuts falls back to the theta floor
    std::fill(has_cut_.begin(), has_cut_.end(), false);
    for (const Cut& c : cuts_) {
      if (c.kind == CutKind::Optimality) has_cut_[c.aggregate] = true;
    }
    basis_.status = basis_ok ? std::move(status) : std::vector<VarStatus>{};
    removed_ += removed;
  }

  std::optional<std::vector<double>> regularized(const LPInstance& plain, VersionData& v) {
    const std::size_t n = p_.first_cols();
    LPSolution sol;
    if (cfg_.regularization == Regularization::TrustRegion) {
      LPInstance lp = plain;
      for (std::size_t j = 0; j < n; ++j) {
        lp.lower[j] = std::max(lp.lower[j], incumbent_[j] - radius_);
        lp.upper[j] = std::min(lp.upper[j], incumbent_[j] + radius_);
      }
      v.radius = radius_;
      sol = solve_lp(lp, cfg_.kernel);
    } else if (cfg_.regularization == Regularization::RegularizedDecomposition) {
      LPInstance qp = plain;
      qp.quadratic.assign(plain.cols(), 0.0);
      qp.center.assign(plain.cols(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        qp.quadratic[j] = sigma_;
        qp.center[j] = incumbent_[j];
      }
      v.radius = sigma_;
      sol = solve_qp_diagonal(qp, cfg_.kernel);
    } else {
      if (!std::isfinite(v.lower)) return std::nullopt;
      const double level = v.lower + cfg_.level_lambda * (upper_ - v.lower);
      LPInstance qp = plain;
      std::fill(qp.objective.begin(), qp.objective.end(), 0.0);
      qp.objective_offset = 0.0;
      qp.quadratic.assign(plain.cols(), 0.0);
      qp.center.assign(plain.cols(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        qp.quadratic[j] = 1.0;
        qp.center[j] = incumbent_[j];
      }
      auto trip = plain.matrix.triplets();
      const std::size_t row = plain.rows();
      for (std::size_t j = 0; j < plain.cols(); ++j) {
        if (plain.objective[j] != 0.0) trip.push_back({row, j, plain.objective[j]});
      }
      qp.matrix = SparseMatrix::from_triplets(row + 1, plain.cols(), std::move(trip));
      qp.row_senses.push_back(RowSense::LessEqual);
      qp.rhs.push_back(level - plain.objective_offset);
      v.radius = level;
      sol = solve_qp_diagonal(qp, cfg_.kernel);
    }
    if (sol.status != SolveStatus::Optimal) return std::nullopt;
    return std::vector<double>(sol.primal.begin(), sol.primal.begin() + static_cast<std::ptrdiff_t>(n));
  }

  void update_incumbent(const VersionData& v, double f) {
    const bool first = incumbent_.empty();
    bool accept = first || f < upper_;
    if (!first) {
      const double predicted = v.center - v.model;
      const double actual = v.center - f;
      if (cfg_.regularization == Regularization::TrustRegion) {
        accept = accept && actual >= cfg_.tr_accept * predicted;
        radius_ = accept ? std::min(radius_ * cfg_.tr_factor, cfg_.tr_max_radius)
                         : std::max(radius_ / cfg_.tr_factor, 1e-9);
      } else if (cfg_.regularization == Regularization::RegularizedDecomposition) {
        accept = accept && actual >= cfg_.tr_accept * predicted;
        if (accept && last_serious_) sigma_ = std::max(sigma_ * 0.5, 1e-8);
        last_serious_ = accept;
      }
    }
    if (!accept) return;
    if (first && cfg_.regularization == Regularization::TrustRegion) {
      double norm = 0.0;
      for (double xj : v.x) norm = std::max(norm, std::abs(xj));
      radius_ = cfg_.tr_radius > 0.0 ? cfg_.tr_radius : std::max(1.0, 0.1 * norm);
    }
    upper_ = f;
    incumbent_ = v.x;
    incumbent_outcomes_.clear();
    for (const auto& o : v.outcomes) incumbent_outcomes_.push_back(*o);
  }

  const TwoStageProblem& p_;
  const LShapedConfig& cfg_;
  SolveReport& report_;
  std::chrono::steady_clock::time_point t0_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::size_t> group_of_;
  std::vector<bool> has_cut_;
  std::vector<Cut> cuts_;
  std::vector<std::size_t> inactive_;
  std::size_t removed_ = 0;
  Basis basis_;
  std::vector<VersionData> versions_;
  double latest_lower_ = kNegInf;
  double upper_ = kInf;
  std::vector<double> incumbent_;
  std::vector<SubproblemOutcome> incumbent_outcomes_;
  double radius_ = 1.0;
  double sigma_ = 1.0;
  bool last_serious_ = false;
  bool fallback_noted_ = false;

 public:
  std::size_t removed() const noexcept { return removed_; }
  std::size_t active_cuts() const noexcept { return cuts_.size(); }
};

}  // namespace

SolveReport solve_lshaped(const TwoStageProblem& p, const LShapedConfig& cfg) {
  cfg.check();
  if (p.num_scenarios() == 0) throw Error(ErrorCode::EmptyScenarioSet, "no scenarios");
  SolveReport report;
  report.method = "lshaped";
  Coordinator co(p, cfg, report);
  Executor ex(cfg.exec);
  const std::size_t S = p.num_scenarios();
  bool converged = false;

  if (cfg.exec.mode == ExecMode::Async) {
    AsyncProtocol<Candidate, SubproblemOutcome> proto;
    proto.work = [&](const Candidate& c, std::size_t s) { return solve_subproblem(p, s, c.x, cfg.kernel); };
    proto.absorb = [&](const ResultEnvelope<SubproblemOutcome>& e) { co.absorb(e.payload, e.version, true); };
    proto.publish = [&]() -> std::optional<Candidate> {
      if (report.iterations >= cfg.max_iterations) return std::nullopt;
      return co.propose();
    };
    proto.complete = [&](std::size_t v) { return co.complete(v); };
    report.async = ex.run_async<Candidate, SubproblemOutcome>(co.propose(), S, proto);
    converged = report.async.converged;
  } else {
    while (!converged && report.iterations < cfg.max_iterations) {
      const Candidate c = co.propose();
      const auto wave = ex.run_wave<SubproblemOutcome>(
          c.iteration, S, [&](std::size_t s) { return solve_subproblem(p, s, c.x, cfg.kernel); });
      const bool any_infeasible =
          std::any_of(wave.begin(), wave.end(), [](const auto& e) { return !e.payload.feasible; });
      for (const auto& e : wave) co.absorb(e.payload, c.iteration, !any_infeasible);
      converged = co.complete(c.iteration);
    }
  }
  co.finish(converged);
  std::ostringstream os;
  os << "cuts: " << co.optimality_cuts << " optimality, " << co.feasibility_cuts << " feasibility, " << co.removed()
     << " removed, " << co.active_cuts() << " in the master";
  report.notes.push_back(os.str());
  return report;
}

}  // namespace stochlp
