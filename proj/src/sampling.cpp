#include "stochlp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "stochlp/analysis.hpp"
#include "stochlp/error.hpp"
#include "stochlp/fixtures.hpp"

namespace stochlp {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint64_t kM0 = 0xD2511F53u;
  constexpr std::uint64_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kM0 * ctr[0];
    const std::uint64_t p1 = kM1 * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t index)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0u, 0u} {}

std::uint64_t RandomStream::next_u64() {
  if (used_ + 2 > 4) {
    block_ = philox4x32(counter_, key_);
    if (++counter_[2] == 0) ++counter_[3];
    used_ = 0;
  }
  const std::uint64_t v = (static_cast<std::uint64_t>(block_[used_]) << 32) | block_[used_ + 1];
  used_ += 2;
  return v;
}

double RandomStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const auto out = philox4x32({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                               static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)},
                              {static_cast<std::uint32_t>(seed) ^ 0x5EEDu, static_cast<std::uint32_t>(seed >> 32)});
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

DiscreteSampler::DiscreteSampler(std::vector<Scenario> scenarios) : scenarios_(std::move(scenarios)) {
  if (scenarios_.empty()) throw Error(ErrorCode::EmptyScenarioSet, "a discrete sampler needs at least one scenario");
  double total = 0.0;
  for (std::size_t s = 0; s < scenarios_.size(); ++s) {
    if (!(scenarios_[s].probability > 0.0)) {
      throw Error(ErrorCode::NonPositiveProbability, "sampler weight must be positive", s);
    }
    total += scenarios_[s].probability;
    cumulative_.push_back(total);
  }
  for (double& c : cumulative_) c /= total;
}

Scenario DiscreteSampler::sample(std::uint64_t seed, std::uint64_t index) const {
  RandomStream rs(seed, index);
  const double u = rs.uniform();
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), scenarios_.size() - 1);
  Scenario s = scenarios_[k];
  s.probability = 1.0;
  return s;
}

NormalSampler::NormalSampler(Scenario base, std::vector<EntryTarget> targets, std::vector<double> mean,
                             std::vector<std::vector<double>> cov)
    : base_(std::move(base)), targets_(std::move(targets)), mean_(std::move(mean)) {
  const std::size_t d = mean_.size();
  if (targets_.size() != d || cov.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "normal sampler needs one target and one covariance row per mean entry");
  }
  Eigen::MatrixXd sigma(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    if (cov[i].size() != d) throw Error(ErrorCode::DimensionMismatch, "covariance must be square");
    for (std::size_t j = 0; j < d; ++j) sigma(i, j) = cov[i][j];
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw Error(ErrorCode::InvalidArgument, "covariance must be symmetric");
  // LDL^T with pivoting tolerates singular (semidefinite) covariances.
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < -1e-12 * (1.0 + sigma.norm())).any()) {
    throw Error(ErrorCode::InvalidArgument, "covariance must be positive semidefinite");
  }
  const Eigen::VectorXd root = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd l = ldlt.matrixL();
  l = ldlt.transpositionsP().transpose() * l;
  const Eigen::MatrixXd factor = l * root.asDiagonal();
  factor_.assign(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) factor_[i][j] = factor(i, j);
  }

  const std::size_t m = base_.q.size();
  const std::size_t r = base_.h.size();
  for (const EntryTarget& t : targets_) {
    const bool ok = (t.kind == EntryKind::Rhs && t.row < r) ||
                    ((t.kind == EntryKind::Cost || t.kind == EntryKind::Lower || t.kind == EntryKind::Upper) && t.col < m) ||
                    (t.kind == EntryKind::Technology && t.row < base_.T.rows() && t.col < base_.T.cols());
    if (!ok) throw Error(ErrorCode::IndexOutOfRange, "normal sampler target outside the scenario");
  }
}

Scenario NormalSampler::sample(std::uint64_t seed, std::uint64_t index) const {
  RandomStream rs(seed, index);
  const std::size_t d = mean_.size();
  std::vector<double> z(d);
  for (double& v : z) v = rs.normal();
  Scenario s = base_;
  s.probability = 1.0;
  std::vector<Triplet> tech;
  bool tech_changed = false;
  for (std::size_t i = 0; i < d; ++i) {
    double v = mean_[i];
    for (std::size_t j = 0; j < d; ++j) v += factor_[i][j] * z[j];
    const EntryTarget& t = targets_[i];
    switch (t.kind) {
      case EntryKind::Cost: s.q[t.col] = v; break;
      case EntryKind::Rhs: s.h[t.row] = v; break;
      case EntryKind::Lower: s.lower[t.col] = v; break;
      case EntryKind::Upper: s.upper[t.col] = v; break;
      case EntryKind::Technology: {
        if (!tech_changed) tech = base_.T.triplets();
        tech_changed = true;
        auto it = std::find_if(tech.begin(), tech.end(), [&](const Triplet& e) { return e.row == t.row && e.col == t.col; });
        if (it == tech.end()) {
          tech.push_back({t.row, t.col, v});
        } else {
          it->value = v;
        }
        break;
      }
    }
  }
  if (tech_changed) s.T = SparseMatrix::from_triplets(base_.T.rows(), base_.T.cols(), tech);
  return s;
}

NormalSampler textbook_normal_sampler() {
  Scenario base = fixtures::simple_scenario(24.0, 32.0, 400.0, 200.0, 1.0);
  return NormalSampler(std::move(base),
                       {{EntryKind::Cost, 0, 0}, {EntryKind::Cost, 0, 1}, {EntryKind::Upper, 0, 0}, {EntryKind::Upper, 0, 1}},
                       {24.0, 32.0, 400.0, 200.0},
                       {{2.0, 0.5, 0.0, 0.0}, {0.5, 1.0, 0.0, 0.0}, {0.0, 0.0, 50.0, 20.0}, {0.0, 0.0, 20.0, 30.0}});
}

DiscreteSampler textbook_discrete_sampler() { return DiscreteSampler(fixtures::simple().scenarios); }

TwoStageProblem sample_instance(const TwoStageProblem& model, const Sampler& sampler, std::size_t n,
                                std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be at least 1");
  std::vector<Scenario> scenarios;
  scenarios.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Scenario s = sampler.sample(seed, i);
    s.probability = 1.0 / static_cast<double>(n);
    s.name = "sample_" + std::to_string(i + 1);
    scenarios.push_back(std::move(s));
  }
  BuildOptions opts;
  opts.normalize_weights = true;
  return build_problem(model.first, model.shape, std::move(scenarios), opts);
}

double relative_width(double lo, double hi, double point) {
  const double width = hi - lo;
  if (width == 0.0) return 0.0;
  if (!std::isfinite(width)) return std::numeric_limits<double>::infinity();
  if (point == 0.0) return std::numeric_limits<double>::infinity();
  return width / std::abs(point);
}

ConfidenceReport confidence_interval(const std::vector<double>& values, double level) {
  if (values.size() < 2) {
    throw Error(ErrorCode::TooFewBatches, "a confidence interval needs at least 2 values, got " + std::to_string(values.size()));
  }
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::ConfigError, "confidence level must lie in (0, 1)");
  const double m = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= m;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (m - 1.0));
  const boost::math::students_t dist(m - 1.0);
  const double t = boost::math::quantile(dist, 0.5 * (1.0 + level));
  const double half = t * sd / std::sqrt(m);
  ConfidenceReport c;
  c.point = mean;
  c.lo = mean - half;
  c.hi = mean + half;
  c.level = level;
  c.n = values.size();
  c.batches = values.size();
  c.relative_error = relative_width(c.lo, c.hi, c.point);
  return c;
}

void SaaConfig::check() const {
  if (!(rel_tol > 0.0)) throw Error(ErrorCode::ConfigError, "relative tolerance must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) throw Error(ErrorCode::ConfigError, "confidence level must lie in (0, 1)");
  if (batches < 2) throw Error(ErrorCode::TooFewBatches, "SAA needs at least 2 batches");
  if (eval_samples < 2) throw Error(ErrorCode::ConfigError, "SAA needs at least 2 evaluation samples");
  if (initial_n < 1) throw Error(ErrorCode::ConfigError, "initial sample size must be at least 1");
  if (growth < 2) throw Error(ErrorCode::ConfigError, "sample growth factor must be at least 2");
  if (max_n < initial_n) throw Error(ErrorCode::ConfigError, "maximum sample size is below the initial size");
  exec.check();
}

namespace {

struct BatchSolve {
  double value = 0.0;  // minimization form
  std::vector<double> x;
};

// Per-scenario totals c x + Q_s(x) in minimization form, or nothing when x
// has no feasible recourse for some sampled scenario.
std::optional<std::vector<double>> sample_values(const TwoStageProblem& sample, const std::vector<double>& x,
                                                 const AnalysisConfig& ac) {
  const DecisionValue dv = evaluate_decision(sample, x, ac);
  if (!dv.finite) return std::nullopt;
  const double sign = sample.first_sign();
  double cx = sample.first.offset;
  for (std::size_t j = 0; j < x.size(); ++j) cx += sample.first.c[j] * x[j];
  std::vector<double> out;
  out.reserve(dv.scenario_values.size());
  for (double q : dv.scenario_values) out.push_back(sign * (cx + q));
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

ConfidenceReport to_sense(ConfidenceReport c, double sign) {
  if (sign < 0) {
    c.point = -c.point;
    std::swap(c.lo, c.hi);
    c.lo = -c.lo;
    c.hi = -c.hi;
  }
  return c;
}

}  // namespace

SaaResult saa_solve(const TwoStageProblem& model, const Sampler& sampler, const SaaConfig& cfg) {
  cfg.check();
  const double sign = model.first_sign();
  AnalysisConfig ac;
  ac.kernel = cfg.kernel;
  Executor ex(cfg.exec);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  SaaResult result;
  result.seed = cfg.seed;
  std::size_t n = cfg.initial_n;
  for (std::uint64_t round = 0;; ++round) {
    const auto wave = ex.run_wave<BatchSolve>(round, cfg.batches, [&](std::size_t b) {
      const TwoStageProblem inst = sample_instance(model, sampler, n, derive_seed(cfg.seed, round, b));
      const SolveReport r = solve_extensive_form(inst, cfg.kernel);
      if (r.status != RunStatus::Optimal) {
        throw Error(ErrorCode::NumericalBreakdown, "sampled instance ended " + to_string(r.status), b);
      }
      return BatchSolve{sign * r.objective, r.x};
    });
    std::vector<double> batch_values;
    for (const auto& e : wave) batch_values.push_back(e.payload.value);
    ConfidenceReport batch = confidence_interval(batch_values, cfg.confidence);
    batch.n = n;
    batch.batches = cfg.batches;

    // Screen the distinct batch decisions on a common sample.
    const TwoStageProblem screen =
        sample_instance(model, sampler, cfg.eval_samples, derive_seed(cfg.seed, round, cfg.batches));
    std::vector<double> best_x;
    double best = kInf;
    std::vector<std::vector<double>> seen;
    for (const auto& e : wave) {
      const std::vector<double>& x = e.payload.x;
      const bool dup = std::any_of(seen.begin(), seen.end(), [&](const std::vector<double>& o) {
        for (std::size_t j = 0; j < x.size(); ++j) {
          if (std::abs(o[j] - x[j]) > 1e-9 * (1.0 + std::abs(x[j]))) return false;
        }
        return true;
      });
      if (dup) continue;
      seen.push_back(x);
      const auto v = sample_values(screen, x, ac);
      const double m = v ? mean_of(*v) : kInf;
      if (best_x.empty() || m < best) {
        best = m;
        best_x = x;
      }
    }

    const TwoStageProblem fresh =
        sample_instance(model, sampler, cfg.eval_samples, derive_seed(cfg.seed, round, cfg.batches + 1));
    ConfidenceReport incumbent;
    if (const auto v = sample_values(fresh, best_x, ac)) {
      incumbent = confidence_interval(*v, cfg.confidence);
    } else {
      incumbent.point = incumbent.lo = incumbent.hi = kInf;
      incumbent.level = cfg.confidence;
      incumbent.relative_error = kInf;
    }
    incumbent.n = cfg.eval_samples;
    incumbent.batches = 1;

    // The hull of both intervals. Using only batch.lo and incumbent.hi would
    // let a low incumbent sample shrink the interval and stop the loop on
    // exactly the rounds that miss the optimum.
    ConfidenceReport interval;
    interval.lo = std::min(batch.lo, incumbent.lo);
    interval.hi = std::max(batch.hi, incumbent.hi);
    interval.point = incumbent.point;
    interval.level = cfg.confidence;
    interval.n = n;
    interval.batches = cfg.batches;
    interval.relative_error = relative_width(interval.lo, interval.hi, interval.point);

    SaaRound rec;
    rec.n = n;
    rec.batch = to_sense(batch, sign);
    rec.incumbent = to_sense(incumbent, sign);
    rec.relative_error = interval.relative_error;
    result.rounds.push_back(rec);
    result.interval = to_sense(interval, sign);
    result.batch = rec.batch;
    result.incumbent = rec.incumbent;
    result.x = best_x;
    result.n = n;

    if (interval.relative_error <= cfg.rel_tol) break;
    if (n * cfg.growth > cfg.max_n) {
      result.budget_exceeded = true;
      break;
    }
    n *= cfg.growth;
  }
  return result;
}

}  // namespace stochlp
