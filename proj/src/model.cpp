#include "stochlp/model.hpp"

#include <cmath>
#include <sstream>

#include "stochlp/error.hpp"

namespace stochlp {

namespace {

std::string dims(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }

[[noreturn]] void mismatch(const std::string& what, const std::string& got, const std::string& want) {
  throw Error(ErrorCode::DimensionMismatch, what + " is " + got + ", expected " + want);
}

void check_first(const FirstStage& f) {
  const std::size_t n = f.cols();
  const std::size_t p = f.rows();
  if (f.A.rows() != p || f.A.cols() != n) mismatch("first-stage A", dims(f.A.rows(), f.A.cols()), dims(p, n));
  if (f.row_senses.size() != p) {
    mismatch("first-stage row_senses", std::to_string(f.row_senses.size()), std::to_string(p));
  }
  if (f.lower.size() != n) mismatch("first-stage lower bounds", std::to_string(f.lower.size()), std::to_string(n));
  if (f.upper.size() != n) mismatch("first-stage upper bounds", std::to_string(f.upper.size()), std::to_string(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (f.lower[j] > f.upper[j]) {
      throw Error(ErrorCode::InvalidArgument, "first-stage column " + std::to_string(j) + " has lower > upper");
    }
  }
}

void check_scenario(const Scenario& s, std::size_t index, std::size_t n, const RecourseShape& shape) {
  const std::string tag = "scenario " + std::to_string(index) + " ";
  const std::size_t m = shape.cols();
  const std::size_t r = shape.rows();
  auto fail = [&](const std::string& what, const std::string& got, const std::string& want) {
    throw Error(ErrorCode::DimensionMismatch, tag + what + " is " + got + ", expected " + want, index);
  };
  if (s.q.size() != m) fail("q", std::to_string(s.q.size()), std::to_string(m));
  if (s.T.rows() != r || s.T.cols() != n) fail("T", dims(s.T.rows(), s.T.cols()), dims(r, n));
  if (s.h.size() != r) fail("h", std::to_string(s.h.size()), std::to_string(r));
  if (s.row_senses.size() != r) fail("row_senses", std::to_string(s.row_senses.size()), std::to_string(r));
  if (s.lower.size() != m) fail("lower bounds", std::to_string(s.lower.size()), std::to_string(m));
  if (s.upper.size() != m) fail("upper bounds", std::to_string(s.upper.size()), std::to_string(m));
  for (std::size_t j = 0; j < m; ++j) {
    if (s.lower[j] > s.upper[j]) {
      throw Error(ErrorCode::InvalidArgument, tag + "column " + std::to_string(j) + " has lower > upper", index);
    }
  }
}

std::string col_name(const std::vector<std::string>& names, const char* prefix, std::size_t j) {
  if (j < names.size() && !names[j].empty()) return names[j];
  return prefix + std::to_string(j + 1);
}

// Appends the first-stage block (columns and rows) to an extensive form.
void add_first_stage(const FirstStage& f, LPInstance& lp, TripletBuilder& tb) {
  lp.sense = f.sense;
  lp.objective_offset = f.offset;
  for (std::size_t j = 0; j < f.cols(); ++j) {
    lp.objective.push_back(f.c[j]);
    lp.lower.push_back(f.lower[j]);
    lp.upper.push_back(f.upper[j]);
    lp.col_names.push_back(col_name(f.col_names, "x", j));
  }
  tb.add_block(f.A, 0, 0);
  for (std::size_t i = 0; i < f.rows(); ++i) {
    lp.row_senses.push_back(f.row_senses[i]);
    lp.rhs.push_back(f.b[i]);
    lp.row_names.push_back(col_name(f.row_names, "c", i));
  }
}

// Appends one scenario block with objective weight `weight` (already in the
// first stage's sense).
void add_scenario_block(const TwoStageProblem& p, const Scenario& sc, double weight, const std::string& suffix,
                        LPInstance& lp, TripletBuilder& tb) {
  const std::size_t col0 = lp.objective.size();
  const std::size_t row0 = lp.rhs.size();
  for (std::size_t j = 0; j < p.second_cols(); ++j) {
    lp.objective.push_back(weight * sc.q[j]);
    lp.lower.push_back(sc.lower[j]);
    lp.upper.push_back(sc.upper[j]);
    lp.col_names.push_back(col_name(p.shape.col_names, "y", j) + suffix);
  }
  tb.add_block(sc.T, row0, 0);
  tb.add_block(p.shape.W, row0, col0);
  for (std::size_t i = 0; i < p.second_rows(); ++i) {
    lp.row_senses.push_back(sc.row_senses[i]);
    lp.rhs.push_back(sc.h[i]);
    lp.row_names.push_back(col_name(p.shape.row_names, "r", i) + suffix);
  }
}

std::size_t extensive_rows(const TwoStageProblem& p, std::size_t count) {
  return p.first.rows() + count * p.second_rows();
}

std::size_t extensive_cols(const TwoStageProblem& p, std::size_t count) {
  return p.first_cols() + count * p.second_cols();
}

}  // namespace

TwoStageProblem build_problem(FirstStage first, RecourseShape shape, std::vector<Scenario> scenarios,
                              const BuildOptions& opts) {
  check_first(first);
  if (scenarios.empty()) throw Error(ErrorCode::EmptyScenarioSet, "a problem needs at least one scenario");
  double total = 0.0;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    check_scenario(scenarios[s], s, first.cols(), shape);
    const double pi = scenarios[s].probability;
    if (!(pi > 0.0) || !std::isfinite(pi)) {
      std::ostringstream os;
      os << "scenario " << s << " has probability " << pi;
      throw Error(ErrorCode::NonPositiveProbability, os.str(), s);
    }
    total += pi;
  }
  TwoStageProblem p;
  const double drift = std::abs(total - 1.0);
  if (!opts.normalize_weights) {
    if (drift > 0.1) {
      std::ostringstream os;
      os << "probabilities sum to " << total << "; pass relative weights with normalize_weights instead";
      throw Error(ErrorCode::ProbabilityDrift, os.str());
    }
    if (drift > 1e-6) {
      std::ostringstream os;
      os << "probabilities summed to " << total << " (drift " << drift << "); renormalized";
      p.warnings.push_back(os.str());
    }
  }
  for (auto& sc : scenarios) sc.probability /= total;
  p.first = std::move(first);
  p.shape = std::move(shape);
  p.scenarios = std::move(scenarios);
  return p;
}

LPInstance build_deterministic_equivalent(const TwoStageProblem& p) {
  const std::size_t count = p.num_scenarios();
  LPInstance lp;
  TripletBuilder tb(extensive_rows(p, count), extensive_cols(p, count));
  add_first_stage(p.first, lp, tb);
  const double conv = p.first_sign() * p.second_sign();
  for (std::size_t s = 0; s < count; ++s) {
    const Scenario& sc = p.scenarios[s];
    add_scenario_block(p, sc, conv * sc.probability, "_" + std::to_string(s + 1), lp, tb);
  }
  lp.matrix = std::move(tb).build();
  return lp;
}

LPInstance build_wait_and_see(const TwoStageProblem& p, std::size_t s) {
  if (s >= p.num_scenarios()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "scenario " + std::to_string(s) + " of " + std::to_string(p.num_scenarios()));
  }
  LPInstance lp;
  TripletBuilder tb(extensive_rows(p, 1), extensive_cols(p, 1));
  add_first_stage(p.first, lp, tb);
  add_scenario_block(p, p.scenarios[s], p.first_sign() * p.second_sign(), "", lp, tb);
  lp.matrix = std::move(tb).build();
  return lp;
}

Scenario expected_scenario(const std::vector<Scenario>& scenarios) {
  if (scenarios.empty()) throw Error(ErrorCode::EmptyScenarioSet, "expected scenario of an empty set");
  const Scenario& ref = scenarios.front();
  const std::size_t m = ref.q.size();
  const std::size_t r = ref.h.size();
  double total = 0.0;
  for (const auto& sc : scenarios) total += sc.probability;
  Scenario mean;
  mean.probability = 1.0;
  mean.name = "expected";
  mean.q.assign(m, 0.0);
  mean.h.assign(r, 0.0);
  mean.lower.assign(m, 0.0);
  mean.upper.assign(m, 0.0);
  mean.row_senses = ref.row_senses;
  std::vector<Triplet> t;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const Scenario& sc = scenarios[s];
    if (sc.q.size() != m || sc.h.size() != r || sc.T.rows() != ref.T.rows() || sc.T.cols() != ref.T.cols() ||
        sc.lower.size() != m || sc.upper.size() != m) {
      throw Error(ErrorCode::DimensionMismatch, "scenario " + std::to_string(s) + " differs in shape", s);
    }
    if (sc.row_senses != ref.row_senses) {
      throw Error(ErrorCode::InvalidArgument, "scenario " + std::to_string(s) + " has different row senses", s);
    }
    const double w = sc.probability / total;
    for (std::size_t j = 0; j < m; ++j) {
      mean.q[j] += w * sc.q[j];
      mean.lower[j] += w * sc.lower[j];
      mean.upper[j] += w * sc.upper[j];
    }
    for (std::size_t i = 0; i < r; ++i) mean.h[i] += w * sc.h[i];
    for (auto e : sc.T.triplets()) {
      e.value *= w;
      t.push_back(e);
    }
  }
  mean.T = SparseMatrix::from_triplets(ref.T.rows(), ref.T.cols(), std::move(t));
  return mean;
}

LPInstance build_expected_value_problem(const TwoStageProblem& p) {
  TwoStageProblem ev;
  ev.first = p.first;
  ev.shape = p.shape;
  ev.scenarios.push_back(expected_scenario(p.scenarios));
  return build_wait_and_see(ev, 0);
}

LPInstance build_recourse_lp(const TwoStageProblem& p, std::size_t s, const std::vector<double>& x) {
  if (s >= p.num_scenarios()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "scenario " + std::to_string(s) + " of " + std::to_string(p.num_scenarios()));
  }
  if (x.size() != p.first_cols()) {
    mismatch("first-stage point", std::to_string(x.size()), std::to_string(p.first_cols()));
  }
  const Scenario& sc = p.scenarios[s];
  LPInstance lp;
  lp.sense = Sense::Minimize;
  lp.objective = sc.q;
  for (double& v : lp.objective) v *= p.second_sign();
  lp.matrix = p.shape.W;
  lp.row_senses = sc.row_senses;
  lp.rhs = sc.h;
  const auto tx = sc.T.multiply(x);
  for (std::size_t i = 0; i < lp.rhs.size(); ++i) lp.rhs[i] -= tx[i];
  lp.lower = sc.lower;
  lp.upper = sc.upper;
  return lp;
}

LPInstance build_first_stage_lp(const TwoStageProblem& p) {
  LPInstance lp;
  lp.sense = Sense::Minimize;
  lp.objective = p.first.c;
  for (double& v : lp.objective) v *= p.first_sign();
  lp.objective_offset = p.first_sign() * p.first.offset;
  lp.matrix = p.first.A;
  lp.row_senses = p.first.row_senses;
  lp.rhs = p.first.b;
  lp.lower = p.first.lower;
  lp.upper = p.first.upper;
  return lp;
}

std::vector<Diagnostic> validate(const TwoStageProblem& p) {
  std::vector<Diagnostic> out;
  auto warn = [&](std::string msg) { out.push_back({Severity::Warning, std::move(msg)}); };
  auto error = [&](std::string msg) { out.push_back({Severity::Error, std::move(msg)}); };
  try {
    check_first(p.first);
  } catch (const Error& e) {
    error(e.what());
  }
  if (p.scenarios.empty()) error("no scenarios");
  double total = 0.0;
  for (std::size_t s = 0; s < p.scenarios.size(); ++s) {
    try {
      check_scenario(p.scenarios[s], s, p.first_cols(), p.shape);
    } catch (const Error& e) {
      error(e.what());
    }
    const double pi = p.scenarios[s].probability;
    if (!(pi > 0.0)) error("scenario " + std::to_string(s) + " has nonpositive probability");
    total += pi;
  }
  if (!p.scenarios.empty() && std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "probabilities sum to " << total << " (drift " << total - 1.0 << "); they will be normalized";
    warn(os.str());
  }
  const SparseMatrix& W = p.shape.W;
  std::vector<bool> row_used(W.rows(), false);
  for (std::size_t j = 0; j < W.cols(); ++j) {
    if (W.col_rows(j).empty()) warn("recourse column " + col_name(p.shape.col_names, "y", j) + " is empty in W");
    for (std::size_t i : W.col_rows(j)) row_used[i] = true;
  }
  for (std::size_t i = 0; i < W.rows(); ++i) {
    if (!row_used[i]) warn("recourse row " + col_name(p.shape.row_names, "r", i) + " of W is all zero");
  }
  // Columns that can run off to infinity: free in the improving direction and
  // not held by any row.
  for (std::size_t j = 0; j < p.first_cols() && j < p.first.lower.size() && j < p.first.upper.size(); ++j) {
    const double c = p.first_sign() * p.first.c[j];
    const bool open = c > 0.0 ? p.first.lower[j] == -kInf : c < 0.0 && p.first.upper[j] == kInf;
    if (open && j < p.first.A.cols() && p.first.A.col_rows(j).empty()) {
      warn("first-stage column " + col_name(p.first.col_names, "x", j) + " is unbounded in its cost direction");
    }
  }
  for (std::size_t s = 0; s < p.scenarios.size(); ++s) {
    const Scenario& sc = p.scenarios[s];
    for (std::size_t j = 0; j < W.cols() && j < sc.q.size() && j < sc.lower.size() && j < sc.upper.size(); ++j) {
      const double q = p.second_sign() * sc.q[j];
      const bool open = q > 0.0 ? sc.lower[j] == -kInf : q < 0.0 && sc.upper[j] == kInf;
      if (open && W.col_rows(j).empty()) {
        warn("recourse column " + col_name(p.shape.col_names, "y", j) + " is unbounded in scenario " +
             std::to_string(s));
      }
    }
  }
  return out;
}

}  // namespace stochlp
