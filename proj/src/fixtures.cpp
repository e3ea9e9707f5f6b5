#include "stochlp/fixtures.hpp"

#include <cmath>

#include "stochlp/error.hpp"

namespace stochlp::fixtures {

namespace {

// splitmix64; portable and good enough for instance generation.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return lo + static_cast<std::size_t>(next() % (hi - lo + 1));
  }
  // multiples of `step` in [lo, hi]
  double grid(double lo, double hi, double step) { return std::round(uniform(lo, hi) / step) * step; }

 private:
  std::uint64_t state_;
};

}  // namespace

Scenario simple_scenario(double q1, double q2, double d1, double d2, double probability) {
  Scenario s;
  s.probability = probability;
  s.q = {q1, q2};
  s.T = SparseMatrix::from_dense({{-60.0, 0.0}, {0.0, -80.0}});
  s.h = {0.0, 0.0};
  s.row_senses = {RowSense::LessEqual, RowSense::LessEqual};
  s.lower = {0.0, 0.0};
  s.upper = {d1, d2};
  return s;
}

TwoStageProblem simple_template() {
  TwoStageProblem p;
  FirstStage& f = p.first;
  f.sense = Sense::Minimize;
  f.c = {100.0, 150.0};
  f.A = SparseMatrix::from_dense({{1.0, 1.0}});
  f.row_senses = {RowSense::LessEqual};
  f.b = {120.0};
  f.lower = {40.0, 20.0};
  f.upper = {kInf, kInf};
  f.col_names = {"x1", "x2"};
  f.row_names = {"capacity"};
  p.shape.sense = Sense::Maximize;
  p.shape.W = SparseMatrix::from_dense({{6.0, 10.0}, {8.0, 5.0}});
  p.shape.col_names = {"y1", "y2"};
  p.shape.row_names = {"line1", "line2"};
  return p;
}

TwoStageProblem simple() {
  TwoStageProblem t = simple_template();
  std::vector<Scenario> sc{simple_scenario(24.0, 28.0, 500.0, 100.0, 0.4),
                           simple_scenario(28.0, 32.0, 300.0, 300.0, 0.6)};
  sc[0].name = "xi1";
  sc[1].name = "xi2";
  return build_problem(std::move(t.first), std::move(t.shape), std::move(sc));
}

TwoStageProblem farmer_with_yields(const std::vector<std::vector<double>>& yields,
                                   const std::vector<double>& probabilities) {
  if (yields.size() != probabilities.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one probability per yield scenario required");
  }
  FirstStage f;
  f.c = {150.0, 230.0, 260.0};
  f.A = SparseMatrix::from_dense({{1.0, 1.0, 1.0}});
  f.row_senses = {RowSense::LessEqual};
  f.b = {500.0};
  f.lower = {0.0, 0.0, 0.0};
  f.upper = {kInf, kInf, kInf};
  f.col_names = {"x_wheat", "x_corn", "x_beets"};
  f.row_names = {"budget"};

  // y_wheat y_corn w_wheat w_corn w_beets w_extra_beets
  RecourseShape shape;
  shape.W = SparseMatrix::from_dense({{1, 0, -1, 0, 0, 0},
                                      {0, 1, 0, -1, 0, 0},
                                      {0, 0, 0, 0, -1, -1},
                                      {0, 0, 0, 0, 1, 0}});
  shape.col_names = {"y_wheat", "y_corn", "w_wheat", "w_corn", "w_beets", "w_extra_beets"};
  shape.row_names = {"min_wheat", "min_corn", "min_beets", "beets_quota"};

  std::vector<Scenario> scenarios;
  for (std::size_t s = 0; s < yields.size(); ++s) {
    const auto& xi = yields[s];
    if (xi.size() != 3) throw Error(ErrorCode::DimensionMismatch, "farmer yields need three entries", s);
    Scenario sc;
    sc.probability = probabilities[s];
    sc.q = {238.0, 210.0, -170.0, -150.0, -36.0, -10.0};
    sc.T = SparseMatrix::from_triplets(4, 3, {{0, 0, xi[0]}, {1, 1, xi[1]}, {2, 2, xi[2]}});
    sc.h = {200.0, 240.0, 0.0, 6000.0};
    sc.row_senses = {RowSense::GreaterEqual, RowSense::GreaterEqual, RowSense::GreaterEqual, RowSense::LessEqual};
    sc.lower.assign(6, 0.0);
    sc.upper.assign(6, kInf);
    sc.name = "yield" + std::to_string(s + 1);
    scenarios.push_back(std::move(sc));
  }
  return build_problem(std::move(f), std::move(shape), std::move(scenarios));
}

TwoStageProblem farmer() {
  const double third = 1.0 / 3.0;
  return farmer_with_yields({{3.0, 3.6, 24.0}, {2.5, 3.0, 20.0}, {2.0, 2.4, 16.0}}, {third, third, third});
}

TwoStageProblem norrc1() {
  FirstStage f;
  f.c = {-1.0};
  f.A = SparseMatrix(0, 1);
  f.lower = {0.0};
  f.upper = {10.0};
  f.col_names = {"x"};
  RecourseShape shape;
  shape.W = SparseMatrix::from_dense({{1.0}});
  shape.col_names = {"y"};
  shape.row_names = {"balance"};
  std::vector<Scenario> scenarios;
  for (double h : {4.0, 6.0}) {
    Scenario sc;
    sc.probability = 0.5;
    sc.q = {1.0};
    sc.T = SparseMatrix::from_dense({{1.0}});
    sc.h = {h};
    sc.row_senses = {RowSense::Equal};
    sc.lower = {0.0};
    sc.upper = {kInf};
    scenarios.push_back(std::move(sc));
  }
  return build_problem(std::move(f), std::move(shape), std::move(scenarios));
}

TwoStageProblem random_problem(std::uint64_t seed, const RandomSpec& spec) {
  Stream rng(seed);
  const std::size_t n = rng.index(1, spec.max_first_cols);
  const std::size_t p = rng.index(0, 2);
  const std::size_t extra = spec.complete_recourse ? 1 : 0;
  const std::size_t m_core = rng.index(1, spec.max_second_cols - extra);
  const std::size_t m = m_core + extra;
  const std::size_t r = rng.index(1, spec.max_second_rows);
  const std::size_t count = rng.index(1, spec.max_scenarios);

  FirstStage f;
  f.sense = rng.unit() < 0.2 ? Sense::Maximize : Sense::Minimize;
  std::vector<double> x0(n);
  for (std::size_t j = 0; j < n; ++j) {
    f.c.push_back(rng.grid(-5.0, 5.0, 0.25));
    f.lower.push_back(0.0);
    f.upper.push_back(static_cast<double>(rng.index(1, 10)));
    x0[j] = rng.uniform(0.0, f.upper[j]);
  }
  std::vector<Triplet> a;
  for (std::size_t i = 0; i < p; ++i) {
    double act = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.unit() < 0.7) {
        const double v = rng.grid(0.0, 3.0, 0.5);
        if (v != 0.0) {
          a.push_back({i, j, v});
          act += v * x0[j];
        }
      }
    }
    f.row_senses.push_back(RowSense::LessEqual);
    f.b.push_back(std::ceil(act + rng.uniform(0.0, 2.0)));
  }
  f.A = SparseMatrix::from_triplets(p, n, std::move(a));

  RecourseShape shape;
  shape.sense = rng.unit() < 0.2 ? Sense::Maximize : Sense::Minimize;
  const double ssign = shape.sense == Sense::Minimize ? 1.0 : -1.0;
  std::vector<RowSense> senses(r);
  std::vector<Triplet> w;
  for (std::size_t i = 0; i < r; ++i) {
    senses[i] = rng.unit() < 0.5 ? RowSense::GreaterEqual : RowSense::LessEqual;
    bool any = false;
    for (std::size_t j = 0; j < m_core; ++j) {
      if (rng.unit() < 0.6) {
        const double v = rng.grid(-3.0, 3.0, 0.5);
        if (v != 0.0) {
          w.push_back({i, j, v});
          any = true;
        }
      }
    }
    if (!any) w.push_back({i, rng.index(0, m_core - 1), senses[i] == RowSense::GreaterEqual ? 1.0 : -1.0});
    if (spec.complete_recourse) w.push_back({i, m_core, senses[i] == RowSense::GreaterEqual ? 1.0 : -1.0});
  }
  shape.W = SparseMatrix::from_triplets(r, m, std::move(w));

  std::vector<Scenario> scenarios;
  for (std::size_t s = 0; s < count; ++s) {
    Scenario sc;
    sc.probability = rng.uniform(0.2, 1.0);
    for (std::size_t j = 0; j < m_core; ++j) {
      sc.q.push_back(ssign * rng.grid(-5.0, 5.0, 0.25));
      sc.lower.push_back(0.0);
      sc.upper.push_back(static_cast<double>(rng.index(1, 10)));
    }
    if (spec.complete_recourse) {
      sc.q.push_back(ssign * 50.0);
      sc.lower.push_back(0.0);
      sc.upper.push_back(kInf);
    }
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (rng.unit() < 0.5) {
          const double v = rng.grid(-3.0, 3.0, 0.5);
          if (v != 0.0) t.push_back({i, j, v});
        }
      }
    }
    sc.T = SparseMatrix::from_triplets(r, n, std::move(t));
    sc.row_senses = senses;
    if (spec.complete_recourse) {
      for (std::size_t i = 0; i < r; ++i) sc.h.push_back(std::round(rng.uniform(-10.0, 10.0)));
    } else {
      // Rows pass through a hidden recourse point at x0 with a small margin,
      // so the extensive form is feasible but far-away x are not.
      std::vector<double> y0(m);
      for (std::size_t j = 0; j < m; ++j) y0[j] = rng.uniform(0.0, sc.upper[j]);
      const auto tx = sc.T.multiply(x0);
      const auto wy = shape.W.multiply(y0);
      for (std::size_t i = 0; i < r; ++i) {
        const double act = tx[i] + wy[i];
        const double margin = rng.uniform(0.0, 1.0);
        sc.h.push_back(senses[i] == RowSense::GreaterEqual ? std::floor(act - margin) : std::ceil(act + margin));
      }
    }
    sc.name = "s" + std::to_string(s + 1);
    scenarios.push_back(std::move(sc));
  }
  BuildOptions opts;
  opts.normalize_weights = true;
  return build_problem(std::move(f), std::move(shape), std::move(scenarios), opts);
}

std::vector<std::string> names() { return {"simple", "farmer", "norrc-1"}; }

TwoStageProblem by_name(const std::string& name) {
  if (name == "simple") return simple();
  if (name == "farmer") return farmer();
  if (name == "norrc-1") return norrc1();
  throw Error(ErrorCode::ConfigError, "unknown fixture '" + name + "' (known: simple, farmer, norrc-1)");
}

}  // namespace stochlp::fixtures
