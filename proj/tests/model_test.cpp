#include <gtest/gtest.h>

#include "stochlp/error.hpp"
#include "stochlp/fixtures.hpp"
#include "stochlp/model.hpp"

namespace stochlp {
namespace {

TwoStageProblem only_scenario(const TwoStageProblem& p, std::size_t s) {
  Scenario sc = p.scenarios[s];
  sc.probability = 1.0;
  return build_problem(p.first, p.shape, {sc});
}

double solve_value(const LPInstance& lp) {
  const LPSolution sol = solve(lp);
  EXPECT_EQ(sol.status, SolveStatus::Optimal);
  return sol.objective;
}

TEST(BuildProblem, SimpleFixtureHasTwoScenarios) {
  const TwoStageProblem p = fixtures::simple();
  EXPECT_EQ(p.num_scenarios(), 2u);
  EXPECT_EQ(p.first_cols(), 2u);
  EXPECT_NEAR(p.scenarios[0].probability + p.scenarios[1].probability, 1.0, 1e-15);
  EXPECT_TRUE(p.warnings.empty());
}

TEST(BuildProblem, SingleScenarioKeepsProbability) {
  const TwoStageProblem p = only_scenario(fixtures::simple(), 0);
  EXPECT_EQ(p.scenarios[0].probability, 1.0);
}

TEST(BuildProblem, RelativeWeightsAreNormalized) {
  const TwoStageProblem t = fixtures::simple_template();
  BuildOptions opts;
  opts.normalize_weights = true;
  const TwoStageProblem p = build_problem(
      t.first, t.shape,
      {fixtures::simple_scenario(24, 28, 500, 100, 2.0), fixtures::simple_scenario(28, 32, 300, 300, 3.0)}, opts);
  EXPECT_NEAR(p.scenarios[0].probability, 0.4, 1e-15);
  EXPECT_NEAR(p.scenarios[1].probability, 0.6, 1e-15);
  EXPECT_TRUE(p.warnings.empty());
}

TEST(BuildProblem, SmallDriftIsRenormalizedWithWarning) {
  const TwoStageProblem t = fixtures::simple_template();
  const TwoStageProblem p = build_problem(
      t.first, t.shape,
      {fixtures::simple_scenario(24, 28, 500, 100, 0.4), fixtures::simple_scenario(28, 32, 300, 300, 0.57)});
  ASSERT_EQ(p.warnings.size(), 1u);
  EXPECT_NE(p.warnings[0].find("0.97"), std::string::npos);
  EXPECT_NEAR(p.scenarios[0].probability + p.scenarios[1].probability, 1.0, 1e-12);
}

TEST(BuildProblem, LargeDriftIsRejected) {
  const TwoStageProblem t = fixtures::simple_template();
  try {
    build_problem(t.first, t.shape,
                  {fixtures::simple_scenario(24, 28, 500, 100, 2.0), fixtures::simple_scenario(28, 32, 300, 300, 3.0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProbabilityDrift);
  }
}

TEST(BuildProblem, ErrorsNameTheProblem) {
  const TwoStageProblem t = fixtures::simple_template();
  try {
    build_problem(t.first, t.shape, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyScenarioSet);
  }
  try {
    build_problem(t.first, t.shape, {fixtures::simple_scenario(24, 28, 500, 100, 0.0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveProbability);
  }
  Scenario bad = fixtures::simple_scenario(24, 28, 500, 100, 1.0);
  bad.h.push_back(1.0);
  try {
    build_problem(t.first, t.shape, {bad});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    EXPECT_NE(std::string(e.what()).find("h is 3, expected 2"), std::string::npos);
  }
}

TEST(DeterministicEquivalent, SimpleObjectiveCoefficients) {
  const LPInstance dep = build_deterministic_equivalent(fixtures::simple());
  EXPECT_EQ(dep.sense, Sense::Minimize);
  const std::vector<double> expected{100, 150, -9.6, -11.2, -16.8, -19.2};
  ASSERT_EQ(dep.cols(), expected.size());
  for (std::size_t j = 0; j < expected.size(); ++j) EXPECT_NEAR(dep.objective[j], expected[j], 1e-12);
  EXPECT_EQ(dep.col_names[2], "y1_1");
  EXPECT_EQ(dep.col_names[5], "y2_2");
  EXPECT_EQ(dep.upper[3], 100.0);
  EXPECT_EQ(dep.matrix.coeff(1, 0), -60.0);
  EXPECT_EQ(dep.matrix.coeff(4, 1), -80.0);
}

TEST(DeterministicEquivalent, SimpleOptimum) {
  EXPECT_NEAR(solve_value(build_deterministic_equivalent(fixtures::simple())), -855.833333333333, 1e-6);
}

TEST(DeterministicEquivalent, FarmerOptimum) {
  const LPSolution sol = solve(build_deterministic_equivalent(fixtures::farmer()));
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.objective, -108390.0, 1e-6);
  EXPECT_NEAR(sol.primal[0], 170.0, 1e-6);
  EXPECT_NEAR(sol.primal[1], 80.0, 1e-6);
  EXPECT_NEAR(sol.primal[2], 250.0, 1e-6);
  const std::vector<double> y1{0, 0, 310, 48, 6000, 0};
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(sol.primal[3 + j], y1[j], 1e-6);
}

TEST(DeterministicEquivalent, ShapeCountsOnRandomInstance) {
  // n = 4, m = 3, three scenarios, counted directly from the assembled matrix
  FirstStage f;
  f.c = {1, 2, 3, 4};
  f.A = SparseMatrix::from_dense({{1, 1, 0, 0}, {0, 0, 1, 1}});
  f.row_senses = {RowSense::LessEqual, RowSense::LessEqual};
  f.b = {5, 5};
  f.lower.assign(4, 0.0);
  f.upper.assign(4, 3.0);
  RecourseShape shape;
  shape.W = SparseMatrix::from_dense({{1, 0, 1}, {0, 1, -1}});
  std::vector<Scenario> sc;
  for (int s = 0; s < 3; ++s) {
    Scenario x;
    x.probability = 1.0 / 3.0;
    x.q = {1.0, 1.0, 2.0};
    x.T = SparseMatrix::from_dense({{1, 0, 0, static_cast<double>(s)}, {0, 1, 0, 0}});
    x.h = {1.0, 2.0};
    x.row_senses = {RowSense::GreaterEqual, RowSense::GreaterEqual};
    x.lower.assign(3, 0.0);
    x.upper.assign(3, 10.0);
    sc.push_back(x);
  }
  const TwoStageProblem p = build_problem(f, shape, sc);
  const LPInstance dep = build_deterministic_equivalent(p);
  EXPECT_EQ(dep.cols(), 4u + 9u);
  EXPECT_EQ(dep.rows(), 2u + 3u * 2u);
  EXPECT_EQ(dep.matrix.cols(), 13u);
  EXPECT_EQ(dep.matrix.rows(), 8u);
  // nonzeros: A (4) + per scenario T (2 or 3) + W (4)
  EXPECT_EQ(dep.matrix.nonzeros(), 4u + (2 + 3 + 3) + 3u * 4u);
}

TEST(DeterministicEquivalent, OneScenarioCollapse) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TwoStageProblem r = fixtures::random_problem(seed);
    const TwoStageProblem p = only_scenario(r, 0);
    const double dep = solve_value(build_deterministic_equivalent(p));
    EXPECT_NEAR(solve_value(build_wait_and_see(p, 0)), dep, 1e-9 * (1 + std::abs(dep)));
    EXPECT_NEAR(solve_value(build_expected_value_problem(p)), dep, 1e-9 * (1 + std::abs(dep)));
  }
}

TEST(DeterministicEquivalent, SenseRoundTrip) {
  // Declaring the first stage as maximization of -c leaves the argmin and
  // flips the objective sign.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TwoStageProblem p = fixtures::random_problem(seed);
    TwoStageProblem flipped = p;
    flipped.first.sense = p.first.sense == Sense::Minimize ? Sense::Maximize : Sense::Minimize;
    for (double& c : flipped.first.c) c = -c;
    flipped.shape.sense = p.shape.sense == Sense::Minimize ? Sense::Maximize : Sense::Minimize;
    for (auto& sc : flipped.scenarios) {
      for (double& q : sc.q) q = -q;
    }
    const LPSolution a = solve(build_deterministic_equivalent(p));
    const LPSolution b = solve(build_deterministic_equivalent(flipped));
    ASSERT_EQ(a.status, SolveStatus::Optimal);
    ASSERT_EQ(b.status, SolveStatus::Optimal);
    EXPECT_NEAR(a.objective, -b.objective, 1e-9 * (1 + std::abs(a.objective)));
  }
}

TEST(WaitAndSee, SimpleSecondScenarioMatchesSingletonDep) {
  const TwoStageProblem p = fixtures::simple();
  const double ws = solve_value(build_wait_and_see(p, 1));
  const double dep = solve_value(build_deterministic_equivalent(only_scenario(p, 1)));
  EXPECT_NEAR(ws, dep, 1e-9);
  EXPECT_THROW(build_wait_and_see(p, 2), Error);
}

TEST(ExpectedScenario, FarmerMeanYield) {
  const Scenario mean = expected_scenario(fixtures::farmer().scenarios);
  EXPECT_EQ(mean.probability, 1.0);
  EXPECT_NEAR(mean.T.coeff(0, 0), 2.5, 1e-12);
  EXPECT_NEAR(mean.T.coeff(1, 1), 3.0, 1e-12);
  EXPECT_NEAR(mean.T.coeff(2, 2), 20.0, 1e-12);
}

TEST(ExpectedScenario, WeightedPriceAndDemand) {
  const Scenario mean = expected_scenario(fixtures::simple().scenarios);
  EXPECT_NEAR(mean.q[0], 26.4, 1e-12);
  EXPECT_NEAR(mean.upper[0], 0.4 * 500 + 0.6 * 300, 1e-12);
  EXPECT_THROW(expected_scenario({}), Error);
}

TEST(ExpectedScenario, SingleScenarioIsItself) {
  const TwoStageProblem p = fixtures::farmer();
  const Scenario mean = expected_scenario({p.scenarios[1]});
  EXPECT_EQ(mean.q, p.scenarios[1].q);
  EXPECT_EQ(mean.h, p.scenarios[1].h);
  EXPECT_EQ(mean.T, p.scenarios[1].T);
}

TEST(ExpectedValueProblem, SimpleMatchesSingletonDep) {
  const TwoStageProblem p = fixtures::simple();
  TwoStageProblem ev = build_problem(p.first, p.shape, {expected_scenario(p.scenarios)});
  EXPECT_NEAR(solve_value(build_expected_value_problem(p)), solve_value(build_deterministic_equivalent(ev)), 1e-9);
}

TEST(RecourseLp, FixingFirstStageMatchesDep) {
  const TwoStageProblem p = fixtures::farmer();
  const std::vector<double> x{170, 80, 250};
  double total = 0.0;
  for (double c : {150.0 * 170, 230.0 * 80, 260.0 * 250}) total += c;
  for (std::size_t s = 0; s < p.num_scenarios(); ++s) {
    total += p.scenarios[s].probability * solve_value(build_recourse_lp(p, s, x));
  }
  EXPECT_NEAR(total, -108390.0, 1e-6);
}

TEST(Validate, CleanFarmer) { EXPECT_TRUE(validate(fixtures::farmer()).empty()); }

TEST(Validate, ReportsDriftAndZeroRow) {
  TwoStageProblem p = fixtures::simple();
  p.scenarios[1].probability = 0.57;
  p.shape.W = SparseMatrix::from_dense({{6.0, 10.0}, {0.0, 0.0}});
  const auto diags = validate(p);
  bool drift = false, zero_row = false;
  for (const auto& d : diags) {
    if (d.message.find("0.97") != std::string::npos) drift = true;
    if (d.message.find("line2") != std::string::npos) zero_row = true;
  }
  EXPECT_TRUE(drift);
  EXPECT_TRUE(zero_row);
}

TEST(Validate, ReportsDimensionProblemsWithoutThrowing) {
  TwoStageProblem p = fixtures::simple();
  p.scenarios[0].q.pop_back();
  const auto diags = validate(p);
  ASSERT_FALSE(diags.empty());
  EXPECT_EQ(diags[0].severity, Severity::Error);
}

TEST(RandomProblem, SeedsAreReproducible) {
  const TwoStageProblem a = fixtures::random_problem(42);
  const TwoStageProblem b = fixtures::random_problem(42);
  ASSERT_EQ(a.num_scenarios(), b.num_scenarios());
  for (std::size_t s = 0; s < a.num_scenarios(); ++s) {
    EXPECT_EQ(a.scenarios[s].q, b.scenarios[s].q);
    EXPECT_EQ(a.scenarios[s].T, b.scenarios[s].T);
  }
}

TEST(RandomProblem, ExtensiveFormsAreSolvable) {
  for (bool complete : {true, false}) {
    fixtures::RandomSpec spec;
    spec.complete_recourse = complete;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const TwoStageProblem p = fixtures::random_problem(seed, spec);
      EXPECT_EQ(solve(build_deterministic_equivalent(p)).status, SolveStatus::Optimal) << seed;
    }
  }
}

}  // namespace
}  // namespace stochlp
