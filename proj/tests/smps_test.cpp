#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "stochlp/error.hpp"
#include "stochlp/fixtures.hpp"
#include "stochlp/smps.hpp"

namespace stochlp {
namespace {

const std::string kDir = std::string(STOCHLP_SOURCE_DIR) + "/fixtures/smps/";

double dep_value(const TwoStageProblem& p) {
  const LPSolution sol = solve_lp(build_deterministic_equivalent(p));
  EXPECT_EQ(sol.status, SolveStatus::Optimal);
  return sol.objective;
}

ErrorCode code_of(const SmpsTriplet& t, const SmpsOptions& opts = {}) {
  try {
    read_smps(t, opts);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

// Newsvendor-style toy: x costs 1, y sells at 1.5, y <= x, y <= demand.
const char* kCore =
    "NAME TOY\n"
    "ROWS\n"
    " N COST\n"
    " L BUDGET\n"
    " L CAP\n"
    " L DEM\n"
    "COLUMNS\n"
    " X COST 1 BUDGET 1\n"
    " X CAP -1\n"
    " Y COST -1.5 CAP 1\n"
    " Y DEM 1\n"
    "RHS\n"
    " RHS BUDGET 80 DEM 45\n"
    "BOUNDS\n"
    " UP BND X 100\n"
    "ENDATA\n";

const char* kTime =
    "TIME TOY\n"
    "PERIODS IMPLICIT\n"
    " X BUDGET P1\n"
    " Y CAP P2\n"
    "ENDATA\n";

SmpsTriplet toy(const std::string& stoch) {
  SmpsTriplet t;
  t.core = kCore;
  t.time = kTime;
  t.stoch = stoch;
  return t;
}

// Piecewise-linear in x with breakpoints at the demand values, so the
// minimum over x sits at 0 or one of them.
double newsvendor_oracle(const std::vector<double>& demand, const std::vector<double>& prob) {
  double best = 0.0;
  for (double x : demand) {
    double v = x;
    for (std::size_t k = 0; k < demand.size(); ++k) v -= 1.5 * prob[k] * std::min(x, demand[k]);
    best = std::min(best, v);
  }
  return best;
}

TEST(ReadSmps, ToyMatchesHandOracle) {
  const TwoStageProblem p = read_smps(toy("STOCH TOY\nINDEP DISCRETE\n RHS DEM 30 P2 0.4\n RHS DEM 60 P2 0.6\nENDATA\n"));
  ASSERT_EQ(p.num_scenarios(), 2u);
  EXPECT_EQ(p.first_cols(), 1u);
  EXPECT_EQ(p.second_cols(), 1u);
  EXPECT_EQ(p.second_rows(), 2u);
  EXPECT_DOUBLE_EQ(p.scenarios[0].h[1], 30.0);
  EXPECT_DOUBLE_EQ(p.scenarios[1].h[1], 60.0);
  EXPECT_DOUBLE_EQ(p.scenarios[0].T.coeff(0, 0), -1.0);
  EXPECT_NEAR(dep_value(p), newsvendor_oracle({30, 60}, {0.4, 0.6}), 1e-9);
  EXPECT_NEAR(dep_value(p), -15.0, 1e-9);
}

TEST(ReadSmps, FixtureFilesOnDisk) {
  const TwoStageProblem p =
      read_smps_files(kDir + "newsvendor.cor", kDir + "newsvendor.tim", kDir + "newsvendor.sto");
  EXPECT_EQ(p.num_scenarios(), 2u);
  EXPECT_NEAR(dep_value(p), -15.0, 1e-9);
}

TEST(ReadSmps, SingleOutcomeEqualsCoreLp) {
  const TwoStageProblem p = read_smps(toy("STOCH TOY\nINDEP DISCRETE\n RHS DEM 45 P2 1.0\nENDATA\n"));
  ASSERT_EQ(p.num_scenarios(), 1u);
  // CORE as a plain LP: min x - 1.5 y, y <= x, y <= 45, x <= 80.
  EXPECT_NEAR(dep_value(p), 45.0 - 1.5 * 45.0, 1e-9);
  const TwoStageProblem empty = read_smps(toy("STOCH TOY\nENDATA\n"));
  EXPECT_NEAR(dep_value(empty), dep_value(p), 1e-12);
}

TEST(ReadSmps, IndependentElementsMultiply) {
  const TwoStageProblem p = read_smps(
      toy("STOCH TOY\nINDEP DISCRETE\n"
          " RHS DEM 30 P2 0.4\n RHS DEM 60 P2 0.6\n"
          " Y COST -1.0 P2 0.2\n Y COST -1.5 P2 0.3\n Y COST -2.0 P2 0.5\n"
          "ENDATA\n"));
  ASSERT_EQ(p.num_scenarios(), 6u);
  const double expected[] = {0.08, 0.12, 0.2, 0.12, 0.18, 0.3};
  double total = 0.0;
  for (std::size_t s = 0; s < 6; ++s) {
    EXPECT_NEAR(p.scenarios[s].probability, expected[s], 1e-12);
    total += p.scenarios[s].probability;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  // first element varies slowest
  EXPECT_DOUBLE_EQ(p.scenarios[2].h[1], 30.0);
  EXPECT_DOUBLE_EQ(p.scenarios[3].h[1], 60.0);
  EXPECT_DOUBLE_EQ(p.scenarios[4].q[0], -1.5);
}

TEST(ReadSmps, AddAndMultiplyModes) {
  const TwoStageProblem add = read_smps(toy("STOCH TOY\nINDEP DISCRETE ADD\n RHS DEM 5 P2 0.5\n RHS DEM -5 P2 0.5\nENDATA\n"));
  EXPECT_DOUBLE_EQ(add.scenarios[0].h[1], 50.0);
  EXPECT_DOUBLE_EQ(add.scenarios[1].h[1], 40.0);
  const TwoStageProblem mul = read_smps(toy("STOCH TOY\nINDEP DISCRETE MULTIPLY\n X CAP 2 P2 1.0\nENDATA\n"));
  EXPECT_DOUBLE_EQ(mul.scenarios[0].T.coeff(0, 0), -2.0);
}

TEST(ReadSmps, BlocksReproduceFarmer) {
  // CORE from the farmer's first yield scenario, written by the MPS writer.
  const TwoStageProblem farmer = fixtures::farmer();
  SmpsTriplet t;
  t.core = to_mps(build_wait_and_see(farmer, 0), "FARMER");
  t.time = "TIME FARMER\nPERIODS\n x_wheat budget T1\n y_wheat min_wheat T2\nENDATA\n";
  t.stoch =
      "STOCH FARMER\n"
      "BLOCKS DISCRETE\n"
      " BL YIELD T2 0.3333333333333333\n"
      "  x_wheat min_wheat 3.0\n  x_corn min_corn 3.6\n  x_beets min_beets 24\n"
      " BL YIELD T2 0.3333333333333333\n"
      "  x_wheat min_wheat 2.5\n  x_corn min_corn 3.0 \n  x_beets min_beets 20\n"
      " BL YIELD T2 0.3333333333333334\n"
      "  x_wheat min_wheat 2.0\n  x_corn min_corn 2.4\n  x_beets min_beets 16\n"
      "ENDATA\n";
  const TwoStageProblem p = read_smps(t);
  ASSERT_EQ(p.num_scenarios(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_EQ(p.scenarios[s].T, farmer.scenarios[s].T);
    EXPECT_EQ(p.scenarios[s].q, farmer.scenarios[s].q);
    EXPECT_EQ(p.scenarios[s].h, farmer.scenarios[s].h);
    EXPECT_EQ(p.scenarios[s].row_senses, farmer.scenarios[s].row_senses);
  }
  EXPECT_EQ(p.first.A, farmer.first.A);
  EXPECT_EQ(p.shape.W, farmer.shape.W);
  EXPECT_NEAR(dep_value(p), -108390.0, 1e-6);
}

TEST(ReadSmps, MpsRoundTripKeepsExpectedValue) {
  const TwoStageProblem orig = read_smps(toy("STOCH TOY\nINDEP DISCRETE\n RHS DEM 30 P2 0.4\n RHS DEM 60 P2 0.6\nENDATA\n"));
  const double ev = solve_lp(build_expected_value_problem(orig)).objective;
  SmpsTriplet t;
  t.core = to_mps(build_wait_and_see(orig, 0), "TOY");
  t.time = kTime;
  t.stoch = "STOCH TOY\nINDEP DISCRETE\n RHS DEM 30 P2 0.4\n RHS DEM 60 P2 0.6\nENDATA\n";
  const TwoStageProblem again = read_smps(t);
  EXPECT_NEAR(solve_lp(build_expected_value_problem(again)).objective, ev, 1e-9);
  EXPECT_NEAR(dep_value(again), dep_value(orig), 1e-9);
}

std::string fixed(const std::vector<std::string>& fields) {
  static constexpr std::size_t start[] = {1, 4, 14, 24, 39, 49};
  std::string line;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (fields[k].empty()) continue;
    line.resize(start[k], ' ');
    line += fields[k];
  }
  return line + "\n";
}

TEST(ReadSmps, FixedFormatNamesWithSpaces) {
  // "BUD GET" only parses by column position.
  std::string core = "NAME          TOY\nROWS\n";
  core += fixed({"N", "COST"}) + fixed({"G", "BUD GET"}) + fixed({"L", "CAP"}) + fixed({"L", "DEM"});
  core += "COLUMNS\n";
  core += fixed({"", "X", "COST", "1", "BUD GET", "1"}) + fixed({"", "X", "CAP", "-1"});
  core += fixed({"", "Y", "COST", "-1.5", "CAP", "1"}) + fixed({"", "Y", "DEM", "1"});
  core += "RHS\n" + fixed({"", "", "DEM", "45"});
  core += "BOUNDS\n" + fixed({"UP", "BND", "X", "100"}) + "ENDATA\n";
  SmpsTriplet t = toy("STOCH TOY\nINDEP DISCRETE\n RHS DEM 30 P2 0.4\n RHS DEM 60 P2 0.6\nENDATA\n");
  t.core = core;
  const TwoStageProblem p = read_smps(t);
  ASSERT_EQ(p.first.row_names.size(), 1u);
  EXPECT_EQ(p.first.row_names[0], "BUD GET");
  EXPECT_EQ(p.first.row_senses[0], RowSense::GreaterEqual);
  EXPECT_NEAR(dep_value(p), -15.0, 1e-9);
}

TEST(ReadSmps, ObjectiveSenseAndBounds) {
  std::string core = kCore;
  core.insert(core.find("ROWS"), "OBJSENSE\n    MAX\n");
  // Maximizing x - 1.5 y pushes x to its budget and y to zero.
  SmpsTriplet t = toy("STOCH TOY\nINDEP DISCRETE\n RHS DEM 30 P2 1.0\nENDATA\n");
  t.core = core;
  const TwoStageProblem p = read_smps(t);
  EXPECT_EQ(p.first.sense, Sense::Maximize);
  EXPECT_NEAR(dep_value(p), 80.0, 1e-9);

  std::string neg = kCore;
  neg.replace(neg.find(" UP BND X 100"), 13, " UP BND Y -2");
  t.core = neg;
  const TwoStageProblem q = read_smps(t);
  EXPECT_EQ(q.scenarios[0].lower[0], -kInf);
  EXPECT_EQ(q.scenarios[0].upper[0], -2.0);
}

TEST(ReadSmps, ObjectiveRhsIsNegatedOffset) {
  std::string core = kCore;
  core.insert(core.find(" RHS BUDGET 80"), " RHS COST 7\n");
  SmpsTriplet t = toy("STOCH TOY\nINDEP DISCRETE\n RHS DEM 30 P2 1.0\nENDATA\n");
  t.core = core;
  EXPECT_DOUBLE_EQ(read_smps(t).first.offset, -7.0);
  EXPECT_NEAR(dep_value(read_smps(t)), -7.0 + 30.0 - 45.0, 1e-9);
}

TEST(ReadSmps, RejectsScenariosSection) {
  EXPECT_EQ(code_of(toy("STOCH TOY\nSCENARIOS DISCRETE\n SC S1 ROOT 0.5 P2\nENDATA\n")),
            ErrorCode::UnsupportedSection);
  EXPECT_EQ(code_of(toy("STOCH TOY\nINDEP NORMAL\n RHS DEM 30 P2 4\nENDATA\n")), ErrorCode::UnsupportedSection);
}

TEST(ReadSmps, RejectsMoreThanTwoPeriods) {
  SmpsTriplet t = toy("STOCH TOY\nENDATA\n");
  t.time = "TIME TOY\nPERIODS\n X BUDGET P1\n Y CAP P2\n Y DEM P3\nENDATA\n";
  EXPECT_EQ(code_of(t), ErrorCode::TwoPeriodOnly);
}

TEST(ReadSmps, RejectsRandomRecourseMatrix) {
  EXPECT_EQ(code_of(toy("STOCH TOY\nINDEP DISCRETE\n Y CAP 2 P2 1.0\nENDATA\n")), ErrorCode::ParseError);
}

TEST(ReadSmps, ScenarioCap) {
  std::string stoch = "STOCH TOY\nINDEP DISCRETE\n";
  stoch += " RHS DEM 30 P2 0.5\n RHS DEM 60 P2 0.5\n";
  stoch += " Y COST -1 P2 0.5\n Y COST -2 P2 0.5\n";
  stoch += " X CAP -1 P2 0.5\n X CAP -2 P2 0.5\n";
  SmpsOptions opts;
  opts.scenario_cap = 7;
  EXPECT_EQ(code_of(toy(stoch + "ENDATA\n"), opts), ErrorCode::ScenarioExplosion);
  opts.scenario_cap = 8;
  const TwoStageProblem p = read_smps(toy(stoch + "ENDATA\n"), opts);
  ASSERT_EQ(p.num_scenarios(), 8u);
  for (const auto& s : p.scenarios) EXPECT_NEAR(s.probability, 0.125, 1e-15);
}

TEST(ReadSmps, DimensionsWithoutExpansion) {
  std::string stoch = "STOCH TOY\nINDEP DISCRETE\n";
  for (int k = 0; k < 3; ++k) stoch += " RHS DEM " + std::to_string(10 * k) + (k < 2 ? " P2 0.25\n" : " P2 0.5\n");
  stoch += " Y COST -1 P2 0.5\n Y COST -2 P2 0.5\nENDATA\n";
  const SmpsDimensions d = smps_dimensions(toy(stoch));
  EXPECT_EQ(d.first_cols, 1u);
  EXPECT_EQ(d.first_rows, 1u);
  EXPECT_EQ(d.second_cols, 1u);
  EXPECT_EQ(d.second_rows, 2u);
  EXPECT_EQ(d.random_elements, 2u);
  EXPECT_NEAR(d.log10_scenarios, std::log10(6.0), 1e-12);
  const SmpsDimensions f = smps_dimensions_files(kDir + "newsvendor.cor", kDir + "newsvendor.tim", kDir + "newsvendor.sto");
  EXPECT_EQ(f.second_rows, 2u);
}

TEST(ReadSmps, ParseErrorsCarryLineNumbers) {
  SmpsTriplet t = toy("STOCH TOY\nINDEP DISCRETE\n RHS DEM thirty P2 0.4\n RHS DEM 60 P2 0.6\nENDATA\n");
  t.stoch_name = "toy.sto";
  try {
    read_smps(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("toy.sto:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("thirty"), std::string::npos) << msg;
  }
  EXPECT_EQ(code_of(toy("STOCH TOY\nINDEP DISCRETE\n RHS DEM 30 P2 0.4\n RHS DEM 60 P2 0.5\nENDATA\n")),
            ErrorCode::ParseError);
  SmpsTriplet bad = toy("STOCH TOY\nENDATA\n");
  bad.core = std::string(kCore).replace(std::string(kCore).find(" Y DEM 1"), 8, " Y NOPE 1");
  EXPECT_EQ(code_of(bad), ErrorCode::ParseError);
}

TEST(CrossProduct, ProductOfOutcomes) {
  Scenario base;
  base.q = {1.0};
  base.h = {0.0, 0.0};
  base.T = SparseMatrix(2, 1);
  auto rhs = [](std::size_t row, double v, double p) {
    return RandomOutcome{p, {RandomAssignment{RandomTarget::Rhs, row, 0, v, ApplyMode::Replace}}};
  };
  const std::vector<RandomElement> elems = {{"a", {rhs(0, 1, 0.5), rhs(0, 2, 0.5)}},
                                            {"b", {rhs(1, 1, 0.2), rhs(1, 2, 0.3), rhs(1, 3, 0.5)}}};
  const auto sc = cross_product_scenarios(base, elems);
  ASSERT_EQ(sc.size(), 6u);
  EXPECT_NEAR(sc[0].probability, 0.1, 1e-15);
  EXPECT_NEAR(sc[5].probability, 0.25, 1e-15);
  EXPECT_EQ(sc[4].h, (std::vector<double>{2.0, 2.0}));
  try {
    cross_product_scenarios(base, elems, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ScenarioExplosion);
    EXPECT_NE(std::string(e.what()).find("sample"), std::string::npos);
  }
}

}  // namespace
}  // namespace stochlp
