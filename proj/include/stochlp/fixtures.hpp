#ifndef STOCHLP_FIXTURES_HPP
#define STOCHLP_FIXTURES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "stochlp/model.hpp"

namespace stochlp::fixtures {

/// Two-product production planning problem ("simple"): first stage
/// min 100 x1 + 150 x2, x1 + x2 <= 120, x1 >= 40, x2 >= 20; second stage
/// max q1 y1 + q2 y2 with 6 y1 + 10 y2 <= 60 x1, 8 y1 + 5 y2 <= 80 x2 and
/// demand limits 0 <= y <= d. Two scenarios (q, d) with weights 0.4 / 0.6.
TwoStageProblem simple();

/// Builds the "simple" scenario for given prices and demands.
Scenario simple_scenario(double q1, double q2, double d1, double d2, double probability);

/// The "simple" first stage and recourse shape, for samplers.
TwoStageProblem simple_template();

/// Farmer land allocation with three equiprobable yield scenarios.
TwoStageProblem farmer();

/// Farmer problem for arbitrary yield triples (wheat, corn, beets).
TwoStageProblem farmer_with_yields(const std::vector<std::vector<double>>& yields,
                                   const std::vector<double>& probabilities);

/// Small instance without relatively complete recourse:
/// min -x + E[y] s.t. x + y = h, 0 <= x <= 10, y >= 0, h in {4, 6}.
TwoStageProblem norrc1();

struct RandomSpec {
  std::size_t max_first_cols = 6;
  std::size_t max_second_cols = 6;
  std::size_t max_second_rows = 6;
  std::size_t max_scenarios = 8;
  /// Add a penalty column so every first-stage point has a feasible recourse.
  bool complete_recourse = true;
};

/// Seeded random two-stage instance with bounded first-stage region and
/// bounded recourse. Identical seeds give identical instances on every
/// platform.
TwoStageProblem random_problem(std::uint64_t seed, const RandomSpec& spec = {});

/// Names accepted by `by_name`.
std::vector<std::string> names();
TwoStageProblem by_name(const std::string& name);

}  // namespace stochlp::fixtures

#endif  // STOCHLP_FIXTURES_HPP
