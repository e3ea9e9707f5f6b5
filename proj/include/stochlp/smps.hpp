#ifndef STOCHLP_SMPS_HPP
#define STOCHLP_SMPS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "stochlp/model.hpp"

namespace stochlp {

/// Contents of a CORE / TIME / STOCH file set. The names are used in error
/// messages only.
struct SmpsTriplet {
  std::string core;
  std::string time;
  std::string stoch;
  std::string core_name = "CORE";
  std::string time_name = "TIME";
  std::string stoch_name = "STOCH";
};

struct SmpsOptions {
  /// Largest scenario count the discrete cross product may produce.
  std::size_t scenario_cap = 100000;
};

/// Reads a two-period SMPS problem. CORE may be fixed or free MPS; TIME must
/// use implicit PERIODS markers; STOCH may contain INDEP DISCRETE and BLOCKS
/// DISCRETE sections (REPLACE, ADD or MULTIPLY). Random data may sit in the
/// second-stage costs, in T and in h.
TwoStageProblem read_smps(const SmpsTriplet& files, const SmpsOptions& opts = {});

TwoStageProblem read_smps_files(const std::string& core_path, const std::string& time_path,
                                const std::string& stoch_path, const SmpsOptions& opts = {});

/// Sizes of an SMPS problem, read without expanding the scenario set.
struct SmpsDimensions {
  std::size_t first_cols = 0;
  std::size_t first_rows = 0;
  std::size_t second_cols = 0;
  std::size_t second_rows = 0;
  std::size_t random_elements = 0;
  /// log10 of the cross-product scenario count.
  double log10_scenarios = 0.0;
};

SmpsDimensions smps_dimensions(const SmpsTriplet& files);
SmpsDimensions smps_dimensions_files(const std::string& core_path, const std::string& time_path,
                                     const std::string& stoch_path);

/// Which second-stage datum a random value replaces.
enum class RandomTarget { Cost, Rhs, Technology };
enum class ApplyMode { Replace, Add, Multiply };

struct RandomAssignment {
  RandomTarget target = RandomTarget::Rhs;
  std::size_t row = 0;  // h / T row
  std::size_t col = 0;  // q column or T column
  double value = 0.0;
  ApplyMode mode = ApplyMode::Replace;
};

struct RandomOutcome {
  double probability = 0.0;
  std::vector<RandomAssignment> assignments;
};

/// One independent random element: a single INDEP position or a BLOCK.
struct RandomElement {
  std::string name;
  std::vector<RandomOutcome> outcomes;
};

/// Joint scenarios over independent elements: one scenario per combination of
/// outcomes, with the product of outcome probabilities. The first element
/// varies slowest.
std::vector<Scenario> cross_product_scenarios(const Scenario& base, const std::vector<RandomElement>& elements,
                                              std::size_t cap = 100000);

}  // namespace stochlp

#endif  // STOCHLP_SMPS_HPP
