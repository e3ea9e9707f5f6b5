#ifndef STOCHLP_SERIALIZE_HPP
#define STOCHLP_SERIALIZE_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "stochlp/model.hpp"

namespace stochlp {

/// Native problem file: a single JSON document
///
///   {"format": "stochlp-problem", "version": 1,
///    "first": {...}, "recourse": {...}, "scenarios": [...]}
///
/// Sparse matrices are {"rows", "cols", "entries": [[i, j, v], ...]}.
/// Doubles are written in shortest round-trip form; infinite bounds are the
/// strings "inf" and "-inf".
inline constexpr const char* kProblemFormat = "stochlp-problem";
inline constexpr int kProblemFormatVersion = 1;

nlohmann::json problem_to_json(const TwoStageProblem& p);
/// Throws ParseError naming the offending field.
TwoStageProblem problem_from_json(const nlohmann::json& doc);

std::string problem_to_string(const TwoStageProblem& p);
TwoStageProblem problem_from_string(const std::string& text);

void save_problem(const TwoStageProblem& p, const std::string& path);
TwoStageProblem load_problem(const std::string& path);

/// Finite values become numbers, infinities "inf"/"-inf", NaN null.
nlohmann::json number_to_json(double v);
double number_from_json(const nlohmann::json& v, const std::string& field);
nlohmann::json vector_to_json(const std::vector<double>& v);

}  // namespace stochlp

#endif  // STOCHLP_SERIALIZE_HPP
