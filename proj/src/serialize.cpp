#include "stochlp/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "stochlp/error.hpp"

namespace stochlp {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ParseError, "field '" + field + "': " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) bad(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) bad(path + "." + key, "missing");
  return *it;
}

std::vector<double> numbers(const json& v, const std::string& field) {
  if (!v.is_array()) bad(field, "expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number_from_json(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::string> strings(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) return {};
  const json& v = obj[key];
  if (!v.is_array()) bad(path + "." + key, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) bad(path + "." + key, "expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

json matrix_to_json(const SparseMatrix& m) {
  json entries = json::array();
  for (const auto& t : m.triplets()) entries.push_back(json::array({t.row, t.col, t.value}));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

SparseMatrix matrix_from_json(const json& v, const std::string& field) {
  const json& rows = member(v, "rows", field);
  const json& cols = member(v, "cols", field);
  const json& entries = member(v, "entries", field);
  if (!rows.is_number_unsigned() || !cols.is_number_unsigned()) bad(field, "rows/cols must be nonnegative integers");
  if (!entries.is_array()) bad(field + ".entries", "expected an array");
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const json& e = entries[k];
    const std::string where = field + ".entries[" + std::to_string(k) + "]";
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
      bad(where, "expected [row, col, value]");
    }
    t.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>(), number_from_json(e[2], where)});
  }
  try {
    return SparseMatrix::from_triplets(rows.get<std::size_t>(), cols.get<std::size_t>(), std::move(t));
  } catch (const Error& e) {
    bad(field, e.what());
  }
}

std::string sense_name(Sense s) { return s == Sense::Minimize ? "min" : "max"; }

Sense sense_from(const json& v, const std::string& field) {
  if (v == "min") return Sense::Minimize;
  if (v == "max") return Sense::Maximize;
  bad(field, "expected \"min\" or \"max\"");
}

json row_senses_to_json(const std::vector<RowSense>& s) {
  json out = json::array();
  for (RowSense r : s) out.push_back(to_string(r));
  return out;
}

std::vector<RowSense> row_senses_from(const json& v, const std::string& field) {
  if (!v.is_array()) bad(field, "expected an array");
  std::vector<RowSense> out;
  for (const auto& e : v) {
    if (e == "=") {
      out.push_back(RowSense::Equal);
    } else if (e == "<=") {
      out.push_back(RowSense::LessEqual);
    } else if (e == ">=") {
      out.push_back(RowSense::GreaterEqual);
    } else {
      bad(field, "row sense must be one of \"=\", \"<=\", \">=\"");
    }
  }
  return out;
}

}  // namespace

json number_to_json(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v == "inf") return kInf;
  if (v == "-inf") return -kInf;
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  bad(field, "expected a number");
}

json vector_to_json(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number_to_json(x));
  return out;
}

json problem_to_json(const TwoStageProblem& p) {
  const FirstStage& f = p.first;
  json first = {{"sense", sense_name(f.sense)},
                {"c", vector_to_json(f.c)},
                {"offset", number_to_json(f.offset)},
                {"A", matrix_to_json(f.A)},
                {"row_senses", row_senses_to_json(f.row_senses)},
                {"b", vector_to_json(f.b)},
                {"lower", vector_to_json(f.lower)},
                {"upper", vector_to_json(f.upper)},
                {"col_names", f.col_names},
                {"row_names", f.row_names}};
  json recourse = {{"sense", sense_name(p.shape.sense)},
                   {"W", matrix_to_json(p.shape.W)},
                   {"col_names", p.shape.col_names},
                   {"row_names", p.shape.row_names}};
  json scenarios = json::array();
  for (const Scenario& s : p.scenarios) {
    scenarios.push_back({{"name", s.name},
                         {"probability", number_to_json(s.probability)},
                         {"q", vector_to_json(s.q)},
                         {"T", matrix_to_json(s.T)},
                         {"h", vector_to_json(s.h)},
                         {"row_senses", row_senses_to_json(s.row_senses)},
                         {"lower", vector_to_json(s.lower)},
                         {"upper", vector_to_json(s.upper)}});
  }
  return {{"format", kProblemFormat},
          {"version", kProblemFormatVersion},
          {"first", first},
          {"recourse", recourse},
          {"scenarios", scenarios}};
}

TwoStageProblem problem_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != kProblemFormat) {
    bad("format", std::string("expected \"") + kProblemFormat + "\"");
  }
  if (doc.value("version", 0) != kProblemFormatVersion) {
    bad("version", "unsupported version (this build reads version " + std::to_string(kProblemFormatVersion) + ")");
  }
  TwoStageProblem p;
  const json& first = member(doc, "first", "");
  FirstStage& f = p.first;
  f.sense = sense_from(member(first, "sense", "first"), "first.sense");
  f.c = numbers(member(first, "c", "first"), "first.c");
  if (first.contains("offset")) f.offset = number_from_json(first["offset"], "first.offset");
  f.A = matrix_from_json(member(first, "A", "first"), "first.A");
  f.row_senses = row_senses_from(member(first, "row_senses", "first"), "first.row_senses");
  f.b = numbers(member(first, "b", "first"), "first.b");
  f.lower = numbers(member(first, "lower", "first"), "first.lower");
  f.upper = numbers(member(first, "upper", "first"), "first.upper");
  f.col_names = strings(first, "col_names", "first");
  f.row_names = strings(first, "row_names", "first");

  const json& rec = member(doc, "recourse", "");
  p.shape.sense = sense_from(member(rec, "sense", "recourse"), "recourse.sense");
  p.shape.W = matrix_from_json(member(rec, "W", "recourse"), "recourse.W");
  p.shape.col_names = strings(rec, "col_names", "recourse");
  p.shape.row_names = strings(rec, "row_names", "recourse");

  const json& scs = member(doc, "scenarios", "");
  if (!scs.is_array()) bad("scenarios", "expected an array");
  for (std::size_t k = 0; k < scs.size(); ++k) {
    const std::string path = "scenarios[" + std::to_string(k) + "]";
    const json& s = scs[k];
    Scenario sc;
    if (s.contains("name") && s["name"].is_string()) sc.name = s["name"].get<std::string>();
    sc.probability = number_from_json(member(s, "probability", path), path + ".probability");
    sc.q = numbers(member(s, "q", path), path + ".q");
    sc.T = matrix_from_json(member(s, "T", path), path + ".T");
    sc.h = numbers(member(s, "h", path), path + ".h");
    sc.row_senses = row_senses_from(member(s, "row_senses", path), path + ".row_senses");
    sc.lower = numbers(member(s, "lower", path), path + ".lower");
    sc.upper = numbers(member(s, "upper", path), path + ".upper");
    p.scenarios.push_back(std::move(sc));
  }
  // Stored probabilities are already normalized; rebuilding through
  // build_problem would rescale them and break bit-exact round trips.
  for (const Diagnostic& d : validate(p)) {
    if (d.severity == Severity::Error) throw Error(ErrorCode::ParseError, d.message);
  }
  double total = 0.0;
  for (const auto& sc : p.scenarios) total += sc.probability;
  if (std::abs(total - 1.0) > 1e-6) {
    p = build_problem(std::move(p.first), std::move(p.shape), std::move(p.scenarios));
  }
  return p;
}

std::string problem_to_string(const TwoStageProblem& p) { return problem_to_json(p).dump(1) + "\n"; }

TwoStageProblem problem_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return problem_from_json(doc);
}

void save_problem(const TwoStageProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  out << problem_to_string(p);
}

TwoStageProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return problem_from_string(os.str());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw Error(ErrorCode::ParseError, path + ": " + e.what());
    throw;
  }
}

}  // namespace stochlp
