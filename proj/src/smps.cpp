#include "stochlp/smps.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "stochlp/error.hpp"

namespace stochlp {

namespace {

struct Line {
  std::size_t number = 0;
  std::string text;
  std::vector<std::string> tokens;
  bool header = false;
};

std::vector<Line> lex(const std::string& content) {
  std::vector<Line> out;
  std::istringstream in(content);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty() || raw[0] == '*') continue;
    Line line;
    line.number = number;
    line.text = raw;
    std::istringstream ts(raw);
    std::string tok;
    while (ts >> tok) line.tokens.push_back(tok);
    if (line.tokens.empty()) continue;
    line.header = !std::isspace(static_cast<unsigned char>(raw[0]));
    out.push_back(std::move(line));
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const Line& line, const std::string& what) const {
    std::string tok = line.tokens.empty() ? "" : line.tokens.front();
    throw Error(ErrorCode::ParseError,
                file_ + ":" + std::to_string(line.number) + ": " + what + " (at '" + tok + "')");
  }
  [[noreturn]] void unsupported(const Line& line, const std::string& section) const {
    throw Error(ErrorCode::UnsupportedSection, file_ + ":" + std::to_string(line.number) + ": section " +
                                                   section + " is not supported");
  }

  double number(const Line& line, const std::string& tok) const {
    double v = 0.0;
    const char* b = tok.data();
    const char* e = b + tok.size();
    if (!tok.empty() && *b == '+') ++b;
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e) {
      // from_chars rejects things like "1.e5" on some libraries; fall back
      try {
        std::size_t used = 0;
        v = std::stod(tok, &used);
        if (used != tok.size()) fail(line, "malformed number '" + tok + "'");
      } catch (const std::logic_error&) {
        fail(line, "malformed number '" + tok + "'");
      }
    }
    return v;
  }

  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Fixed-format MPS fields 1..6 (columns 2-3, 5-12, 15-22, 25-36, 40-47,
// 50-61), trimmed.
std::vector<std::string> fixed_fields(const std::string& text) {
  static constexpr std::size_t start[] = {1, 4, 14, 24, 39, 49};
  static constexpr std::size_t len[] = {2, 8, 8, 12, 8, 12};
  std::vector<std::string> f(6);
  for (std::size_t k = 0; k < 6; ++k) {
    if (start[k] >= text.size()) break;
    std::string s = text.substr(start[k], len[k]);
    const auto a = s.find_first_not_of(' ');
    const auto b = s.find_last_not_of(' ');
    f[k] = a == std::string::npos ? "" : s.substr(a, b - a + 1);
  }
  return f;
}

struct CoreLp {
  std::string name;
  Sense sense = Sense::Minimize;
  std::string objective_row;
  std::vector<std::string> row_names;  // constraint rows only
  std::vector<RowSense> row_senses;
  std::unordered_map<std::string, std::size_t> row_index;
  std::vector<std::string> free_rows;  // extra N rows, ignored
  std::vector<std::string> col_names;
  std::unordered_map<std::string, std::size_t> col_index;
  std::vector<double> cost;
  std::vector<Triplet> entries;
  std::vector<double> rhs;
  double offset = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> rhs_sets;
};

CoreLp parse_core(const std::string& content, const Reader& rd) {
  CoreLp lp;
  const auto lines = lex(content);
  std::string section;
  bool ended = false;
  auto is_free_row = [&](const std::string& r) {
    return std::find(lp.free_rows.begin(), lp.free_rows.end(), r) != lp.free_rows.end();
  };
  auto add_coeff = [&](const Line& line, std::size_t col, const std::string& row, const std::string& val) {
    const double v = rd.number(line, val);
    if (row == lp.objective_row) {
      lp.cost[col] += v;
      return;
    }
    if (is_free_row(row)) return;
    const auto it = lp.row_index.find(row);
    if (it == lp.row_index.end()) rd.fail(line, "unknown row '" + row + "'");
    lp.entries.push_back({it->second, col, v});
  };
  auto set_rhs = [&](const Line& line, const std::string& row, const std::string& val) {
    const double v = rd.number(line, val);
    if (row == lp.objective_row) {
      lp.offset = -v;
      return;
    }
    if (is_free_row(row)) return;
    const auto it = lp.row_index.find(row);
    if (it == lp.row_index.end()) rd.fail(line, "unknown row '" + row + "'");
    lp.rhs[it->second] = v;
  };
  auto column = [&](const Line& line, const std::string& name) -> std::size_t {
    const auto it = lp.col_index.find(name);
    if (it != lp.col_index.end()) return it->second;
    if (!lp.row_names.empty() && lp.rhs.size() != lp.row_names.size()) lp.rhs.assign(lp.row_names.size(), 0.0);
    (void)line;
    const std::size_t j = lp.col_names.size();
    lp.col_index.emplace(name, j);
    lp.col_names.push_back(name);
    lp.cost.push_back(0.0);
    lp.lower.push_back(0.0);
    lp.upper.push_back(kInf);
    return j;
  };
  auto known_column = [&](const Line& line, const std::string& name) {
    const auto it = lp.col_index.find(name);
    if (it == lp.col_index.end()) rd.fail(line, "unknown column '" + name + "'");
    return it->second;
  };

  for (const Line& line : lines) {
    if (ended) break;
    if (line.header) {
      const std::string key = upper(line.tokens[0]);
      if (key == "NAME") {
        lp.name = line.tokens.size() > 1 ? line.tokens[1] : "";
        section.clear();
      } else if (key == "OBJSENSE") {
        section = key;
        if (line.tokens.size() > 1) {
          const std::string s = upper(line.tokens[1]);
          lp.sense = (s == "MAX" || s == "MAXIMIZE") ? Sense::Maximize : Sense::Minimize;
        }
      } else if (key == "ROWS" || key == "COLUMNS" || key == "RHS" || key == "BOUNDS") {
        section = key;
        if (key != "ROWS") lp.rhs.resize(lp.row_names.size(), 0.0);
      } else if (key == "ENDATA") {
        ended = true;
      } else {
        rd.unsupported(line, line.tokens[0]);
      }
      continue;
    }
    const auto& t = line.tokens;
    if (section == "OBJSENSE") {
      const std::string s = upper(t[0]);
      if (s == "MAX" || s == "MAXIMIZE") {
        lp.sense = Sense::Maximize;
      } else if (s == "MIN" || s == "MINIMIZE") {
        lp.sense = Sense::Minimize;
      } else {
        rd.fail(line, "expected MIN or MAX");
      }
    } else if (section == "ROWS") {
      std::string type, name;
      if (t.size() == 2) {
        type = t[0];
        name = t[1];
      } else {
        const auto f = fixed_fields(line.text);
        type = f[0];
        name = f[1];
        if (type.empty() || name.empty()) rd.fail(line, "expected row type and name");
      }
      type = upper(type);
      if (type == "N") {
        if (lp.objective_row.empty()) {
          lp.objective_row = name;
        } else {
          lp.free_rows.push_back(name);
        }
        continue;
      }
      RowSense s;
      if (type == "E") {
        s = RowSense::Equal;
      } else if (type == "L") {
        s = RowSense::LessEqual;
      } else if (type == "G") {
        s = RowSense::GreaterEqual;
      } else {
        rd.fail(line, "unknown row type '" + type + "'");
      }
      if (lp.row_index.count(name) || name == lp.objective_row) rd.fail(line, "duplicate row '" + name + "'");
      lp.row_index.emplace(name, lp.row_names.size());
      lp.row_names.push_back(name);
      lp.row_senses.push_back(s);
    } else if (section == "COLUMNS") {
      if (t.size() >= 3 && (t[1] == "'MARKER'" || t[2] == "'MARKER'")) {
        rd.fail(line, "integer markers are not supported");
      }
      std::vector<std::string> f;
      if (t.size() == 3 || t.size() == 5) {
        f = t;
      } else {
        const auto x = fixed_fields(line.text);
        f = {x[1], x[2], x[3]};
        if (!x[4].empty()) {
          f.push_back(x[4]);
          f.push_back(x[5]);
        }
        if (f[0].empty() || f[1].empty() || f[2].empty()) rd.fail(line, "expected column, row, value");
      }
      const std::size_t j = column(line, f[0]);
      add_coeff(line, j, f[1], f[2]);
      if (f.size() == 5) add_coeff(line, j, f[3], f[4]);
    } else if (section == "RHS") {
      std::vector<std::string> f;
      if (t.size() == 3 || t.size() == 5) {
        f = t;
      } else if (t.size() == 2 || t.size() == 4) {
        f = t;
        f.insert(f.begin(), "RHS");
      } else {
        const auto x = fixed_fields(line.text);
        f = {x[1].empty() ? "RHS" : x[1], x[2], x[3]};
        if (!x[4].empty()) {
          f.push_back(x[4]);
          f.push_back(x[5]);
        }
      }
      if (std::find(lp.rhs_sets.begin(), lp.rhs_sets.end(), f[0]) == lp.rhs_sets.end()) lp.rhs_sets.push_back(f[0]);
      set_rhs(line, f[1], f[2]);
      if (f.size() == 5) set_rhs(line, f[3], f[4]);
    } else if (section == "BOUNDS") {
      const std::string type = upper(t[0]);
      const bool valued = type == "UP" || type == "LO" || type == "FX";
      const bool valueless = type == "FR" || type == "MI" || type == "PL";
      if (!valued && !valueless) rd.fail(line, "unsupported bound type '" + t[0] + "'");
      std::string col, val;
      if (valued && t.size() == 4) {
        col = t[2];
        val = t[3];
      } else if (valued && t.size() == 3) {
        col = t[1];
        val = t[2];
      } else if (valueless && t.size() == 3) {
        col = t[2];
      } else if (valueless && t.size() == 2) {
        col = t[1];
      } else {
        const auto x = fixed_fields(line.text);
        col = x[2];
        val = x[3];
        if (col.empty() || (valued && val.empty())) rd.fail(line, "malformed bound");
      }
      const std::size_t j = known_column(line, col);
      if (type == "UP") {
        const double v = rd.number(line, val);
        lp.upper[j] = v;
        if (v < 0.0 && lp.lower[j] == 0.0) lp.lower[j] = -kInf;
      } else if (type == "LO") {
        lp.lower[j] = rd.number(line, val);
      } else if (type == "FX") {
        lp.lower[j] = lp.upper[j] = rd.number(line, val);
      } else if (type == "FR") {
        lp.lower[j] = -kInf;
        lp.upper[j] = kInf;
      } else if (type == "MI") {
        lp.lower[j] = -kInf;
      } else {
        lp.upper[j] = kInf;
      }
    } else {
      rd.fail(line, "data outside of a section");
    }
  }
  if (lp.objective_row.empty()) throw Error(ErrorCode::ParseError, rd.file() + ": no objective (N) row");
  lp.rhs.resize(lp.row_names.size(), 0.0);
  return lp;
}

struct Periods {
  std::size_t first_stage2_col = 0;
  std::size_t first_stage2_row = 0;
};

Periods parse_time(const std::string& content, const CoreLp& core, const Reader& rd) {
  const auto lines = lex(content);
  std::vector<const Line*> markers;
  std::string section;
  for (const Line& line : lines) {
    if (line.header) {
      const std::string key = upper(line.tokens[0]);
      if (key == "TIME") {
        section.clear();
      } else if (key == "PERIODS") {
        if (line.tokens.size() > 1 && upper(line.tokens[1]) != "IMPLICIT") {
          rd.unsupported(line, "PERIODS " + line.tokens[1]);
        }
        section = key;
      } else if (key == "ENDATA") {
        break;
      } else {
        rd.unsupported(line, line.tokens[0]);
      }
      continue;
    }
    if (section != "PERIODS") rd.fail(line, "data outside of PERIODS");
    if (line.tokens.size() < 3) rd.fail(line, "expected column, row, period");
    markers.push_back(&line);
  }
  if (markers.size() != 2) {
    throw Error(ErrorCode::TwoPeriodOnly, rd.file() + ": found " + std::to_string(markers.size()) +
                                              " periods; only two-stage problems are supported");
  }
  const Line& second = *markers[1];
  Periods p;
  const auto c = core.col_index.find(second.tokens[0]);
  if (c == core.col_index.end()) rd.fail(second, "unknown column '" + second.tokens[0] + "'");
  p.first_stage2_col = c->second;
  const auto r = core.row_index.find(second.tokens[1]);
  if (r == core.row_index.end()) rd.fail(second, "unknown or objective row '" + second.tokens[1] + "'");
  p.first_stage2_row = r->second;
  if (p.first_stage2_col == 0) rd.fail(second, "second period starts at the first column");
  return p;
}

struct Split {
  FirstStage first;
  RecourseShape shape;
  Scenario base;
};

Split split_core(const CoreLp& core, const Periods& per, const Reader& rd) {
  const std::size_t n = per.first_stage2_col;
  const std::size_t m = core.col_names.size() - n;
  const std::size_t p = per.first_stage2_row;
  const std::size_t r = core.row_names.size() - p;
  Split out;
  FirstStage& f = out.first;
  f.sense = core.sense;
  f.offset = core.offset;
  f.c.assign(core.cost.begin(), core.cost.begin() + static_cast<std::ptrdiff_t>(n));
  f.lower.assign(core.lower.begin(), core.lower.begin() + static_cast<std::ptrdiff_t>(n));
  f.upper.assign(core.upper.begin(), core.upper.begin() + static_cast<std::ptrdiff_t>(n));
  f.col_names.assign(core.col_names.begin(), core.col_names.begin() + static_cast<std::ptrdiff_t>(n));
  f.row_names.assign(core.row_names.begin(), core.row_names.begin() + static_cast<std::ptrdiff_t>(p));
  f.row_senses.assign(core.row_senses.begin(), core.row_senses.begin() + static_cast<std::ptrdiff_t>(p));
  f.b.assign(core.rhs.begin(), core.rhs.begin() + static_cast<std::ptrdiff_t>(p));
  std::vector<Triplet> a, w, t;
  for (const Triplet& e : core.entries) {
    if (e.row < p) {
      if (e.col >= n) {
        throw Error(ErrorCode::ParseError, rd.file() + ": first-period row '" + core.row_names[e.row] +
                                               "' references second-period column '" + core.col_names[e.col] + "'");
      }
      a.push_back(e);
    } else if (e.col < n) {
      t.push_back({e.row - p, e.col, e.value});
    } else {
      w.push_back({e.row - p, e.col - n, e.value});
    }
  }
  f.A = SparseMatrix::from_triplets(p, n, std::move(a));
  out.shape.sense = core.sense;
  out.shape.W = SparseMatrix::from_triplets(r, m, std::move(w));
  out.shape.col_names.assign(core.col_names.begin() + static_cast<std::ptrdiff_t>(n), core.col_names.end());
  out.shape.row_names.assign(core.row_names.begin() + static_cast<std::ptrdiff_t>(p), core.row_names.end());
  Scenario& b = out.base;
  b.q.assign(core.cost.begin() + static_cast<std::ptrdiff_t>(n), core.cost.end());
  b.T = SparseMatrix::from_triplets(r, n, std::move(t));
  b.h.assign(core.rhs.begin() + static_cast<std::ptrdiff_t>(p), core.rhs.end());
  b.row_senses.assign(core.row_senses.begin() + static_cast<std::ptrdiff_t>(p), core.row_senses.end());
  b.lower.assign(core.lower.begin() + static_cast<std::ptrdiff_t>(n), core.lower.end());
  b.upper.assign(core.upper.begin() + static_cast<std::ptrdiff_t>(n), core.upper.end());
  return out;
}

std::vector<RandomElement> parse_stoch(const std::string& content, const CoreLp& core, const Periods& per,
                                       const Reader& rd) {
  const auto lines = lex(content);
  std::vector<RandomElement> elements;
  std::map<std::string, std::size_t> indep_index;   // "col/row" -> element
  std::map<std::string, std::size_t> block_index;   // block name -> element
  std::map<std::size_t, std::size_t> element_line;  // element -> first line, for diagnostics
  std::string section;
  ApplyMode mode = ApplyMode::Replace;
  RandomOutcome* current = nullptr;

  auto resolve = [&](const Line& line, const std::string& col, const std::string& row, double value) {
    RandomAssignment a;
    a.value = value;
    a.mode = mode;
    const std::size_t n = per.first_stage2_col;
    const std::size_t p = per.first_stage2_row;
    const auto c = core.col_index.find(col);
    if (row == core.objective_row) {
      if (c == core.col_index.end()) rd.fail(line, "unknown column '" + col + "'");
      if (c->second < n) rd.fail(line, "random first-stage cost is not supported");
      a.target = RandomTarget::Cost;
      a.col = c->second - n;
      return a;
    }
    const auto r = core.row_index.find(row);
    if (r == core.row_index.end()) rd.fail(line, "unknown row '" + row + "'");
    if (r->second < p) rd.fail(line, "random first-stage constraint data is not supported");
    a.row = r->second - p;
    if (c == core.col_index.end()) {
      // anything that is not a column names the right-hand side
      a.target = RandomTarget::Rhs;
      return a;
    }
    if (c->second >= n) rd.fail(line, "random entry in the recourse matrix W; fixed recourse is required");
    a.target = RandomTarget::Technology;
    a.col = c->second;
    return a;
  };

  for (const Line& line : lines) {
    const auto& t = line.tokens;
    if (line.header) {
      const std::string key = upper(t[0]);
      if (key == "STOCH") {
        section.clear();
        continue;
      }
      if (key == "ENDATA") break;
      if (key == "INDEP" || key == "BLOCKS") {
        std::size_t k = 1;
        if (t.size() > k && upper(t[k]) == "DISCRETE") ++k;
        else if (t.size() > k && upper(t[k]) != "REPLACE" && upper(t[k]) != "ADD" && upper(t[k]) != "MULTIPLY") {
          rd.unsupported(line, key + " " + t[k]);
        }
        mode = ApplyMode::Replace;
        if (t.size() > k) {
          const std::string m = upper(t[k]);
          if (m == "ADD") {
            mode = ApplyMode::Add;
          } else if (m == "MULTIPLY") {
            mode = ApplyMode::Multiply;
          } else if (m != "REPLACE") {
            rd.unsupported(line, key + " " + t[k]);
          }
        }
        section = key;
        current = nullptr;
        continue;
      }
      rd.unsupported(line, t[0]);
    }
    if (section == "INDEP") {
      if (t.size() != 5 && t.size() != 4) rd.fail(line, "expected column, row, value, period, probability");
      const double value = rd.number(line, t[2]);
      const double prob = rd.number(line, t.back());
      const std::string key = t[0] + "/" + t[1];
      auto it = indep_index.find(key);
      if (it == indep_index.end()) {
        it = indep_index.emplace(key, elements.size()).first;
        element_line[elements.size()] = line.number;
        elements.push_back({key, {}});
      }
      RandomOutcome o;
      o.probability = prob;
      o.assignments.push_back(resolve(line, t[0], t[1], value));
      elements[it->second].outcomes.push_back(std::move(o));
    } else if (section == "BLOCKS") {
      if (upper(t[0]) == "BL") {
        if (t.size() != 4 && t.size() != 3) rd.fail(line, "expected BL block period probability");
        auto it = block_index.find(t[1]);
        if (it == block_index.end()) {
          it = block_index.emplace(t[1], elements.size()).first;
          element_line[elements.size()] = line.number;
          elements.push_back({t[1], {}});
        }
        RandomOutcome o;
        o.probability = rd.number(line, t.back());
        elements[it->second].outcomes.push_back(std::move(o));
        current = &elements[it->second].outcomes.back();
        continue;
      }
      if (!current) rd.fail(line, "block entry before any BL line");
      if (t.size() != 3 && t.size() != 5) rd.fail(line, "expected column, row, value");
      current->assignments.push_back(resolve(line, t[0], t[1], rd.number(line, t[2])));
      if (t.size() == 5) current->assignments.push_back(resolve(line, t[0], t[3], rd.number(line, t[4])));
    } else {
      rd.fail(line, "data outside of INDEP or BLOCKS");
    }
  }
  for (std::size_t e = 0; e < elements.size(); ++e) {
    double total = 0.0;
    for (const auto& o : elements[e].outcomes) {
      if (!(o.probability > 0.0)) {
        throw Error(ErrorCode::ParseError, rd.file() + ":" + std::to_string(element_line[e]) + ": element '" +
                                               elements[e].name + "' has a nonpositive probability");
      }
      total += o.probability;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      std::ostringstream os;
      os << rd.file() << ":" << element_line[e] << ": probabilities of '" << elements[e].name << "' sum to "
         << total;
      throw Error(ErrorCode::ParseError, os.str());
    }
  }
  return elements;
}

double apply(double base, const RandomAssignment& a) {
  switch (a.mode) {
    case ApplyMode::Replace: return a.value;
    case ApplyMode::Add: return base + a.value;
    case ApplyMode::Multiply: return base * a.value;
  }
  return a.value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

std::vector<Scenario> cross_product_scenarios(const Scenario& base, const std::vector<RandomElement>& elements,
                                              std::size_t cap) {
  double count = 1.0;
  for (const auto& e : elements) {
    if (e.outcomes.empty()) throw Error(ErrorCode::InvalidArgument, "element '" + e.name + "' has no outcomes");
    double total = 0.0;
    for (const auto& o : e.outcomes) {
      if (!(o.probability > 0.0)) {
        throw Error(ErrorCode::NonPositiveProbability, "element '" + e.name + "' has a nonpositive probability");
      }
      total += o.probability;
    }
    if (std::abs(total - 1.0) > 1e-6) {
      throw Error(ErrorCode::ProbabilityDrift, "outcome probabilities of '" + e.name + "' do not sum to 1");
    }
    count *= static_cast<double>(e.outcomes.size());
  }
  if (count > static_cast<double>(cap)) {
    std::ostringstream os;
    os << "the discrete distribution has " << count << " joint outcomes, above the cap of " << cap
       << "; sample scenarios instead of enumerating them";
    throw Error(ErrorCode::ScenarioExplosion, os.str());
  }
  const auto base_t = base.T.triplets();
  std::vector<std::size_t> pick(elements.size(), 0);
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(count));
  while (true) {
    Scenario sc = base;
    sc.probability = 1.0;
    std::map<std::pair<std::size_t, std::size_t>, double> tech;
    bool touches_t = false;
    for (std::size_t e = 0; e < elements.size(); ++e) {
      const RandomOutcome& o = elements[e].outcomes[pick[e]];
      sc.probability *= o.probability;
      for (const auto& a : o.assignments) {
        switch (a.target) {
          case RandomTarget::Cost: sc.q.at(a.col) = apply(base.q.at(a.col), a); break;
          case RandomTarget::Rhs: sc.h.at(a.row) = apply(base.h.at(a.row), a); break;
          case RandomTarget::Technology:
            if (!touches_t) {
              for (const auto& t : base_t) tech[{t.row, t.col}] = t.value;
              touches_t = true;
            }
            tech[{a.row, a.col}] = apply(base.T.coeff(a.row, a.col), a);
            break;
        }
      }
    }
    if (touches_t) {
      std::vector<Triplet> t;
      t.reserve(tech.size());
      for (const auto& [rc, v] : tech) t.push_back({rc.first, rc.second, v});
      sc.T = SparseMatrix::from_triplets(base.T.rows(), base.T.cols(), std::move(t));
    }
    sc.name = "s" + std::to_string(out.size() + 1);
    out.push_back(std::move(sc));
    // odometer, last element fastest
    std::size_t e = elements.size();
    while (e > 0) {
      --e;
      if (++pick[e] < elements[e].outcomes.size()) break;
      pick[e] = 0;
      if (e == 0) return out;
    }
    if (elements.empty()) return out;
  }
}

TwoStageProblem read_smps(const SmpsTriplet& files, const SmpsOptions& opts) {
  const CoreLp core = parse_core(files.core, Reader(files.core_name));
  const Periods per = parse_time(files.time, core, Reader(files.time_name));
  Split split = split_core(core, per, Reader(files.core_name));
  const auto elements = parse_stoch(files.stoch, core, per, Reader(files.stoch_name));
  auto scenarios = cross_product_scenarios(split.base, elements, opts.scenario_cap);
  BuildOptions bo;
  bo.normalize_weights = true;
  return build_problem(std::move(split.first), std::move(split.shape), std::move(scenarios), bo);
}

SmpsDimensions smps_dimensions(const SmpsTriplet& files) {
  const CoreLp core = parse_core(files.core, Reader(files.core_name));
  const Periods per = parse_time(files.time, core, Reader(files.time_name));
  const Split split = split_core(core, per, Reader(files.core_name));
  const auto elements = parse_stoch(files.stoch, core, per, Reader(files.stoch_name));
  SmpsDimensions d;
  d.first_cols = split.first.cols();
  d.first_rows = split.first.A.rows();
  d.second_cols = split.shape.cols();
  d.second_rows = split.shape.rows();
  d.random_elements = elements.size();
  for (const auto& e : elements) d.log10_scenarios += std::log10(static_cast<double>(e.outcomes.size()));
  return d;
}

namespace {

SmpsTriplet load_triplet(const std::string& core_path, const std::string& time_path, const std::string& stoch_path) {
  SmpsTriplet t;
  t.core = read_file(core_path);
  t.time = read_file(time_path);
  t.stoch = read_file(stoch_path);
  t.core_name = core_path;
  t.time_name = time_path;
  t.stoch_name = stoch_path;
  return t;
}

}  // namespace

TwoStageProblem read_smps_files(const std::string& core_path, const std::string& time_path,
                                const std::string& stoch_path, const SmpsOptions& opts) {
  return read_smps(load_triplet(core_path, time_path, stoch_path), opts);
}

SmpsDimensions smps_dimensions_files(const std::string& core_path, const std::string& time_path,
                                     const std::string& stoch_path) {
  return smps_dimensions(load_triplet(core_path, time_path, stoch_path));
}

}  // namespace stochlp
