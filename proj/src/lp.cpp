#include "stochlp/lp.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "stochlp/error.hpp"

namespace stochlp {

std::string to_string(Sense s) { return s == Sense::Minimize ? "min" : "max"; }

std::string to_string(RowSense s) {
  switch (s) {
    case RowSense::Equal: return "=";
    case RowSense::LessEqual: return "<=";
    case RowSense::GreaterEqual: return ">=";
  }
  return "?";
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
  }
  return "?";
}

bool LPInstance::has_quadratic() const noexcept {
  for (double q : quadratic) {
    if (q != 0.0) return true;
  }
  return false;
}

void LPInstance::check() const {
  const std::size_t n = cols();
  const std::size_t m = rows();
  auto mismatch = [](const std::string& what, std::size_t got, std::size_t want) {
    throw Error(ErrorCode::DimensionMismatch,
                what + " has length " + std::to_string(got) + ", expected " + std::to_string(want));
  };
  if (matrix.cols() != n || matrix.rows() != m) {
    throw Error(ErrorCode::DimensionMismatch, "constraint matrix is " + std::to_string(matrix.rows()) + "x" +
                                                  std::to_string(matrix.cols()) + ", expected " +
                                                  std::to_string(m) + "x" + std::to_string(n));
  }
  if (row_senses.size() != m) mismatch("row_senses", row_senses.size(), m);
  if (lower.size() != n) mismatch("lower", lower.size(), n);
  if (upper.size() != n) mismatch("upper", upper.size(), n);
  if (!quadratic.empty() && quadratic.size() != n) mismatch("quadratic", quadratic.size(), n);
  if (!center.empty() && center.size() != n) mismatch("center", center.size(), n);
  for (std::size_t j = 0; j < n; ++j) {
    if (lower[j] > upper[j]) {
      throw Error(ErrorCode::InvalidArgument, "column " + std::to_string(j) + " has lower > upper");
    }
    if (!quadratic.empty() && quadratic[j] < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "negative quadratic coefficient on column " + std::to_string(j));
    }
  }
}

double LPInstance::evaluate(const std::vector<double>& x) const {
  double v = objective_offset;
  for (std::size_t j = 0; j < cols(); ++j) {
    v += objective[j] * x[j];
    if (!quadratic.empty() && quadratic[j] != 0.0) {
      const double d = x[j] - (center.empty() ? 0.0 : center[j]);
      v += 0.5 * quadratic[j] * d * d;
    }
  }
  return v;
}

double LPInstance::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < cols(); ++j) {
    worst = std::max({worst, lower[j] - x[j], x[j] - upper[j]});
  }
  const auto act = matrix.multiply(x);
  for (std::size_t i = 0; i < rows(); ++i) {
    switch (row_senses[i]) {
      case RowSense::Equal: worst = std::max(worst, std::abs(act[i] - rhs[i])); break;
      case RowSense::LessEqual: worst = std::max(worst, act[i] - rhs[i]); break;
      case RowSense::GreaterEqual: worst = std::max(worst, rhs[i] - act[i]); break;
    }
  }
  return worst;
}

double bound_contribution(const LPInstance& lp, const LPSolution& sol) {
  // In minimization form a positive reduced cost pins a column at its lower
  // bound. For a maximization problem the reported reduced costs carry the
  // opposite sign.
  const double sign = lp.sense == Sense::Minimize ? 1.0 : -1.0;
  double total = 0.0;
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    const double d = sol.reduced_cost[j];
    if (d == 0.0) continue;
    const double bound = sign * d > 0.0 ? lp.lower[j] : lp.upper[j];
    if (std::isfinite(bound)) total += d * bound;
  }
  return total;
}

double dual_objective(const LPInstance& lp, const LPSolution& sol) {
  double total = lp.objective_offset + bound_contribution(lp, sol);
  for (std::size_t i = 0; i < lp.rows(); ++i) total += sol.dual[i] * lp.rhs[i];
  return total;
}

LPInstance linearize_penalty(const LPInstance& qp, PenaltyNorm norm) {
  qp.check();
  const std::size_t n = qp.cols();
  double weight = 0.0;
  std::vector<std::size_t> penalized;
  for (std::size_t j = 0; j < n && !qp.quadratic.empty(); ++j) {
    const double q = qp.quadratic[j];
    if (q == 0.0) continue;
    if (weight == 0.0) weight = q;
    if (std::abs(q - weight) > 1e-12 * std::max(1.0, weight)) {
      throw Error(ErrorCode::UnsupportedQuadratic,
                  "quadratic coefficients differ across columns; not a proximal term");
    }
    penalized.push_back(j);
  }
  LPInstance lp = qp;
  lp.quadratic.clear();
  lp.center.clear();
  if (penalized.empty()) return lp;
  if (qp.center.empty()) {
    throw Error(ErrorCode::UnsupportedQuadratic, "proximal term without a known center");
  }
  const double penalty_sign = qp.sense == Sense::Minimize ? 1.0 : -1.0;

  std::vector<Triplet> t = qp.matrix.triplets();
  std::size_t row = qp.rows();
  auto add_col = [&](double cost, double lo, double hi, const std::string& name) {
    lp.objective.push_back(cost);
    lp.lower.push_back(lo);
    lp.upper.push_back(hi);
    if (!lp.col_names.empty()) lp.col_names.push_back(name);
    return lp.objective.size() - 1;
  };
  auto add_row = [&](RowSense s, double b, const std::string& name) {
    lp.row_senses.push_back(s);
    lp.rhs.push_back(b);
    if (!lp.row_names.empty()) lp.row_names.push_back(name);
    return row++;
  };

  if (norm == PenaltyNorm::L1) {
    // x_j - p_j + m_j = center_j, cost r (p_j + m_j)
    for (std::size_t j : penalized) {
      const std::string tag = std::to_string(j);
      const std::size_t p = add_col(penalty_sign * weight, 0.0, kInf, "pen_plus_" + tag);
      const std::size_t mcol = add_col(penalty_sign * weight, 0.0, kInf, "pen_minus_" + tag);
      const std::size_t r = add_row(RowSense::Equal, qp.center[j], "pen_split_" + tag);
      t.push_back({r, j, 1.0});
      t.push_back({r, p, -1.0});
      t.push_back({r, mcol, 1.0});
    }
  } else {
    // |x_j - center_j| <= s for all penalized j, cost r s
    const std::size_t s = add_col(penalty_sign * weight, 0.0, kInf, "pen_inf");
    for (std::size_t j : penalized) {
      const std::string tag = std::to_string(j);
      const std::size_t up = add_row(RowSense::LessEqual, qp.center[j], "pen_up_" + tag);
      t.push_back({up, j, 1.0});
      t.push_back({up, s, -1.0});
      const std::size_t dn = add_row(RowSense::GreaterEqual, qp.center[j], "pen_dn_" + tag);
      t.push_back({dn, j, 1.0});
      t.push_back({dn, s, 1.0});
    }
  }
  lp.matrix = SparseMatrix::from_triplets(lp.rhs.size(), lp.objective.size(), std::move(t));
  return lp;
}

namespace {

std::string col_label(const LPInstance& lp, std::size_t j) {
  return j < lp.col_names.size() && !lp.col_names[j].empty() ? lp.col_names[j] : "C" + std::to_string(j + 1);
}

std::string row_label(const LPInstance& lp, std::size_t i) {
  return i < lp.row_names.size() && !lp.row_names[i].empty() ? lp.row_names[i] : "R" + std::to_string(i + 1);
}

}  // namespace

void write_mps(std::ostream& out, const LPInstance& lp, const std::string& name) {
  out << std::setprecision(17);
  out << "NAME          " << name << "\n";
  if (lp.sense == Sense::Maximize) out << "OBJSENSE\n    MAX\n";
  if (lp.has_quadratic()) {
    out << "* diagonal quadratic terms (not part of the MPS data):\n";
    for (std::size_t j = 0; j < lp.cols(); ++j) {
      if (lp.quadratic[j] == 0.0) continue;
      out << "*   0.5 * " << lp.quadratic[j] << " * (" << col_label(lp, j) << " - "
          << (lp.center.empty() ? 0.0 : lp.center[j]) << ")^2\n";
    }
  }
  if (lp.objective_offset != 0.0) out << "* objective offset " << lp.objective_offset << "\n";
  out << "ROWS\n N  OBJ\n";
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    const char* s = lp.row_senses[i] == RowSense::Equal ? "E" : lp.row_senses[i] == RowSense::LessEqual ? "L" : "G";
    out << " " << s << "  " << row_label(lp, i) << "\n";
  }
  out << "COLUMNS\n";
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    const std::string c = col_label(lp, j);
    bool any = false;
    if (lp.objective[j] != 0.0) {
      out << "    " << c << "  OBJ  " << lp.objective[j] << "\n";
      any = true;
    }
    const auto rows = lp.matrix.col_rows(j);
    const auto vals = lp.matrix.col_values(j);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out << "    " << c << "  " << row_label(lp, rows[k]) << "  " << vals[k] << "\n";
      any = true;
    }
    if (!any) out << "    " << c << "  OBJ  0\n";
  }
  out << "RHS\n";
  if (lp.objective_offset != 0.0) out << "    RHS  OBJ  " << -lp.objective_offset << "\n";
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    if (lp.rhs[i] != 0.0) out << "    RHS  " << row_label(lp, i) << "  " << lp.rhs[i] << "\n";
  }
  out << "BOUNDS\n";
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    const std::string c = col_label(lp, j);
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    if (lo == hi) {
      out << " FX BND  " << c << "  " << lo << "\n";
      continue;
    }
    if (lo == -kInf && hi == kInf) {
      out << " FR BND  " << c << "\n";
      continue;
    }
    if (lo == -kInf) {
      out << " MI BND  " << c << "\n";
    } else if (lo != 0.0) {
      out << " LO BND  " << c << "  " << lo << "\n";
    }
    if (hi != kInf) out << " UP BND  " << c << "  " << hi << "\n";
  }
  out << "ENDATA\n";
}

std::string to_mps(const LPInstance& lp, const std::string& name) {
  std::ostringstream os;
  write_mps(os, lp, name);
  return os.str();
}

}  // namespace stochlp
