// Independent oracles and instance generators shared by the test suites.
// Nothing here calls into the simplex or barrier code paths.
#ifndef STOCHLP_TESTS_TEST_SUPPORT_HPP
#define STOCHLP_TESTS_TEST_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "stochlp/lp.hpp"

namespace stochlp::testing {

/// Solves a small dense system by Gaussian elimination with partial pivoting.
inline std::optional<std::vector<double>> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-10) return std::nullopt;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Minimum of a bounded LP by enumerating basic solutions: every choice of
/// n linearly independent active constraints (equality rows always active).
/// Returns nullopt when no vertex is feasible. Maximization is handled by
/// negation.
inline std::optional<double> brute_force_lp(const LPInstance& lp, double tol = 1e-7) {
  const std::size_t n = lp.cols();
  const auto dense = lp.matrix.to_dense();
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> ineq;  // a x = b candidates
  std::vector<double> ineq_rhs;
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    if (lp.row_senses[i] == RowSense::Equal) {
      eq_rows.push_back(dense[i]);
      eq_rhs.push_back(lp.rhs[i]);
    } else {
      ineq.push_back(dense[i]);
      ineq_rhs.push_back(lp.rhs[i]);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    if (std::isfinite(lp.lower[j])) {
      ineq.push_back(e);
      ineq_rhs.push_back(lp.lower[j]);
    }
    if (std::isfinite(lp.upper[j])) {
      ineq.push_back(e);
      ineq_rhs.push_back(lp.upper[j]);
    }
  }
  // Keep a linearly independent subset of the equality rows; the dropped
  // ones are still enforced by the final feasibility check.
  {
    std::vector<std::vector<double>> basis;  // echelon copies
    std::vector<std::vector<double>> kept;
    std::vector<double> kept_rhs;
    for (std::size_t r = 0; r < eq_rows.size(); ++r) {
      auto v = eq_rows[r];
      for (const auto& b : basis) {
        std::size_t lead = 0;
        while (std::abs(b[lead]) < 1e-12) ++lead;
        const double f = v[lead] / b[lead];
        for (std::size_t c = 0; c < n; ++c) v[c] -= f * b[c];
      }
      double norm = 0.0;
      for (double e : v) norm = std::max(norm, std::abs(e));
      if (norm < 1e-9) continue;
      basis.push_back(v);
      kept.push_back(eq_rows[r]);
      kept_rhs.push_back(eq_rhs[r]);
    }
    eq_rows = std::move(kept);
    eq_rhs = std::move(kept_rhs);
  }
  if (eq_rows.size() > n) return std::nullopt;
  const std::size_t need = n - eq_rows.size();
  const std::size_t k = ineq.size();
  if (need > k) return std::nullopt;
  std::optional<double> best;
  std::vector<std::size_t> pick(need);
  for (std::size_t i = 0; i < need; ++i) pick[i] = i;
  const double sign = lp.sense == Sense::Minimize ? 1.0 : -1.0;
  while (true) {
    auto a = eq_rows;
    auto b = eq_rhs;
    for (std::size_t idx : pick) {
      a.push_back(ineq[idx]);
      b.push_back(ineq_rhs[idx]);
    }
    if (auto x = gauss_solve(a, b)) {
      double scale = 1.0;
      for (double v : *x) scale = std::max(scale, std::abs(v));
      if (lp.max_violation(*x) <= tol * scale) {
        const double v = sign * lp.evaluate(*x);
        if (!best || v < *best) best = v;
      }
    }
    // next combination
    std::size_t i = need;
    while (i > 0 && pick[i - 1] == k - need + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t t = i; t < need; ++t) pick[t] = pick[t - 1] + 1;
  }
  if (best) *best *= sign;
  return best;
}

/// Checks the infeasibility certificate semantics documented on LPSolution.
inline bool verifies_farkas(const LPInstance& lp, const std::vector<double>& y, double tol = 1e-7) {
  if (y.size() != lp.rows()) return false;
  const auto g = lp.matrix.transpose_multiply(y);
  double lhs = 0.0;  // max over the box of g^T x
  for (std::size_t j = 0; j < lp.cols(); ++j) {
    if (std::abs(g[j]) <= tol) continue;
    const double bound = g[j] > 0.0 ? lp.upper[j] : lp.lower[j];
    if (!std::isfinite(bound)) return false;
    lhs += g[j] * bound;
  }
  double rhs = 0.0;  // min over row ranges of y^T s
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    if (std::abs(y[i]) <= tol) continue;
    double lo = -kInf, hi = kInf;
    switch (lp.row_senses[i]) {
      case RowSense::Equal: lo = hi = lp.rhs[i]; break;
      case RowSense::LessEqual: hi = lp.rhs[i]; break;
      case RowSense::GreaterEqual: lo = lp.rhs[i]; break;
    }
    const double bound = y[i] > 0.0 ? lo : hi;
    if (!std::isfinite(bound)) return false;
    rhs += y[i] * bound;
  }
  return lhs < rhs - tol;
}

/// Random feasible LP with finite boxes: a hidden point x0 satisfies every row.
inline LPInstance random_feasible_lp(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> sense(0, 2);
  LPInstance lp;
  lp.sense = unit(rng) < 0.2 ? Sense::Maximize : Sense::Minimize;
  lp.objective.resize(n);
  lp.lower.resize(n);
  lp.upper.resize(n);
  std::vector<double> x0(n);
  for (std::size_t j = 0; j < n; ++j) {
    lp.objective[j] = std::round(coef(rng) * 4.0) / 4.0;
    lp.lower[j] = std::round(coef(rng));
    lp.upper[j] = lp.lower[j] + 1.0 + std::round(9.0 * unit(rng));
    x0[j] = lp.lower[j] + unit(rng) * (lp.upper[j] - lp.lower[j]);
  }
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < m; ++i) {
    double act = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (unit(rng) < 0.6) {
        const double a = std::round(coef(rng) * 2.0) / 2.0;
        if (a != 0.0) {
          t.push_back({i, j, a});
          act += a * x0[j];
        }
      }
    }
    const int s = sense(rng);
    if (s == 0 && unit(rng) < 0.5) {
      lp.row_senses.push_back(RowSense::Equal);
      lp.rhs.push_back(act);
    } else if (s <= 1) {
      lp.row_senses.push_back(RowSense::LessEqual);
      lp.rhs.push_back(std::ceil(act + 3.0 * unit(rng)));
    } else {
      lp.row_senses.push_back(RowSense::GreaterEqual);
      lp.rhs.push_back(std::floor(act - 3.0 * unit(rng)));
    }
  }
  lp.matrix = SparseMatrix::from_triplets(m, n, std::move(t));
  return lp;
}

/// Zooming grid search for min of a function over a box, restricted to points
/// where `feasible` holds. Each level scans `points^dim` nodes and then
/// shrinks the window around the best node.
inline std::optional<std::pair<double, std::vector<double>>> zoom_grid_min(
    const std::function<std::optional<double>(const std::vector<double>&)>& value, std::vector<double> lo,
    std::vector<double> hi, std::size_t points, std::size_t levels) {
  const std::size_t dim = lo.size();
  std::optional<std::pair<double, std::vector<double>>> best;
  for (std::size_t level = 0; level < levels; ++level) {
    std::vector<std::size_t> idx(dim, 0);
    bool done = dim == 0;
    std::optional<std::pair<double, std::vector<double>>> level_best = best;
    while (!done) {
      std::vector<double> x(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        x[d] = lo[d] + (hi[d] - lo[d]) * static_cast<double>(idx[d]) / static_cast<double>(points - 1);
      }
      if (auto v = value(x)) {
        if (!level_best || *v < level_best->first) level_best = std::make_pair(*v, x);
      }
      std::size_t d = 0;
      while (d < dim && ++idx[d] == points) idx[d++] = 0;
      done = d == dim;
    }
    if (!level_best) return std::nullopt;
    best = level_best;
    for (std::size_t d = 0; d < dim; ++d) {
      const double w = (hi[d] - lo[d]) / static_cast<double>(points - 1) * 2.0;
      const double nlo = std::max(lo[d], best->second[d] - w);
      const double nhi = std::min(hi[d], best->second[d] + w);
      lo[d] = nlo;
      hi[d] = nhi;
    }
  }
  return best;
}

}  // namespace stochlp::testing

#endif  // STOCHLP_TESTS_TEST_SUPPORT_HPP
