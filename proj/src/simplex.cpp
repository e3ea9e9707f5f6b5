// Bounded-variable revised simplex over the computational form
//
//   [A  -I] (x, s) = 0,   lower <= x <= upper,   row_lo <= s <= row_hi
//
// with a sparse LU factor of the basis and product-form updates, refactored
// periodically. Phase one
// minimizes the sum of bound violations of the basic variables; its final
// multipliers double as the Farkas certificate when the instance is
// infeasible.

#include <algorithm>
#include <cmath>
#include <numeric>

#include <memory>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "stochlp/error.hpp"
#include "stochlp/lp.hpp"

namespace stochlp {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kZeroStep = 1e-12;

// B = B0 E_1 ... E_k with B0 = LU and each E_i the identity with column r_i
// replaced by the entering column alpha_i in the basis of its time.
class BasisFactor {
 public:
  bool factor(std::size_t m, const std::vector<Eigen::Triplet<double>>& entries) {
    m_ = m;
    etas_.clear();
    if (m == 0) return true;
    Eigen::SparseMatrix<double> b(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    b.setFromTriplets(entries.begin(), entries.end());
    b.makeCompressed();
    lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(b);
    if (lu_->info() != Eigen::Success) return false;
    // Near-singular bases show up as a poor solve of a known system.
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m));
    const Eigen::VectorXd z = lu_->solve(b * ones);
    return z.allFinite() && (z - ones).cwiseAbs().maxCoeff() < 1e-6;
  }

  void update(std::size_t r, const Eigen::VectorXd& alpha) {
    Eta e;
    e.row = r;
    e.pivot = alpha[static_cast<Eigen::Index>(r)];
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
      if (static_cast<std::size_t>(i) != r && alpha[i] != 0.0) {
        e.index.push_back(static_cast<std::size_t>(i));
        e.value.push_back(alpha[i]);
      }
    }
    etas_.push_back(std::move(e));
  }

  // Solves B z = a.
  Eigen::VectorXd ftran(const Eigen::VectorXd& a) const {
    if (m_ == 0) return a;
    Eigen::VectorXd z = lu_->solve(a);
    for (const Eta& e : etas_) {
      const double zr = z[static_cast<Eigen::Index>(e.row)] / e.pivot;
      z[static_cast<Eigen::Index>(e.row)] = zr;
      if (zr == 0.0) continue;
      for (std::size_t t = 0; t < e.index.size(); ++t) z[static_cast<Eigen::Index>(e.index[t])] -= e.value[t] * zr;
    }
    return z;
  }

  // Solves B^T y = c.
  Eigen::VectorXd btran(Eigen::VectorXd c) const {
    if (m_ == 0) return c;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double v = c[static_cast<Eigen::Index>(it->row)];
      for (std::size_t t = 0; t < it->index.size(); ++t) v -= it->value[t] * c[static_cast<Eigen::Index>(it->index[t])];
      c[static_cast<Eigen::Index>(it->row)] = v / it->pivot;
    }
    return lu_->transpose().solve(c);
  }

 private:
  struct Eta {
    std::size_t row = 0;
    double pivot = 1.0;
    std::vector<std::size_t> index;
    std::vector<double> value;
  };
  std::size_t m_ = 0;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
  std::vector<Eta> etas_;
};

class Simplex {
 public:
  Simplex(const LPInstance& lp, const KernelConfig& cfg) : lp_(lp), cfg_(cfg) {
    n_ = lp.cols();
    m_ = lp.rows();
    const std::size_t total = n_ + m_;
    lo_.resize(total);
    up_.resize(total);
    cost_.assign(total, 0.0);
    const double sign = lp.sense == Sense::Minimize ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp.lower[j];
      up_[j] = lp.upper[j];
      cost_[j] = sign * lp.objective[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const double b = lp.rhs[i];
      switch (lp.row_senses[i]) {
        case RowSense::Equal: lo_[n_ + i] = b; up_[n_ + i] = b; break;
        case RowSense::LessEqual: lo_[n_ + i] = -kInf; up_[n_ + i] = b; break;
        case RowSense::GreaterEqual: lo_[n_ + i] = b; up_[n_ + i] = kInf; break;
      }
    }
    status_.resize(total);
    x_.assign(total, 0.0);
    head_.resize(m_);
    pos_.assign(total, kNone);
  }

  LPSolution run(const Basis* warm) {
    if (!(warm && install_basis(*warm))) install_slack_basis();
    LPSolution sol;
    bool phase_one = true;
    bool use_bland = cfg_.pivot_rule == PivotRule::Bland;
    std::size_t degenerate = 0;
    std::size_t since_refactor = 0;
    std::size_t final_checks = 0;

    while (true) {
      if (iterations_ >= cfg_.max_iterations) {
        sol.status = SolveStatus::IterationLimit;
        break;
      }
      if (since_refactor >= cfg_.refactor_period) {
        refactor();
        since_refactor = 0;
      }

      std::vector<double> basic_cost(m_, 0.0);
      if (phase_one) {
        bool any = false;
        for (std::size_t r = 0; r < m_; ++r) {
          const std::size_t k = head_[r];
          if (x_[k] < lo_[k] - cfg_.feas_tol) {
            basic_cost[r] = -1.0;
            any = true;
          } else if (x_[k] > up_[k] + cfg_.feas_tol) {
            basic_cost[r] = 1.0;
            any = true;
          }
        }
        if (!any) {
          phase_one = false;
          continue;
        }
      } else {
        for (std::size_t r = 0; r < m_; ++r) basic_cost[r] = cost_[head_[r]];
      }

      const Eigen::VectorXd y = dual_of(basic_cost);

      // Pricing.
      std::size_t entering = kNone;
      double best = 0.0;
      int direction = 0;
      for (std::size_t k = 0; k < n_ + m_; ++k) {
        if (status_[k] == VarStatus::Basic) continue;
        if (lo_[k] == up_[k]) continue;
        const double d = (phase_one ? 0.0 : cost_[k]) - column_dot(k, y);
        int dir = 0;
        if (d < -cfg_.opt_tol && (status_[k] == VarStatus::AtLower || status_[k] == VarStatus::Free)) dir = 1;
        if (d > cfg_.opt_tol && (status_[k] == VarStatus::AtUpper || status_[k] == VarStatus::Free)) dir = -1;
        if (dir == 0) continue;
        if (use_bland) {
          entering = k;
          direction = dir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          entering = k;
          direction = dir;
        }
      }

      if (entering == kNone) {
        if (phase_one) {
          refactor();
          since_refactor = 0;
          if (!basics_feasible()) {
            sol.status = SolveStatus::Infeasible;
            sol.farkas = certificate_from(y);
            break;
          }
          phase_one = false;
          continue;
        }
        // Confirm optimality on a fresh factorization before reporting.
        refactor();
        since_refactor = 0;
        if (!basics_feasible()) {
          phase_one = true;
          continue;
        }
        if (final_checks++ < 3 && has_improving_column()) continue;
        sol.status = SolveStatus::Optimal;
        break;
      }

      const Eigen::VectorXd alpha = ftran(entering);

      // Harris two-pass ratio test. Pass one: widest step that keeps every
      // basic within its (tolerance-relaxed) target bound.
      const double own_range = up_[entering] - lo_[entering];
      double relaxed = kInf;
      for (std::size_t r = 0; r < m_; ++r) {
        if (std::abs(alpha[r]) < kPivotTol) continue;
        const double rate = -direction * alpha[r];
        relaxed = std::min(relaxed, step_limit(head_[r], rate, phase_one, cfg_.feas_tol).step);
      }
      // Pass two: among rows blocking within the relaxed step, prefer the
      // largest pivot (or the smallest index under Bland).
      std::size_t leave_row = kNone;
      double step = kInf;
      bool leave_at_upper = false;
      if (relaxed < kInf) {
        double best_pivot = -1.0;
        for (std::size_t r = 0; r < m_; ++r) {
          if (std::abs(alpha[r]) < kPivotTol) continue;
          const double rate = -direction * alpha[r];
          const Limit lim = step_limit(head_[r], rate, phase_one, 0.0);
          const double t = lim.step;
          if (t > relaxed) continue;
          bool better;
          if (use_bland) {
            better = leave_row == kNone || head_[r] < head_[leave_row];
          } else {
            better = std::abs(alpha[r]) > best_pivot;
          }
          if (better) {
            best_pivot = std::abs(alpha[r]);
            leave_row = r;
            step = std::max(t, 0.0);
            leave_at_upper = lim.at_upper;
          }
        }
      }

      if (own_range <= step) {
        // Bound flip of the entering column; the basis is unchanged.
        if (own_range == kInf) {
          if (phase_one) throw Error(ErrorCode::NumericalBreakdown, "unbounded phase-one direction");
          sol.status = SolveStatus::Unbounded;
          break;
        }
        apply_step(entering, direction, own_range, alpha);
        x_[entering] = direction > 0 ? up_[entering] : lo_[entering];
        status_[entering] = direction > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
        degenerate = 0;
        ++iterations_;
        continue;
      }
      if (leave_row == kNone) {
        if (phase_one) throw Error(ErrorCode::NumericalBreakdown, "unbounded phase-one direction");
        sol.status = SolveStatus::Unbounded;
        break;
      }

      apply_step(entering, direction, step, alpha);
      const std::size_t leaving = head_[leave_row];
      x_[leaving] = leave_at_upper ? up_[leaving] : lo_[leaving];
      status_[leaving] = leave_at_upper ? VarStatus::AtUpper : VarStatus::AtLower;
      if (lo_[leaving] == up_[leaving]) status_[leaving] = VarStatus::AtLower;
      pos_[leaving] = kNone;
      head_[leave_row] = entering;
      pos_[entering] = leave_row;
      status_[entering] = VarStatus::Basic;
      pivot(leave_row, alpha);
      ++since_refactor;
      ++iterations_;

      if (step < kZeroStep) {
        if (++degenerate > cfg_.degeneracy_limit) use_bland = true;
      } else {
        degenerate = 0;
        use_bland = cfg_.pivot_rule == PivotRule::Bland;
      }
    }

    finish(sol);
    return sol;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Limit {
    double step;
    bool at_upper;
  };

  // Maximum step along `rate` before basic variable k reaches its target
  // bound. In phase one an infeasible basic targets the bound it violates.
  Limit step_limit(std::size_t k, double rate, bool phase_one, double tol) const {
    const double v = x_[k];
    if (phase_one && v < lo_[k] - cfg_.feas_tol) {
      return {rate > 0.0 ? (lo_[k] + tol - v) / rate : kInf, false};
    }
    if (phase_one && v > up_[k] + cfg_.feas_tol) {
      return {rate < 0.0 ? (up_[k] - tol - v) / rate : kInf, true};
    }
    if (rate > 0.0 && up_[k] < kInf) return {std::max((up_[k] + tol - v) / rate, 0.0), true};
    if (rate < 0.0 && lo_[k] > -kInf) return {std::max((lo_[k] - tol - v) / rate, 0.0), false};
    return {kInf, false};
  }

  bool basics_feasible() const {
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t k = head_[r];
      if (x_[k] < lo_[k] - cfg_.feas_tol || x_[k] > up_[k] + cfg_.feas_tol) return false;
    }
    return true;
  }

  bool has_improving_column() {
    std::vector<double> basic_cost(m_);
    for (std::size_t r = 0; r < m_; ++r) basic_cost[r] = cost_[head_[r]];
    const Eigen::VectorXd y = dual_of(basic_cost);
    for (std::size_t k = 0; k < n_ + m_; ++k) {
      if (status_[k] == VarStatus::Basic || lo_[k] == up_[k]) continue;
      const double d = cost_[k] - column_dot(k, y);
      if (d < -cfg_.opt_tol && (status_[k] == VarStatus::AtLower || status_[k] == VarStatus::Free)) return true;
      if (d > cfg_.opt_tol && (status_[k] == VarStatus::AtUpper || status_[k] == VarStatus::Free)) return true;
    }
    return false;
  }

  void apply_step(std::size_t entering, int direction, double step, const Eigen::VectorXd& alpha) {
    x_[entering] += direction * step;
    for (std::size_t r = 0; r < m_; ++r) x_[head_[r]] -= direction * step * alpha[r];
  }

  double column_dot(std::size_t k, const Eigen::VectorXd& y) const {
    if (k >= n_) return -y[static_cast<Eigen::Index>(k - n_)];
    double s = 0.0;
    const auto rows = lp_.matrix.col_rows(k);
    const auto vals = lp_.matrix.col_values(k);
    for (std::size_t t = 0; t < rows.size(); ++t) s += vals[t] * y[static_cast<Eigen::Index>(rows[t])];
    return s;
  }

  Eigen::VectorXd ftran(std::size_t k) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    if (k >= n_) {
      a[static_cast<Eigen::Index>(k - n_)] = -1.0;
    } else {
      const auto rows = lp_.matrix.col_rows(k);
      const auto vals = lp_.matrix.col_values(k);
      for (std::size_t t = 0; t < rows.size(); ++t) a[static_cast<Eigen::Index>(rows[t])] = vals[t];
    }
    return factor_.ftran(a);
  }

  Eigen::VectorXd dual_of(const std::vector<double>& basic_cost) const {
    const Eigen::Map<const Eigen::VectorXd> cb(basic_cost.data(), static_cast<Eigen::Index>(m_));
    return factor_.btran(cb);
  }

  void pivot(std::size_t r, const Eigen::VectorXd& alpha) { factor_.update(r, alpha); }

  void place_nonbasic(std::size_t k) {
    if (lo_[k] > -kInf) {
      status_[k] = VarStatus::AtLower;
      x_[k] = lo_[k];
    } else if (up_[k] < kInf) {
      status_[k] = VarStatus::AtUpper;
      x_[k] = up_[k];
    } else {
      status_[k] = VarStatus::Free;
      x_[k] = 0.0;
    }
  }

  void install_slack_basis() {
    for (std::size_t j = 0; j < n_; ++j) {
      place_nonbasic(j);
      pos_[j] = kNone;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      pos_[n_ + i] = i;
      status_[n_ + i] = VarStatus::Basic;
    }
    if (!refactor()) throw Error(ErrorCode::NumericalBreakdown, "slack basis singular");
  }

  bool install_basis(const Basis& warm) {
    if (warm.status.size() != n_ + m_) return false;
    const auto basic = static_cast<std::size_t>(
        std::count(warm.status.begin(), warm.status.end(), VarStatus::Basic));
    if (basic != m_) return false;
    std::size_t r = 0;
    for (std::size_t k = 0; k < n_ + m_; ++k) {
      pos_[k] = kNone;
      switch (warm.status[k]) {
        case VarStatus::Basic:
          status_[k] = VarStatus::Basic;
          head_[r] = k;
          pos_[k] = r++;
          break;
        case VarStatus::AtLower:
          if (lo_[k] > -kInf) {
            status_[k] = VarStatus::AtLower;
            x_[k] = lo_[k];
          } else {
            place_nonbasic(k);
          }
          break;
        case VarStatus::AtUpper:
          if (up_[k] < kInf) {
            status_[k] = VarStatus::AtUpper;
            x_[k] = up_[k];
          } else {
            place_nonbasic(k);
          }
          break;
        case VarStatus::Free:
          place_nonbasic(k);
          break;
      }
    }
    return refactor();
  }

  // Recomputes the basis inverse and the basic values. A singular basis is
  // repaired by falling back to the all-logical basis.
  bool refactor() {
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t r = 0; r < m_; ++r) {
      const auto col = static_cast<int>(r);
      const std::size_t k = head_[r];
      if (k >= n_) {
        entries.emplace_back(static_cast<int>(k - n_), col, -1.0);
      } else {
        const auto rows = lp_.matrix.col_rows(k);
        const auto vals = lp_.matrix.col_values(k);
        for (std::size_t t = 0; t < rows.size(); ++t) entries.emplace_back(static_cast<int>(rows[t]), col, vals[t]);
      }
    }
    const bool ok = factor_.factor(m_, entries);
    if (!ok) {
      if (repairing_) return false;
      repairing_ = true;
      for (std::size_t k = 0; k < n_ + m_; ++k) {
        if (status_[k] == VarStatus::Basic && k < n_) place_nonbasic(k);
      }
      install_slack_basis();
      repairing_ = false;
      return true;
    }
    recompute_basics();
    return true;
  }

  void recompute_basics() {
    // B x_B = -N x_N
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t k = 0; k < n_ + m_; ++k) {
      if (status_[k] == VarStatus::Basic || x_[k] == 0.0) continue;
      if (k >= n_) {
        rhs[static_cast<Eigen::Index>(k - n_)] += x_[k];
      } else {
        const auto rows = lp_.matrix.col_rows(k);
        const auto vals = lp_.matrix.col_values(k);
        for (std::size_t t = 0; t < rows.size(); ++t) rhs[static_cast<Eigen::Index>(rows[t])] -= vals[t] * x_[k];
      }
    }
    const Eigen::VectorXd xb = factor_.ftran(rhs);
    for (std::size_t r = 0; r < m_; ++r) x_[head_[r]] = xb[static_cast<Eigen::Index>(r)];
  }

  std::vector<double> certificate_from(const Eigen::VectorXd& y) const {
    return {y.data(), y.data() + y.size()};
  }

  void finish(LPSolution& sol) {
    sol.iterations = iterations_;
    sol.primal.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    sol.basis.status = status_;
    const double sign = lp_.sense == Sense::Minimize ? 1.0 : -1.0;
    std::vector<double> basic_cost(m_);
    for (std::size_t r = 0; r < m_; ++r) basic_cost[r] = cost_[head_[r]];
    const Eigen::VectorXd y = dual_of(basic_cost);
    sol.dual.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) sol.dual[i] = sign * y[static_cast<Eigen::Index>(i)];
    sol.reduced_cost.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      sol.reduced_cost[j] = status_[j] == VarStatus::Basic ? 0.0 : sign * (cost_[j] - column_dot(j, y));
    }
    sol.objective = lp_.objective_offset;
    for (std::size_t j = 0; j < n_; ++j) sol.objective += lp_.objective[j] * sol.primal[j];
  }

  const LPInstance& lp_;
  const KernelConfig& cfg_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> lo_, up_, cost_, x_;
  std::vector<VarStatus> status_;
  std::vector<std::size_t> head_, pos_;
  BasisFactor factor_;
  std::size_t iterations_ = 0;
  bool repairing_ = false;
};

}  // namespace

LPSolution solve_lp(const LPInstance& lp, const KernelConfig& cfg, const Basis* warm_start) {
  lp.check();
  if (lp.has_quadratic()) {
    throw Error(ErrorCode::InvalidArgument, "solve_lp called on an instance with quadratic terms");
  }
  Simplex simplex(lp, cfg);
  return simplex.run(warm_start);
}

LPSolution solve(const LPInstance& instance, const KernelConfig& cfg) {
  return instance.has_quadratic() ? solve_qp_diagonal(instance, cfg) : solve_lp(instance, cfg);
}

}  // namespace stochlp
