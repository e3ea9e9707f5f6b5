#ifndef STOCHLP_LP_HPP
#define STOCHLP_LP_HPP

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stochlp/sparse.hpp"

namespace stochlp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class RowSense { Equal, LessEqual, GreaterEqual };

std::string to_string(Sense s);
std::string to_string(RowSense s);

/// Canonical solver input:
///
///   min/max  c^T x + offset + 1/2 sum_j quadratic_j (x_j - center_j)^2
///   s.t.     a_i x  (=, <=, >=)  rhs_i
///            lower <= x <= upper
///
/// `quadratic` and `center` are either empty or of length cols(). An empty
/// center means the quadratic term is centered at the origin.
struct LPInstance {
  Sense sense = Sense::Minimize;
  std::vector<double> objective;
  double objective_offset = 0.0;
  std::vector<double> quadratic;
  std::vector<double> center;
  SparseMatrix matrix;
  std::vector<RowSense> row_senses;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> col_names;
  std::vector<std::string> row_names;

  std::size_t cols() const noexcept { return objective.size(); }
  std::size_t rows() const noexcept { return rhs.size(); }
  bool has_quadratic() const noexcept;

  /// Throws DimensionMismatch / InvalidArgument when the data is inconsistent.
  void check() const;
  /// Objective (including offset and quadratic part) at x, in the declared sense.
  double evaluate(const std::vector<double>& x) const;
  /// Largest violation of rows and bounds at x.
  double max_violation(const std::vector<double>& x) const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };
std::string to_string(SolveStatus s);

enum class VarStatus : unsigned char { Basic, AtLower, AtUpper, Free };

/// Simplex basis over the structural columns followed by one logical per row.
struct Basis {
  std::vector<VarStatus> status;
  bool empty() const noexcept { return status.empty(); }
};

/// Dual convention, used unchanged by every consumer of the kernel:
/// dual[i] is the derivative of the optimal objective (in minimization form)
/// with respect to rhs[i]. For a minimization problem this makes the
/// multiplier of an active >= row nonnegative and that of an active <= row
/// nonpositive. reduced_cost[j] = c_j - a_j^T dual (minimization form), so
/// the dual objective is sum_i dual_i rhs_i + sum_j reduced_cost_j x_j over
/// columns resting on a bound.
struct LPSolution {
  SolveStatus status = SolveStatus::IterationLimit;
  std::vector<double> primal;
  std::vector<double> dual;
  std::vector<double> reduced_cost;
  double objective = 0.0;
  /// Present when status == Infeasible. Row multipliers y such that
  ///   max_{lower<=x<=upper} (A^T y)^T x  <  min_{s in row ranges} y^T s,
  /// i.e. no x within bounds can produce row activities inside the ranges.
  std::vector<double> farkas;
  Basis basis;
  std::size_t iterations = 0;
};

enum class PivotRule { Dantzig, Bland };

struct KernelConfig {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  std::size_t max_iterations = 100000;
  /// Degenerate pivots tolerated before Bland's rule is engaged.
  std::size_t degeneracy_limit = 50;
  PivotRule pivot_rule = PivotRule::Dantzig;
  std::size_t refactor_period = 64;
  /// Barrier iteration cap for the quadratic path.
  std::size_t barrier_iterations = 200;
};

/// Bounded-variable revised simplex. Requires an instance without quadratic
/// terms; `warm_start` is used when it is a valid basis for the instance.
LPSolution solve_lp(const LPInstance& lp, const KernelConfig& cfg = {},
                    const Basis* warm_start = nullptr);

/// Convex quadratic program with a diagonal Hessian. Feasibility is
/// established by simplex phase one, the optimum by a primal-dual barrier
/// method. A barrier that does not reach the tolerances reports
/// IterationLimit.
LPSolution solve_qp_diagonal(const LPInstance& qp, const KernelConfig& cfg = {});

/// Dispatches on whether the instance carries quadratic terms.
LPSolution solve(const LPInstance& instance, const KernelConfig& cfg = {});

enum class PenaltyNorm { L1, LInf };

/// Replaces a proximal term r/2 ||x - center||^2 by r ||x - center||_1 (split
/// variables per coordinate) or r ||x - center||_inf (one bound variable).
/// The added columns follow the original ones, so primal[0..cols) of the
/// linearized solution is a point of the original region.
LPInstance linearize_penalty(const LPInstance& qp, PenaltyNorm norm);

/// Pluggable solver backend. The built-in kernel is the reference; other
/// implementations must honor the same dual convention.
class SolverInterface {
 public:
  virtual ~SolverInterface() = default;
  virtual LPSolution solve_lp(const LPInstance& lp, const KernelConfig& cfg) const = 0;
  virtual LPSolution solve_qp_diagonal(const LPInstance& qp, const KernelConfig& cfg) const = 0;
};

class BuiltinSolver final : public SolverInterface {
 public:
  LPSolution solve_lp(const LPInstance& lp, const KernelConfig& cfg) const override {
    return stochlp::solve_lp(lp, cfg);
  }
  LPSolution solve_qp_diagonal(const LPInstance& qp, const KernelConfig& cfg) const override {
    return stochlp::solve_qp_diagonal(qp, cfg);
  }
};

/// Free-format MPS text of the linear part (debug dump; quadratic terms are
/// written as comments). Objective direction is emitted via OBJSENSE.
void write_mps(std::ostream& out, const LPInstance& lp, const std::string& name = "LP");
std::string to_mps(const LPInstance& lp, const std::string& name = "LP");

/// Column-bound part of the dual objective, in minimization form:
/// sum_j reduced_cost_j * (lower_j if reduced_cost_j > 0 else upper_j).
/// Columns whose selected bound is infinite contribute 0. Together with
/// dual^T rhs this is the dual objective, a lower bound valid for every rhs.
double bound_contribution(const LPInstance& lp, const LPSolution& sol);

/// dual^T rhs + bound_contribution, minimization form.
double dual_objective(const LPInstance& lp, const LPSolution& sol);

}  // namespace stochlp

#endif  // STOCHLP_LP_HPP
