#ifndef STOCHLP_SAMPLING_HPP
#define STOCHLP_SAMPLING_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "stochlp/exec.hpp"
#include "stochlp/lp.hpp"
#include "stochlp/model.hpp"

namespace stochlp {

/// Philox4x32-10 counter-based generator.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Stream of uniforms and normals for one (seed, index) pair. Every value is
/// a pure function of (seed, index, position in the stream).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal by the Box-Muller transform.
  double normal();

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  std::size_t used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed for sub-stream (a, b) of `seed`, used to give every SAA batch and
/// evaluation sample its own independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Deterministic scenario generator. Implementations must be callable from
/// several threads at once.
class Sampler {
 public:
  virtual ~Sampler() = default;
  /// Identical (seed, index) always yields an identical scenario. The
  /// probability of the result is meaningless; instances reweight it.
  virtual Scenario sample(std::uint64_t seed, std::uint64_t index) const = 0;
};

/// Draws from a finite list of scenarios, using their probabilities as
/// relative weights.
class DiscreteSampler : public Sampler {
 public:
  explicit DiscreteSampler(std::vector<Scenario> scenarios);
  Scenario sample(std::uint64_t seed, std::uint64_t index) const override;

  const std::vector<Scenario>& scenarios() const { return scenarios_; }

 private:
  std::vector<Scenario> scenarios_;
  std::vector<double> cumulative_;
};

enum class EntryKind { Cost, Rhs, Technology, Lower, Upper };

/// A scenario entry overwritten by one coordinate of the normal vector.
/// `row` is unused for Cost, Lower and Upper; `col` is unused for Rhs.
struct EntryTarget {
  EntryKind kind = EntryKind::Rhs;
  std::size_t row = 0;
  std::size_t col = 0;
};

/// Multivariate normal N(mean, cov) written into the targets of a base
/// scenario. The covariance must be symmetric positive semidefinite.
class NormalSampler : public Sampler {
 public:
  NormalSampler(Scenario base, std::vector<EntryTarget> targets, std::vector<double> mean,
                std::vector<std::vector<double>> cov);
  Scenario sample(std::uint64_t seed, std::uint64_t index) const override;

  const std::vector<double>& mean() const { return mean_; }

 private:
  Scenario base_;
  std::vector<EntryTarget> targets_;
  std::vector<double> mean_;
  std::vector<std::vector<double>> factor_;  // lower triangular, cov = L L^T
};

/// The textbook model's normal sampler: (q1, q2, d1, d2) with the demands as
/// upper bounds of the recourse variables.
NormalSampler textbook_normal_sampler();
/// The two textbook scenarios with their probabilities.
DiscreteSampler textbook_discrete_sampler();

/// n scenarios sample(seed, 0..n-1) on the first stage and recourse shape of
/// `model` (its own scenarios are ignored), each with probability 1/n.
TwoStageProblem sample_instance(const TwoStageProblem& model, const Sampler& sampler, std::size_t n,
                                std::uint64_t seed);

struct ConfidenceReport {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  /// Scenarios per batch (SAA) or number of values.
  std::size_t n = 0;
  std::size_t batches = 0;
  /// (hi - lo) / |point|; 0 for a zero-width interval, +inf when point = 0
  /// and the width is not.
  double relative_error = 0.0;

  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

/// mean +- t_{M-1,(1+level)/2} sd / sqrt(M). Throws TooFewBatches for
/// fewer than two values.
ConfidenceReport confidence_interval(const std::vector<double>& values, double level = 0.95);

/// Relative error with the conventions of ConfidenceReport.
double relative_width(double lo, double hi, double point);

struct SaaConfig {
  double confidence = 0.95;
  double rel_tol = 5e-2;
  std::size_t initial_n = 16;
  std::size_t batches = 10;
  std::size_t eval_samples = 1000;
  std::size_t growth = 2;
  /// Largest batch size tried before giving up with BudgetExceeded.
  std::size_t max_n = 4096;
  std::uint64_t seed = 1;
  ExecConfig exec;
  KernelConfig kernel;

  void check() const;
};

struct SaaRound {
  std::size_t n = 0;
  ConfidenceReport batch;
  ConfidenceReport incumbent;
  double relative_error = 0.0;
};

struct SaaResult {
  /// Interval on the optimal value in the first-stage sense: the smallest
  /// interval holding both the batch and the incumbent interval. The point
  /// is the incumbent's estimated value.
  ConfidenceReport interval;
  /// Mean of the batch optimal values (an optimistic estimate, biased
  /// towards better than the optimum) and the sampled value of the
  /// incumbent x (a pessimistic estimate), both in the first-stage sense.
  ConfidenceReport batch;
  ConfidenceReport incumbent;
  std::vector<double> x;
  std::size_t n = 0;
  bool budget_exceeded = false;
  std::uint64_t seed = 0;
  std::vector<SaaRound> rounds;
};

/// Multiple-replication SAA. Each round solves `batches` sampled instances
/// of size n as extensive forms, picks the batch decision that does best on
/// a screening sample, and estimates its value on a fresh sample of
/// eval_samples scenarios. n grows by `growth` until the relative width of
/// the combined interval is at most rel_tol.
SaaResult saa_solve(const TwoStageProblem& model, const Sampler& sampler, const SaaConfig& cfg = {});

}  // namespace stochlp

#endif  // STOCHLP_SAMPLING_HPP
