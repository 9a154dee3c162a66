#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "heatvar/rng.hpp"

namespace heatvar::sampler {

/// The symmetric positive-definite matrix of E[dF_i dF_j] on a uniform grid.
struct IncrementCovariance {
  std::int64_t n = 0;      ///< grid rate per unit time
  double horizon = 0.0;    ///< T
  double dt = 0.0;         ///< 1/n
  Eigen::MatrixXd entries; ///< N x N with N = floor(n*T)
  Eigen::VectorXd sigma;   ///< sigma_j = sqrt(entries(j,j))

  std::int64_t size() const { return entries.rows(); }
};

/// Lower-triangular factor L with L L^T = entries, plus jitter diagnostics.
struct Factor {
  std::int64_t n = 0;
  double horizon = 0.0;
  double dt = 0.0;
  Eigen::MatrixXd lower;
  std::shared_ptr<const Eigen::VectorXd> sigma;
  bool jitter_applied = false;
  double jitter_delta = 0.0;  ///< value added to the diagonal, 0 if none

  std::int64_t size() const { return lower.rows(); }
};

/// One exact realization of F on the grid: cumulative[j] = F(t_j) with
/// cumulative[0] = 0, and increments[j-1] = cumulative[j] - cumulative[j-1]
/// exactly (the increments are re-derived from the prefix sums so the
/// telescoping identity holds bit-for-bit).
struct PathSample {
  std::int64_t n = 0;
  double horizon = 0.0;
  std::vector<double> increments;  ///< dF_1..dF_N
  std::vector<double> cumulative;  ///< F(t_0)=0, ..., F(t_N)
  std::shared_ptr<const Eigen::VectorXd> sigma;

  std::int64_t segments() const { return static_cast<std::int64_t>(increments.size()); }
  double time_at(std::int64_t j) const {
    return static_cast<double>(j) / static_cast<double>(n);
  }
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{2} << 30;  // 2 GiB

/// Fills the exact increment covariance for a uniform grid of rate n on
/// [0, horizon]. Refuses to allocate past the memory budget.
IncrementCovariance build_increment_covariance(std::int64_t n, double horizon,
                                               std::size_t memory_budget = kDefaultMemoryBudget);

/// Cholesky factorization. A failed pivot triggers one retry with
/// delta*sqrt(dt) added to the diagonal (delta = 1e-12, recorded in the
/// result); a second failure throws FactorizationError with the pivot.
Factor factorize(const IncrementCovariance& cov);

/// Draws one path: increments = L z with z iid standard normal from the
/// stream, prefix-summed with compensated addition.
PathSample sample_path(const Factor& factor, std::mt19937_64& stream);

/// Replication r uses seeds.stream(Path, r); the output is indexed by r and
/// independent of execution order.
std::vector<PathSample> sample_batch(const Factor& factor, const SeedSpec& seeds,
                                     std::int64_t replications, int threads = 1);

}  // namespace heatvar::sampler
