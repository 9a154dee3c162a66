#include "heatvar/sampler.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "heatvar/errors.hpp"
#include "heatvar/kernel.hpp"
#include "heatvar/parallel.hpp"
#include "heatvar/partition.hpp"
#include "heatvar/summation.hpp"

namespace heatvar::sampler {

IncrementCovariance build_increment_covariance(std::int64_t n, double horizon,
                                               std::size_t memory_budget) {
  if (n < 1) throw std::invalid_argument("build_increment_covariance: n must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("build_increment_covariance: horizon must be > 0");
  const std::int64_t count = grid_index(n, horizon);
  if (count < 1)
    throw std::invalid_argument("build_increment_covariance: floor(n*horizon) must be >= 1");

  const auto nsz = static_cast<std::size_t>(count);
  if (nsz > memory_budget / sizeof(double) / nsz)
    throw ResourceError("increment covariance of size " + std::to_string(count) + "x" +
                        std::to_string(count) + " exceeds the memory budget of " +
                        std::to_string(memory_budget) + " bytes");

  IncrementCovariance cov;
  cov.n = n;
  cov.horizon = horizon;
  cov.dt = 1.0 / static_cast<double>(n);
  cov.entries.resize(count, count);
  cov.sigma.resize(count);

  // gamma_{i+j-1} reaches 2N-1; cache once instead of 2N^2 sqrt evaluations.
  const kernel::GammaSeq gammas(static_cast<std::size_t>(2 * count));
  const double off_scale = -std::sqrt(cov.dt / (2.0 * std::numbers::pi));
  for (std::int64_t j = 0; j < count; ++j) {
    const double tj = static_cast<double>(j);
    cov.entries(j, j) = kernel::increment_variance(tj * cov.dt, (tj + 1.0) * cov.dt);
    cov.sigma(j) = std::sqrt(cov.entries(j, j));
    for (std::int64_t i = 0; i < j; ++i) {
      const auto lag = static_cast<std::size_t>(j - i);
      const auto sum = static_cast<std::size_t>(i + j + 1);  // (i+1)+(j+1)-1
      const double value = off_scale * (gammas[sum] + gammas[lag]);
      cov.entries(i, j) = value;
      cov.entries(j, i) = value;
    }
  }
  return cov;
}

namespace {

// Unblocked reference Cholesky used only to locate the failing pivot for the
// error report once Eigen has already rejected the matrix.
std::pair<std::size_t, double> find_failing_pivot(Eigen::MatrixXd a) {
  const auto n = static_cast<std::size_t>(a.rows());
  for (std::size_t k = 0; k < n; ++k) {
    double pivot = a(k, k);
    for (std::size_t m = 0; m < k; ++m) pivot -= a(k, m) * a(k, m);
    if (!(pivot > 0.0)) return {k, pivot};
    a(k, k) = std::sqrt(pivot);
    for (std::size_t i = k + 1; i < n; ++i) {
      double sum = a(i, k);
      for (std::size_t m = 0; m < k; ++m) sum -= a(i, m) * a(k, m);
      a(i, k) = sum / a(k, k);
    }
  }
  return {n, 0.0};
}

}  // namespace

Factor factorize(const IncrementCovariance& cov) {
  if (cov.size() < 1) throw std::invalid_argument("factorize: empty covariance");

  Factor factor;
  factor.n = cov.n;
  factor.horizon = cov.horizon;
  factor.dt = cov.dt;
  factor.sigma = std::make_shared<Eigen::VectorXd>(cov.sigma);

  Eigen::LLT<Eigen::MatrixXd> llt(cov.entries);
  if (llt.info() == Eigen::Success) {
    factor.lower = llt.matrixL();
    return factor;
  }

  // One tiny-jitter retry, recorded so downstream reports can surface it.
  const double delta = 1e-12 * std::sqrt(cov.dt);
  Eigen::MatrixXd jittered = cov.entries;
  jittered.diagonal().array() += delta;
  Eigen::LLT<Eigen::MatrixXd> retry(jittered);
  if (retry.info() == Eigen::Success) {
    factor.lower = retry.matrixL();
    factor.jitter_applied = true;
    factor.jitter_delta = delta;
    return factor;
  }

  const auto [index, value] = find_failing_pivot(jittered);
  throw FactorizationError(index, value,
                           "factorize: non-positive pivot " + std::to_string(value) +
                               " at index " + std::to_string(index) + " (after jitter retry)");
}

PathSample sample_path(const Factor& factor, std::mt19937_64& stream) {
  const std::int64_t count = factor.size();
  Eigen::VectorXd z(count);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::int64_t j = 0; j < count; ++j) z(j) = normal(stream);

  Eigen::VectorXd raw = factor.lower.triangularView<Eigen::Lower>() * z;

  PathSample path;
  path.n = factor.n;
  path.horizon = factor.horizon;
  path.sigma = factor.sigma;
  path.cumulative.resize(static_cast<std::size_t>(count) + 1);
  path.increments.resize(static_cast<std::size_t>(count));
  path.cumulative[0] = 0.0;
  CompensatedSum prefix;
  for (std::int64_t j = 0; j < count; ++j) {
    prefix.add(raw(j));
    path.cumulative[static_cast<std::size_t>(j) + 1] = prefix.value();
  }
  for (std::int64_t j = 0; j < count; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    path.increments[idx] = path.cumulative[idx + 1] - path.cumulative[idx];
  }
  return path;
}

std::vector<PathSample> sample_batch(const Factor& factor, const SeedSpec& seeds,
                                     std::int64_t replications, int threads) {
  if (replications < 1) throw std::invalid_argument("sample_batch: replications must be >= 1");
  std::vector<PathSample> out(static_cast<std::size_t>(replications));
  parallel_for_index(replications, threads, [&](std::int64_t r) {
    auto stream = seeds.stream(StreamKind::Path, static_cast<std::uint64_t>(r));
    out[static_cast<std::size_t>(r)] = sample_path(factor, stream);
  });
  return out;
}

}  // namespace heatvar::sampler
