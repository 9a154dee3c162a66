#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "heatvar/partition.hpp"
#include "heatvar/rng.hpp"
#include "heatvar/sampler.hpp"
#include "heatvar/variant.hpp"

namespace heatvar::variations {

/// A right-continuous step function of time: value(t) is the cumulative value
/// at the largest knot <= t (0 before the first knot), plus drift*t when a
/// functional carries a continuous drift (only the centered running sum does).
struct StepSeries {
  std::vector<double> knots;
  std::vector<double> values;
  double drift = 0.0;

  double value(double t) const;
};

/// A test-function family {h_j} satisfying the mean-zero modification
/// assumptions. Rademacher families carry their realized signs.
struct HFamily {
  Variant variant = Variant::CenteredSquares;
  std::vector<double> xi;        ///< realized signs, Rademacher only
  std::uint64_t xi_seed = 0;     ///< master seed the signs came from

  /// Signs are drawn from the Xi stream family of `seeds`, disjoint from all
  /// path streams, so the family is independent of the sampled paths.
  static HFamily rademacher(std::size_t count, const SeedSpec& seeds, std::uint64_t replication);
  static HFamily signed_squares() { return {Variant::SignedSquares, {}, 0}; }
  static HFamily centered_squares() { return {Variant::CenteredSquares, {}, 0}; }
  static HFamily alternating_centered() { return {Variant::AlternatingCentered, {}, 0}; }
  static HFamily of(Variant v) { return {v, {}, 0}; }

  /// sigma_j^2 h_j(sigma_j^{-1} dF) for the 1-based index j.
  double term(std::size_t j, double increment, double sigma_j) const;
};

/// V(t) = sum of |F(t_j) - F(t_{j-1})|^4 over the partition, which must be a
/// subset of the path's grid times (the grid itself or every k-th point).
StepSeries quartic_variation(const sampler::PathSample& path, const Partition& partition);

/// Z_n(t) = sum of dF_j^3 up to floor(n t).
StepSeries signed_cubic(const sampler::PathSample& path);

/// B_n(t) = sum_{j<=floor(nt)} sigma_j^2 h_j(sigma_j^{-1} dF_j) with the
/// family's h. sigma_j comes from the path's increment covariance diagonal.
StepSeries b_n(const sampler::PathSample& path, const HFamily& family);

/// Raw alternating sum of squared increments, sum (-1)^j dF_j^2. Differs from
/// b_n(AlternatingCentered) by the deterministic drift sum (-1)^j sigma_j^2.
StepSeries alternating_raw(const sampler::PathSample& path);

/// Running sum of squared increments with its deterministic drift stored
/// separately: value(t) = sum_{j<=floor(nt)} dF_j^2 - sqrt(2n/pi) t.
StepSeries centered_sum_series(const sampler::PathSample& path);

/// The series above evaluated at t, with the drift taken at the exact query
/// time rather than the grid time.
double centered_sum_constant(const sampler::PathSample& path, double t);

/// Midpoint Riemann sum I_n(t) = sum_{j<=floor(nt/2)} F(t_{2j-1})(F(t_{2j}) - F(t_{2j-2})).
StepSeries midpoint_riemann(const sampler::PathSample& path);

/// F(t_m)^2 - 2 I_n(t) - sum_{j<=floor(nt/2)} (dF_{2j}^2 - dF_{2j-1}^2) with
/// m = floor(nt); algebraically equal to F(t_m)^2 - F(t_{2 floor(nt/2)})^2.
double midpoint_identity_residual(const sampler::PathSample& path, double t);

}  // namespace heatvar::variations
