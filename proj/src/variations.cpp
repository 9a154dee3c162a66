#include "heatvar/variations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heatvar/summation.hpp"

namespace heatvar::variations {

double StepSeries::value(double t) const {
  const double base = [&] {
    auto it = std::upper_bound(knots.begin(), knots.end(), t);
    if (it == knots.begin()) return 0.0;
    return values[static_cast<std::size_t>(std::distance(knots.begin(), it)) - 1];
  }();
  return base + drift * t;
}

HFamily HFamily::rademacher(std::size_t count, const SeedSpec& seeds, std::uint64_t replication) {
  HFamily family;
  family.variant = Variant::RademacherSquares;
  family.xi_seed = seeds.master_seed;
  family.xi.resize(count);
  auto stream = seeds.stream(StreamKind::Xi, replication);
  for (auto& s : family.xi) s = (stream() >> 63) ? 1.0 : -1.0;
  return family;
}

double HFamily::term(std::size_t j, double increment, double sigma_j) const {
  const double sq = increment * increment;
  switch (variant) {
    case Variant::RademacherSquares:
      if (j < 1 || j > xi.size())
        throw std::invalid_argument("HFamily: Rademacher sign index out of range");
      return xi[j - 1] * sq;
    case Variant::SignedSquares: {
      const double s = increment > 0.0 ? 1.0 : (increment < 0.0 ? -1.0 : 0.0);
      return sq * s;
    }
    case Variant::CenteredSquares:
      return sq - sigma_j * sigma_j;
    case Variant::AlternatingCentered:
      return (j % 2 == 0 ? 1.0 : -1.0) * (sq - sigma_j * sigma_j);
  }
  throw std::invalid_argument("HFamily: unknown variant");
}

namespace {

std::vector<double> grid_knots(const sampler::PathSample& path) {
  std::vector<double> knots(path.increments.size());
  for (std::size_t j = 0; j < knots.size(); ++j)
    knots[j] = path.time_at(static_cast<std::int64_t>(j) + 1);
  return knots;
}

// Maps a partition time onto the path's grid index, rejecting times that are
// not grid points.
std::int64_t grid_index_of(const sampler::PathSample& path, double t) {
  const double scaled = t * static_cast<double>(path.n);
  const auto idx = static_cast<std::int64_t>(std::llround(scaled));
  if (idx < 0 || idx > path.segments() ||
      std::abs(scaled - static_cast<double>(idx)) > 1e-9 * std::max(1.0, scaled))
    throw std::invalid_argument("partition is not refinable from the path grid");
  return idx;
}

}  // namespace

StepSeries quartic_variation(const sampler::PathSample& path, const Partition& partition) {
  const auto& times = partition.times();
  StepSeries series;
  series.knots.reserve(times.size() - 1);
  series.values.reserve(times.size() - 1);
  CompensatedSum acc;
  std::int64_t prev = grid_index_of(path, times[0]);
  if (prev != 0) throw std::invalid_argument("partition must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    const std::int64_t idx = grid_index_of(path, times[k]);
    if (idx <= prev) throw std::invalid_argument("partition is not refinable from the path grid");
    const double d = path.cumulative[static_cast<std::size_t>(idx)] -
                     path.cumulative[static_cast<std::size_t>(prev)];
    const double d2 = d * d;
    acc.add(d2 * d2);
    series.knots.push_back(times[k]);
    series.values.push_back(acc.value());
    prev = idx;
  }
  return series;
}

StepSeries signed_cubic(const sampler::PathSample& path) {
  StepSeries series;
  series.knots = grid_knots(path);
  series.values.resize(path.increments.size());
  CompensatedSum acc;
  for (std::size_t j = 0; j < path.increments.size(); ++j) {
    const double d = path.increments[j];
    acc.add(d * d * d);
    series.values[j] = acc.value();
  }
  return series;
}

StepSeries b_n(const sampler::PathSample& path, const HFamily& family) {
  if (!path.sigma || path.sigma->size() != path.segments())
    throw std::invalid_argument("b_n: path carries no increment-covariance diagonal");
  if (family.variant == Variant::RademacherSquares &&
      family.xi.size() < path.increments.size())
    throw std::invalid_argument("b_n: Rademacher family shorter than the path");
  StepSeries series;
  series.knots = grid_knots(path);
  series.values.resize(path.increments.size());
  CompensatedSum acc;
  for (std::size_t j = 0; j < path.increments.size(); ++j) {
    acc.add(family.term(j + 1, path.increments[j], (*path.sigma)(static_cast<Eigen::Index>(j))));
    series.values[j] = acc.value();
  }
  return series;
}

StepSeries alternating_raw(const sampler::PathSample& path) {
  StepSeries series;
  series.knots = grid_knots(path);
  series.values.resize(path.increments.size());
  CompensatedSum acc;
  for (std::size_t j = 0; j < path.increments.size(); ++j) {
    const double d = path.increments[j];
    acc.add(((j + 1) % 2 == 0 ? 1.0 : -1.0) * d * d);
    series.values[j] = acc.value();
  }
  return series;
}

StepSeries centered_sum_series(const sampler::PathSample& path) {
  StepSeries series;
  series.knots = grid_knots(path);
  series.values.resize(path.increments.size());
  series.drift = -std::sqrt(2.0 * static_cast<double>(path.n) / std::numbers::pi);
  CompensatedSum acc;
  for (std::size_t j = 0; j < path.increments.size(); ++j) {
    const double d = path.increments[j];
    acc.add(d * d);
    series.values[j] = acc.value();
  }
  return series;
}

double centered_sum_constant(const sampler::PathSample& path, double t) {
  if (!(t >= 0.0) || t > path.horizon)
    throw std::invalid_argument("centered_sum_constant: t outside [0, horizon]");
  const std::int64_t m = grid_index(path.n, t);
  CompensatedSum acc;
  for (std::int64_t j = 0; j < m; ++j) {
    const double d = path.increments[static_cast<std::size_t>(j)];
    acc.add(d * d);
  }
  return acc.value() - std::sqrt(2.0 * static_cast<double>(path.n) / std::numbers::pi) * t;
}

StepSeries midpoint_riemann(const sampler::PathSample& path) {
  if (path.segments() < 2) throw std::invalid_argument("midpoint_riemann: need at least 2 increments");
  StepSeries series;
  const auto pairs = static_cast<std::size_t>(path.segments() / 2);
  series.knots.resize(pairs);
  series.values.resize(pairs);
  CompensatedSum acc;
  for (std::size_t j = 1; j <= pairs; ++j) {
    const double mid = path.cumulative[2 * j - 1];
    const double span = path.cumulative[2 * j] - path.cumulative[2 * j - 2];
    acc.add(mid * span);
    series.knots[j - 1] = path.time_at(static_cast<std::int64_t>(2 * j));
    series.values[j - 1] = acc.value();
  }
  return series;
}

double midpoint_identity_residual(const sampler::PathSample& path, double t) {
  if (!(t >= 0.0) || t > path.horizon)
    throw std::invalid_argument("midpoint_identity_residual: t outside [0, horizon]");
  const std::int64_t m = grid_index(path.n, t);
  const std::int64_t pairs = m / 2;
  CompensatedSum midpoint;
  CompensatedSum alternating;
  for (std::int64_t j = 1; j <= pairs; ++j) {
    const auto even = static_cast<std::size_t>(2 * j);
    const double mid = path.cumulative[even - 1];
    const double span = path.cumulative[even] - path.cumulative[even - 2];
    midpoint.add(mid * span);
    const double de = path.increments[even - 1];
    const double do_ = path.increments[even - 2];
    alternating.add(de * de - do_ * do_);
  }
  const double f_snap = path.cumulative[static_cast<std::size_t>(m)];
  return f_snap * f_snap - 2.0 * midpoint.value() - alternating.value();
}

}  // namespace heatvar::variations
