#include "heatvar/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heatvar {

std::int64_t grid_index(std::int64_t n, double t) {
  if (n < 1) throw std::invalid_argument("grid_index: n must be >= 1");
  if (!(t >= 0.0)) throw std::invalid_argument("grid_index: t must be >= 0");
  auto i = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * t));
  while (i >= 1 && static_cast<double>(i) / static_cast<double>(n) > t) --i;
  while (static_cast<double>(i + 1) / static_cast<double>(n) <= t) ++i;
  return std::max<std::int64_t>(i, 0);
}

Partition::Partition(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw std::invalid_argument("Partition: need at least two times");
  if (times_.front() != 0.0) throw std::invalid_argument("Partition: times[0] must be 0");
  double mesh = 0.0;
  for (std::size_t j = 1; j < times_.size(); ++j) {
    const double gap = times_[j] - times_[j - 1];
    if (!(gap > 0.0) || !std::isfinite(times_[j]))
      throw std::invalid_argument("Partition: times must be strictly increasing and finite");
    mesh = std::max(mesh, gap);
  }
  mesh_ = mesh;
}

Partition Partition::uniform(std::int64_t n, double horizon) {
  if (n < 1) throw std::invalid_argument("Partition::uniform: n must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("Partition::uniform: horizon must be > 0");
  const std::int64_t count = grid_index(n, horizon);
  if (count < 1) throw std::invalid_argument("Partition::uniform: horizon shorter than one step");
  std::vector<double> times(static_cast<std::size_t>(count) + 1);
  for (std::int64_t j = 0; j <= count; ++j)
    times[static_cast<std::size_t>(j)] = static_cast<double>(j) / static_cast<double>(n);
  Partition p(std::move(times));
  p.uniform_rate_ = n;
  return p;
}

std::size_t Partition::count_up_to(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(times_.begin(), it)) - 1;
}

std::int64_t Partition::uniform_rate() const {
  if (!uniform_rate_) throw std::logic_error("Partition: not a uniform partition");
  return *uniform_rate_;
}

double Partition::dt() const { return 1.0 / static_cast<double>(uniform_rate()); }

}  // namespace heatvar
