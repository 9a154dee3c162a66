#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace heatvar {

/// Returns the largest j with j/n <= t (the grid index of a query time).
/// floor(n*t) alone can land one cell short when n*t rounds just below an
/// integer, so the result is corrected against the actual grid times.
std::int64_t grid_index(std::int64_t n, double t);

/// A time grid 0 = t_0 < t_1 < ... carrying mesh and counting semantics.
class Partition {
 public:
  /// General partition from explicit times. Requires times[0] == 0 and a
  /// strictly increasing, finite sequence.
  explicit Partition(std::vector<double> times);

  /// Uniform grid of rate n truncated at the horizon: times j/n for
  /// j = 0..floor(n*horizon).
  static Partition uniform(std::int64_t n, double horizon);

  const std::vector<double>& times() const { return times_; }
  std::size_t segments() const { return times_.size() - 1; }

  /// Largest gap between consecutive times.
  double mesh() const { return mesh_; }

  /// N(t) = max{j : t_j <= t}; 0 for t < t_1.
  std::size_t count_up_to(double t) const;

  bool is_uniform() const { return uniform_rate_.has_value(); }
  std::int64_t uniform_rate() const;  ///< n, only for uniform partitions
  double dt() const;                  ///< 1/n, only for uniform partitions

 private:
  std::vector<double> times_;
  double mesh_ = 0.0;
  std::optional<std::int64_t> uniform_rate_;
};

}  // namespace heatvar
