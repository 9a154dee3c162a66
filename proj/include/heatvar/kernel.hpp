#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "heatvar/variant.hpp"

namespace heatvar::kernel {

/// Covariance E[F(s)F(t)] of the temporal heat-equation slice at a fixed
/// spatial point: (2*pi)^{-1/2} (sqrt(t+s) - sqrt(|t-s|)).
double cov_f(double s, double t);

/// E|F(t) - F(s)|^2 for 0 <= s <= t, evaluated in a cancellation-free form
/// equivalent to (1/sqrt(pi))(sqrt(t) + sqrt(s) - sqrt(2t+2s) + sqrt(2t-2s)).
double increment_variance(double s, double t);

/// E[(F(t) - F(s))(F(v) - F(u))] by bilinearity of the covariance.
/// Degenerate intervals (s == t or u == v) return 0. Disjoint intervals are
/// evaluated through paired square-root differences so far-apart increments
/// keep full relative precision.
double cross_increment_cov(double s, double t, double u, double v);

/// gamma_k = 2 sqrt(k) - sqrt(k-1) - sqrt(k+1), k >= 1, computed as
/// 2 / ((sqrt(k)+sqrt(k-1))(sqrt(k+1)+sqrt(k))(sqrt(k+1)+sqrt(k-1))).
double gamma(std::int64_t k);

/// Covariance of uniform-grid increments i and j at spacing dt:
/// diagonal from increment_variance, off-diagonal
/// -sqrt(dt/(2*pi)) (gamma_{i+j-1} + gamma_{|i-j|}).
double uniform_increment_cov(std::int64_t i, std::int64_t j, double dt);

/// K(x) = (6/pi) x sqrt(1-x^2) + (2/pi)(1+2x^2) asin(x), the closed form of
/// E[X^{2+-} Y^{2+-}] for a standard bivariate normal pair with correlation x.
double k_function(double x);

/// Cached gamma_1..gamma_m with certified tail bounds.
class GammaSeq {
 public:
  explicit GammaSeq(std::size_t count);

  double operator[](std::size_t k) const;  ///< 1-based
  std::size_t size() const { return values_.size(); }

  /// Sum_{k=1}^{m} gamma_k, exact by telescoping: 1 - (sqrt(m+1) - sqrt(m)).
  static double partial_sum(std::size_t m);
  /// Sum_{k>m} gamma_k, exact: sqrt(m+1) - sqrt(m) = 1/(sqrt(m+1)+sqrt(m)).
  static double tail_sum(std::size_t m);
  /// Certified bound on Sum_{k>m} gamma_k^2: 1/(4 m^2).
  static double tail_sum_sq(std::size_t m);
  /// Certified bound on Sum_{k>m} gamma_k^3: m^{-7/2} / (7 sqrt(2)).
  static double tail_sum_cube(std::size_t m);

 private:
  std::vector<double> values_;
};

/// A limit-variance constant kappa^2 with a certified truncation error.
struct KappaConstant {
  Variant variant;
  double kappa_sq;          ///< computed value, kappa_sq > truncation_error
  double truncation_error;  ///< bound on |computed - true|, < requested tol
  std::size_t terms;        ///< series terms summed (0 for closed forms)

  double kappa() const;
};

/// Evaluates the limit variance rate for the requested modification family:
///   RademacherSquares:   6/pi exactly
///   SignedSquares:       6/pi - (4/pi) Sum K(gamma_i/2)
///   CenteredSquares:     4/pi + (2/pi) Sum gamma_i^2
///   AlternatingCentered: 4/pi + (2/pi) Sum (-1)^i gamma_i^2
/// Series start at i = 1 and are truncated with a certified tail < tol.
KappaConstant kappa_sq(Variant variant, double tol);

}  // namespace heatvar::kernel
