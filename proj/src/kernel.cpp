#include "heatvar/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "heatvar/errors.hpp"
#include "heatvar/summation.hpp"

namespace heatvar::kernel {

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

// Largest series length kappa_sq will sum before reporting a resource error.
constexpr std::size_t kMaxSeriesTerms = 200'000'000;

void require_nonnegative(double x, const char* name) {
  if (!(x >= 0.0)) throw std::domain_error(std::string(name) + " must be >= 0");
}

// sqrt(a) - sqrt(b) without cancellation, a, b >= 0.
double sqrt_diff(double a, double b) { return (a - b) / (std::sqrt(a) + std::sqrt(b)); }

}  // namespace

double cov_f(double s, double t) {
  require_nonnegative(s, "s");
  require_nonnegative(t, "t");
  return kInvSqrt2Pi * (std::sqrt(t + s) - std::sqrt(std::abs(t - s)));
}

double increment_variance(double s, double t) {
  require_nonnegative(s, "s");
  if (!(s <= t)) throw std::domain_error("increment_variance requires s <= t");
  if (s == t) return 0.0;
  // sqrt(t) + sqrt(s) - sqrt(2(t+s)) = -(sqrt(t)-sqrt(s))^2 / (sqrt(t)+sqrt(s)+sqrt(2(t+s)))
  const double rs = std::sqrt(s);
  const double rt = std::sqrt(t);
  const double root_diff = (t - s) / (rt + rs);
  const double defect = root_diff * root_diff / (rt + rs + std::sqrt(2.0 * (t + s)));
  return (std::sqrt(2.0 * (t - s)) - defect) / std::sqrt(kPi);
}

double cross_increment_cov(double s, double t, double u, double v) {
  require_nonnegative(s, "s");
  require_nonnegative(u, "u");
  if (!(s <= t) || !(u <= v)) throw std::domain_error("cross_increment_cov requires s <= t and u <= v");
  if (s == t || u == v) return 0.0;  // degenerate interval, zero by convention
  if (u < s || (u == s && v < t)) {
    std::swap(s, u);
    std::swap(t, v);
  }
  if (s == u && t == v) return increment_variance(s, t);

  if (t <= u) {
    // Disjoint (possibly touching) intervals: cov = k (t-s) [(1/B - 1/A) + (1/D - 1/C)]
    // with every difference evaluated as a stable ratio.
    const double rut = std::sqrt(u + t), rus = std::sqrt(u + s);
    const double rvt = std::sqrt(v + t), rvs = std::sqrt(v + s);
    const double a = rut + rus, b = rvt + rvs;
    const double a_minus_b = -(v - u) * (1.0 / (rut + rvt) + 1.0 / (rus + rvs));
    const double term1 = a_minus_b / (a * b);

    const double dut = std::sqrt(u - t), dus = std::sqrt(u - s);
    const double dvt = std::sqrt(v - t), dvs = std::sqrt(v - s);
    const double c = dus + dut, d = dvs + dvt;
    const double c_minus_d = -(v - u) * (1.0 / (dus + dvs) + 1.0 / (dut + dvt));
    const double term2 = c_minus_d / (c * d);

    return kInvSqrt2Pi * (t - s) * (term1 + term2);
  }

  // Overlapping or nested intervals: group the bilinear expansion into two
  // stable differences cov(F(v), dF) - cov(F(u), dF).
  const auto against_level = [&](double b) {
    const double plus = (t - s) / (std::sqrt(b + t) + std::sqrt(b + s));
    const double abt = std::abs(b - t), abs_ = std::abs(b - s);
    const double minus = sqrt_diff(abt, abs_);
    return kInvSqrt2Pi * (plus - minus);
  };
  return against_level(v) - against_level(u);
}

double gamma(std::int64_t k) {
  if (k < 1) throw std::domain_error("gamma is defined for k >= 1");
  const double kd = static_cast<double>(k);
  const double rk = std::sqrt(kd);
  const double rkm = std::sqrt(kd - 1.0);
  const double rkp = std::sqrt(kd + 1.0);
  return 2.0 / ((rk + rkm) * (rkp + rk) * (rkp + rkm));
}

double uniform_increment_cov(std::int64_t i, std::int64_t j, double dt) {
  if (i < 1 || j < 1) throw std::domain_error("uniform_increment_cov requires i, j >= 1");
  if (!(dt > 0.0)) throw std::domain_error("uniform_increment_cov requires dt > 0");
  if (i == j) {
    const double id = static_cast<double>(i);
    return increment_variance((id - 1.0) * dt, id * dt);
  }
  const std::int64_t lag = std::abs(i - j);
  return -std::sqrt(dt / (2.0 * kPi)) * (gamma(i + j - 1) + gamma(lag));
}

double k_function(double x) {
  if (!(std::abs(x) <= 1.0)) throw std::domain_error("k_function is defined on [-1, 1]");
  return (6.0 / kPi) * x * std::sqrt(1.0 - x * x) +
         (2.0 / kPi) * (1.0 + 2.0 * x * x) * std::asin(x);
}

GammaSeq::GammaSeq(std::size_t count) {
  values_.resize(count);
  for (std::size_t k = 1; k <= count; ++k)
    values_[k - 1] = gamma(static_cast<std::int64_t>(k));
}

double GammaSeq::operator[](std::size_t k) const {
  if (k < 1 || k > values_.size()) throw std::out_of_range("GammaSeq index");
  return values_[k - 1];
}

double GammaSeq::partial_sum(std::size_t m) { return 1.0 - tail_sum(m); }

double GammaSeq::tail_sum(std::size_t m) {
  const double md = static_cast<double>(m);
  return 1.0 / (std::sqrt(md + 1.0) + std::sqrt(md));
}

double GammaSeq::tail_sum_sq(std::size_t m) {
  const double md = static_cast<double>(m);
  return 1.0 / (4.0 * md * md);
}

double GammaSeq::tail_sum_cube(std::size_t m) {
  const double md = static_cast<double>(m);
  return std::pow(md, -3.5) / (7.0 * std::sqrt(2.0));
}

double KappaConstant::kappa() const { return std::sqrt(kappa_sq); }

namespace {

std::size_t required_terms(Variant variant, double tol) {
  double need = 0.0;
  switch (variant) {
    case Variant::RademacherSquares:
      return 0;
    case Variant::SignedSquares:
      // (4/pi) Sum_{i>m} |K(gamma_i/2) - (4/pi) gamma_i| <= m^{-7/2} / (7 sqrt(2) pi)
      need = std::pow(7.0 * std::sqrt(2.0) * kPi * tol, -2.0 / 7.0);
      break;
    case Variant::CenteredSquares:
      // (2/pi) Sum_{k>m} gamma_k^2 <= 1 / (2 pi m^2)
      need = std::sqrt(1.0 / (2.0 * kPi * tol));
      break;
    case Variant::AlternatingCentered:
      // alternating with decreasing terms: |tail| <= (2/pi) gamma_{m+1}^2 <= 1/(pi m^3)
      need = std::cbrt(1.0 / (kPi * tol));
      break;
  }
  const double capped = std::ceil(need) + 1.0;
  if (!(capped < static_cast<double>(kMaxSeriesTerms))) {
    const double achievable = [&] {
      const double m = static_cast<double>(kMaxSeriesTerms);
      switch (variant) {
        case Variant::SignedSquares: return std::pow(m, -3.5) / (7.0 * std::sqrt(2.0) * kPi);
        case Variant::CenteredSquares: return 1.0 / (2.0 * kPi * m * m);
        default: return 1.0 / (kPi * m * m * m);
      }
    }();
    throw ResourceError("kappa_sq: tol " + std::to_string(tol) + " needs more than " +
                        std::to_string(kMaxSeriesTerms) +
                        " series terms; achievable bound is about " + std::to_string(achievable));
  }
  return std::max<std::size_t>(static_cast<std::size_t>(capped), 8);
}

}  // namespace

KappaConstant kappa_sq(Variant variant, double tol) {
  if (!(tol > 0.0)) throw std::domain_error("kappa_sq requires tol > 0");
  const std::size_t m = required_terms(variant, tol);

  switch (variant) {
    case Variant::RademacherSquares:
      return {variant, 6.0 / kPi, 0.0, 0};

    case Variant::SignedSquares: {
      // Sum K(gamma_i/2) = (4/pi) Sum gamma_i + Sum r_i with r_i = K(gamma_i/2) - (4/pi) gamma_i.
      // The linear part telescopes to exactly 4/pi, leaving a residual series
      // bounded by gamma_i^3/4; summing it directly would need ~tol^{-2} terms.
      CompensatedSum residual;
      for (std::size_t i = 1; i <= m; ++i) {
        const double g = gamma(static_cast<std::int64_t>(i));
        residual.add(k_function(0.5 * g) - (4.0 / kPi) * g);
      }
      const double series = 4.0 / kPi + residual.value();
      const double bound = std::pow(static_cast<double>(m), -3.5) / (7.0 * std::sqrt(2.0) * kPi);
      return {variant, 6.0 / kPi - (4.0 / kPi) * series, bound, m};
    }

    case Variant::CenteredSquares: {
      CompensatedSum sum;
      for (std::size_t i = 1; i <= m; ++i) {
        const double g = gamma(static_cast<std::int64_t>(i));
        sum.add(g * g);
      }
      const double bound = (2.0 / kPi) * GammaSeq::tail_sum_sq(m);
      return {variant, 4.0 / kPi + (2.0 / kPi) * sum.value(), bound, m};
    }

    case Variant::AlternatingCentered: {
      CompensatedSum sum;
      for (std::size_t i = 1; i <= m; ++i) {
        const double g = gamma(static_cast<std::int64_t>(i));
        sum.add((i % 2 == 0 ? 1.0 : -1.0) * g * g);
      }
      const double gnext = gamma(static_cast<std::int64_t>(m + 1));
      const double bound = (2.0 / kPi) * gnext * gnext;
      return {variant, 4.0 / kPi + (2.0 / kPi) * sum.value(), bound, m};
    }
  }
  throw std::logic_error("kappa_sq: unknown variant");
}

}  // namespace heatvar::kernel
