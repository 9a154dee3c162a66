#include "heatvar/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "heatvar/summation.hpp"

namespace heatvar::oracle {

namespace {

constexpr double kPi = std::numbers::pi;

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on the recurrence.
Rule gauss_legendre(int order) {
  Rule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(order) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(order) * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.nodes[static_cast<std::size_t>(order - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(order - 1 - i)] = w;
  }
  return rule;
}

// Probabilists' Gauss-Hermite rule (weight = standard normal density,
// weights sum to 1) via the Golub-Welsch tridiagonal eigenproblem.
Rule gauss_hermite(int order) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  Rule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = v0 * v0;
  }
  return rule;
}

const Rule& cached_legendre(int order) {
  static std::mutex mutex;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, gauss_legendre(order)).first;
  return it->second;
}

const Rule& cached_hermite(int order) {
  static std::mutex mutex;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, gauss_hermite(order)).first;
  return it->second;
}

double normal_density(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

void validate(const QuadSpec& spec) {
  if (spec.order_1d < 8 || spec.order_4d < 8)
    throw std::invalid_argument("QuadSpec: order must be >= 8");
  if (!(spec.truncation > 0.0)) throw std::invalid_argument("QuadSpec: truncation must be > 0");
}

// Integral of f(x) phi(x) over [-T, T], split at the given kinks.
double gaussian_integral(const std::function<double(double)>& f, double truncation,
                         const Rule& rule, std::vector<double> kinks) {
  std::vector<double> edges{-truncation, truncation};
  for (double k : kinks)
    if (std::abs(k) < truncation) edges.push_back(k);
  std::sort(edges.begin(), edges.end());
  CompensatedSum total;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    const double mid = 0.5 * (a + b), scale = 0.5 * (b - a);
    if (!(scale > 0.0)) continue;
    CompensatedSum panel;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = mid + scale * rule.nodes[i];
      panel.add(rule.weights[i] * f(x) * normal_density(x));
    }
    total.add(scale * panel.value());
  }
  return total.value();
}

std::optional<double> kink_of(ScalarFn fn) {
  if (fn == ScalarFn::SignedSquare) return 0.0;
  return std::nullopt;
}

double bivariate_impl(const std::function<double(double)>& h1, std::optional<double> kink1,
                      const std::function<double(double)>& h2, std::optional<double> kink2,
                      double rho, const QuadSpec& spec) {
  validate(spec);
  if (!(std::abs(rho) < 1.0))
    throw std::domain_error(
        "bivariate_expectation requires |rho| < 1; use the analytic endpoint values");
  const Rule& rule = cached_legendre(spec.order_1d);
  const double eta = std::sqrt(1.0 - rho * rho);
  const auto outer = [&](double x) {
    std::vector<double> inner_kinks;
    if (kink2) inner_kinks.push_back((*kink2 - rho * x) / eta);
    const auto integrand = [&](double v) { return h2(rho * x + eta * v); };
    return h1(x) * gaussian_integral(integrand, spec.truncation, rule, inner_kinks);
  };
  std::vector<double> outer_kinks;
  if (kink1) outer_kinks.push_back(*kink1);
  return gaussian_integral(outer, spec.truncation, rule, outer_kinks);
}

}  // namespace

double eval(ScalarFn fn, double x) {
  switch (fn) {
    case ScalarFn::Identity: return x;
    case ScalarFn::Square: return x * x;
    case ScalarFn::SquareMinusOne: return x * x - 1.0;
    case ScalarFn::Cube: return x * x * x;
    case ScalarFn::Quartic: return x * x * x * x;
    case ScalarFn::SignedSquare: {
      const double s = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
      return x * x * s;
    }
  }
  throw std::invalid_argument("eval: unknown scalar function tag");
}

ScalarFn scalar_fn_from_string(const std::string& name) {
  if (name == "x") return ScalarFn::Identity;
  if (name == "x2") return ScalarFn::Square;
  if (name == "x2m1") return ScalarFn::SquareMinusOne;
  if (name == "x3") return ScalarFn::Cube;
  if (name == "x4") return ScalarFn::Quartic;
  if (name == "sgn2") return ScalarFn::SignedSquare;
  throw std::invalid_argument("unknown scalar function '" + name +
                              "' (expected x|x2|x2m1|x3|x4|sgn2)");
}

std::string to_string(ScalarFn fn) {
  switch (fn) {
    case ScalarFn::Identity: return "x";
    case ScalarFn::Square: return "x2";
    case ScalarFn::SquareMinusOne: return "x2m1";
    case ScalarFn::Cube: return "x3";
    case ScalarFn::Quartic: return "x4";
    case ScalarFn::SignedSquare: return "sgn2";
  }
  return "?";
}

double bivariate_expectation(ScalarFn h1, ScalarFn h2, double rho, const QuadSpec& spec) {
  return bivariate_impl([h1](double x) { return eval(h1, x); }, kink_of(h1),
                        [h2](double x) { return eval(h2, x); }, kink_of(h2), rho, spec);
}

double moment44(double rho) {
  if (!(std::abs(rho) <= 1.0)) throw std::domain_error("moment44 requires |rho| <= 1");
  const double r2 = rho * rho;
  return 24.0 * r2 * r2 + 72.0 * r2 + 9.0;
}

double moment33(double rho) {
  if (!(std::abs(rho) <= 1.0)) throw std::domain_error("moment33 requires |rho| <= 1");
  return rho * (6.0 * rho * rho + 9.0);
}

double quadruple_expectation(const std::array<ScalarFn, 4>& tags, const Eigen::Matrix4d& corr,
                             const QuadSpec& spec) {
  validate(spec);
  if (!corr.isApprox(corr.transpose(), 1e-12))
    throw std::domain_error("quadruple_expectation: correlation matrix must be symmetric");
  for (int i = 0; i < 4; ++i)
    if (std::abs(corr(i, i) - 1.0) > 1e-12)
      throw std::domain_error("quadruple_expectation: correlation matrix needs a unit diagonal");
  // Pivoted LDLT so exactly singular blocks (perfectly correlated pairs) pass;
  // Eigen reports NumericalIssue for semidefinite input, so the gate is the
  // reconstruction residual, not info().
  Eigen::LDLT<Eigen::Matrix4d> ldlt(corr);
  Eigen::Vector4d d = ldlt.vectorD();
  if (d.minCoeff() < -1e-10)
    throw std::domain_error("quadruple_expectation: correlation matrix is not positive semidefinite");
  const Eigen::Matrix4d l = ldlt.matrixL();
  const Eigen::Matrix4d lower =
      ldlt.transpositionsP().transpose() * Eigen::Matrix4d(l * d.cwiseMax(0.0).cwiseSqrt().asDiagonal());
  if (!(lower * lower.transpose()).isApprox(corr, 1e-9))
    throw std::domain_error("quadruple_expectation: correlation matrix is not positive semidefinite");

  const Rule& rule = cached_hermite(spec.order_4d);
  const auto order = rule.nodes.size();
  CompensatedSum total;
  std::array<double, 4> x{};
  for (std::size_t a = 0; a < order; ++a)
    for (std::size_t b = 0; b < order; ++b)
      for (std::size_t c = 0; c < order; ++c)
        for (std::size_t d = 0; d < order; ++d) {
          const double z0 = rule.nodes[a], z1 = rule.nodes[b], z2 = rule.nodes[c],
                       z3 = rule.nodes[d];
          // the transform is row-permuted, so apply it densely
          for (int i = 0; i < 4; ++i)
            x[static_cast<std::size_t>(i)] =
                lower(i, 0) * z0 + lower(i, 1) * z1 + lower(i, 2) * z2 + lower(i, 3) * z3;
          const double w = rule.weights[a] * rule.weights[b] * rule.weights[c] * rule.weights[d];
          total.add(w * eval(tags[0], x[0]) * eval(tags[1], x[1]) * eval(tags[2], x[2]) *
                    eval(tags[3], x[3]));
        }
  return total.value();
}

FamilyShape family_shape(Variant family) {
  FamilyShape shape;
  switch (family) {
    case Variant::RademacherSquares:
      shape.h = [](double x) { return x * x; };
      shape.kink = std::nullopt;
      shape.index_sign = [](std::size_t) { return 1.0; };
      shape.xi_mean = 0.0;
      shape.xi_pair_mean = 0.0;
      return shape;
    case Variant::SignedSquares:
      shape.h = [](double x) { return eval(ScalarFn::SignedSquare, x); };
      shape.kink = 0.0;
      shape.index_sign = [](std::size_t) { return 1.0; };
      return shape;
    case Variant::CenteredSquares:
      shape.h = [](double x) { return x * x - 1.0; };
      shape.kink = std::nullopt;
      shape.index_sign = [](std::size_t) { return 1.0; };
      return shape;
    case Variant::AlternatingCentered:
      shape.h = [](double x) { return x * x - 1.0; };
      shape.kink = std::nullopt;
      shape.index_sign = [](std::size_t j) { return j % 2 == 0 ? 1.0 : -1.0; };
      return shape;
  }
  throw std::invalid_argument("family_shape: unknown variant");
}

AdmissibilityReport check_admissibility(const FamilyShape& shape,
                                      const std::vector<double>& rho_grid,
                                      const QuadSpec& spec) {
  validate(spec);
  if (rho_grid.empty()) throw std::invalid_argument("check_admissibility: empty rho grid");
  for (double rho : rho_grid)
    if (!(std::abs(rho) < 1.0))
      throw std::invalid_argument("check_admissibility: rho grid must exclude +-1");

  AdmissibilityReport report;
  report.rho_grid = rho_grid;

  // (c) smoothness scan of h' on [-8, 8]. A fixed grid always yields a finite
  // slope, so Lipschitz failure is detected by refinement: if the max slope
  // keeps growing as the grid shrinks 16x around its argmax, h' blows up.
  const auto h_deriv = [&shape](double x) {
    const double eps = 1e-7;
    return (shape.h(x + eps) - shape.h(x - eps)) / (2.0 * eps);
  };
  const auto max_slope = [&](double lo, double hi, int samples, double* argmax) {
    const double step = (hi - lo) / static_cast<double>(samples - 1);
    double worst = 0.0, where = lo;
    double prev = h_deriv(lo);
    for (int i = 1; i < samples; ++i) {
      const double x = lo + step * static_cast<double>(i);
      const double cur = h_deriv(x);
      const double slope = std::abs(cur - prev) / step;
      if (!std::isfinite(slope)) {
        if (argmax) *argmax = x;
        return std::numeric_limits<double>::infinity();
      }
      if (slope > worst) {
        worst = slope;
        where = x;
      }
      prev = cur;
    }
    if (argmax) *argmax = where;
    return worst;
  };
  double argmax = 0.0;
  const double base = max_slope(-8.0, 8.0, 4001, &argmax);
  const double window = 16.0 / 4000.0 * 4.0;
  const double refined = max_slope(argmax - window, argmax + window, 2049, nullptr);
  report.deriv_lipschitz = std::max(base, refined);
  if (!std::isfinite(refined) || refined > 4.0 * base + 1e-6) {
    report.smooth = false;
    report.failure_location = "h' not Lipschitz near x = " + std::to_string(argmax);
  }

  // (a) mean-zero: the index sign never changes |E h_j(X)|, and for
  // Rademacher the independent sign has mean zero.
  const Rule& rule = cached_legendre(spec.order_1d);
  std::vector<double> kinks;
  if (shape.kink) kinks.push_back(*shape.kink);
  const double base_mean = gaussian_integral(shape.h, spec.truncation, rule, kinks);
  report.max_abs_mean = std::abs(shape.xi_mean * base_mean);

  // (b) the smallest L with |E h_i(X) h_j(Y)| <= L |rho|, distinct indices.
  report.cross_expectations.reserve(rho_grid.size());
  const double pair_sign = shape.index_sign(1) * shape.index_sign(2);
  double fitted = 0.0;
  for (double rho : rho_grid) {
    double cross = shape.xi_pair_mean * pair_sign *
                   bivariate_impl(shape.h, shape.kink, shape.h, shape.kink, rho, spec);
    report.cross_expectations.push_back(cross);
    if (rho != 0.0) fitted = std::max(fitted, std::abs(cross) / std::abs(rho));
  }
  report.fitted_l = fitted;
  return report;
}

AdmissibilityReport check_admissibility(Variant family, const std::vector<double>& rho_grid,
                                      const QuadSpec& spec) {
  return check_admissibility(family_shape(family), rho_grid, spec);
}

}  // namespace heatvar::oracle
