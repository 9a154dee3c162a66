#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "heatvar/variant.hpp"

namespace heatvar::oracle {

/// Scalar integrand tags accepted by the quadrature expectations.
enum class ScalarFn {
  Identity,        ///< x
  Square,          ///< x^2
  SquareMinusOne,  ///< x^2 - 1
  Cube,            ///< x^3
  Quartic,         ///< x^4
  SignedSquare,    ///< |x|^2 sgn(x), sgn(0) = 0
};

double eval(ScalarFn fn, double x);
ScalarFn scalar_fn_from_string(const std::string& name);
std::string to_string(ScalarFn fn);

/// Quadrature configuration. 1-D conditional integrals use Gauss-Legendre
/// panels truncated at +-truncation standard deviations (split at integrand
/// kinks); the 4-D tensor rule uses Gauss-Hermite with order_4d nodes per axis.
struct QuadSpec {
  int order_1d = 200;
  int order_4d = 24;
  double truncation = 12.0;
};

/// E[h1(X) h2(Y)] for a standard bivariate normal pair with correlation rho,
/// |rho| < 1, via Y = rho X + sqrt(1-rho^2) V and nested quadrature.
double bivariate_expectation(ScalarFn h1, ScalarFn h2, double rho, const QuadSpec& spec = {});

/// E[X^4 Y^4] for a unit-variance jointly normal pair: 24 rho^4 + 72 rho^2 + 9.
double moment44(double rho);

/// E[X^3 Y^3] for a unit-variance jointly normal pair: rho (6 rho^2 + 9).
double moment33(double rho);

/// E[h1(X1) h2(X2) h3(X3) h4(X4)] under a 4-dimensional centered Gaussian
/// with the given correlation matrix (unit diagonal, positive definite).
double quadruple_expectation(const std::array<ScalarFn, 4>& tags, const Eigen::Matrix4d& corr,
                             const QuadSpec& spec = {});

/// Numerical verification that a modification family is admissible:
/// mean-zero under the standard normal, covariance bounded linearly in rho,
/// and a Lipschitz derivative.
struct AdmissibilityReport {
  double max_abs_mean = 0.0;     ///< max_j |E h_j(X)|
  double fitted_l = 0.0;         ///< smallest L with |E h_i(X) h_j(Y)| <= L |rho| on the grid
  double deriv_lipschitz = 0.0;  ///< numerical Lipschitz constant of h' on [-8, 8]
  bool smooth = true;            ///< false if h' blows up on the sample grid
  std::string failure_location;  ///< where the smoothness scan failed
  std::vector<double> rho_grid;
  std::vector<double> cross_expectations;  ///< E h_i(X) h_j(Y) per grid point, i != j
};

AdmissibilityReport check_admissibility(Variant family, const std::vector<double>& rho_grid,
                                      const QuadSpec& spec = {});

/// Generic form used by the family dispatch: h evaluated pointwise, an
/// optional kink location for the integral splits, a deterministic sign for
/// index j, and the mean of the independent random sign (0 for Rademacher).
struct FamilyShape {
  std::function<double(double)> h;
  std::optional<double> kink;
  std::function<double(std::size_t)> index_sign;  ///< s_j, 1-based
  double xi_mean = 1.0;       ///< E xi
  double xi_pair_mean = 1.0;  ///< E xi_i xi_j for i != j
};

FamilyShape family_shape(Variant family);

AdmissibilityReport check_admissibility(const FamilyShape& shape,
                                      const std::vector<double>& rho_grid,
                                      const QuadSpec& spec = {});

}  // namespace heatvar::oracle
