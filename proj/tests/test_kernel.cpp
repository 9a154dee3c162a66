#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "heatvar/errors.hpp"
#include "heatvar/kernel.hpp"
#include "heatvar/partition.hpp"
#include "heatvar/summation.hpp"

using namespace heatvar;
namespace hk = heatvar::kernel;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("cov_f closed form") {
  CHECK(hk::cov_f(0.0, 3.7) == 0.0);
  CHECK(hk::cov_f(5.0, 0.0) == 0.0);
  CHECK(hk::cov_f(1.0, 1.0) == doctest::Approx(1.0 / std::sqrt(kPi)).epsilon(1e-14));
  CHECK(hk::cov_f(1.0, 4.0) ==
        doctest::Approx((std::sqrt(5.0) - std::sqrt(3.0)) / std::sqrt(2.0 * kPi)).epsilon(1e-14));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double s = u(rng), t = u(rng);
    CHECK(hk::cov_f(s, t) == hk::cov_f(t, s));
    CHECK(hk::cov_f(s, t) >= 0.0);
  }
  CHECK_THROWS_AS(hk::cov_f(-0.1, 1.0), std::domain_error);
  CHECK_THROWS_AS(hk::cov_f(1.0, -2.0), std::domain_error);
}

TEST_CASE("increment variance matches the covariance and its sqrt(2dt/pi) bound") {
  CHECK(hk::increment_variance(2.5, 2.5) == 0.0);
  for (double t : {0.25, 1.0, 3.0}) {
    CHECK(hk::increment_variance(0.0, t) == doctest::Approx(std::sqrt(t / kPi)).epsilon(1e-14));
    CHECK(hk::increment_variance(0.0, t) == doctest::Approx(hk::cov_f(t, t)).epsilon(1e-14));
  }
  // |E|F(t)-F(s)|^2 - sqrt(2(t-s)/pi)| <= |t-s|^2 / t^(3/2)
  CHECK(std::abs(hk::increment_variance(1.0, 1.25) - std::sqrt(0.5 / kPi)) <= 0.25 * 0.25);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int i = 0; i < 500; ++i) {
    double s = u(rng), t = u(rng);
    if (s > t) std::swap(s, t);
    if (t == s) continue;
    const double v = hk::increment_variance(s, t);
    CHECK(std::abs(v - std::sqrt(2.0 * (t - s) / kPi)) <=
          (t - s) * (t - s) / std::pow(t, 1.5) + 1e-15);
  }
  CHECK_THROWS_AS(hk::increment_variance(2.0, 1.0), std::domain_error);
}

TEST_CASE("increment variance stays inside the uniform-grid envelope") {
  for (std::int64_t n : {1, 2, 7, 64, 1024}) {
    const double dt = 1.0 / static_cast<double>(n);
    for (std::int64_t j = 1; j <= std::min<std::int64_t>(n, 64); ++j) {
      const double v = hk::uniform_increment_cov(j, j, dt);
      CHECK(v >= std::sqrt(dt) / std::sqrt(kPi) - 1e-15);
      CHECK(v <= 2.0 * std::sqrt(dt) + 1e-15);
    }
  }
}

TEST_CASE("cross increment covariance") {
  CHECK(hk::cross_increment_cov(0.0, 1.0, 0.0, 1.0) ==
        doctest::Approx(1.0 / std::sqrt(kPi)).epsilon(1e-14));
  CHECK(hk::cross_increment_cov(0.0, 1.0, 1.0, 2.0) ==
        doctest::Approx(-(hk::gamma(1) + hk::gamma(2)) / std::sqrt(2.0 * kPi)).epsilon(1e-14));
  // degenerate intervals return 0 by documented convention
  CHECK(hk::cross_increment_cov(1.0, 1.0, 0.0, 2.0) == 0.0);
  CHECK(hk::cross_increment_cov(0.0, 2.0, 1.5, 1.5) == 0.0);
  CHECK_THROWS_AS(hk::cross_increment_cov(1.0, 0.5, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(hk::cross_increment_cov(-1.0, 0.5, 0.0, 1.0), std::domain_error);

  // disjoint uniform increments are negatively correlated
  for (std::int64_t n : {2, 16, 128}) {
    const double dt = 1.0 / static_cast<double>(n);
    for (std::int64_t i = 1; i < n; ++i)
      CHECK(hk::cross_increment_cov((i - 1) * dt, i * dt, i * dt, (i + 1) * dt) < 0.0);
  }

  // |cov| <= sqrt(2/pi) |t-s||v-u| / (|u-s| sqrt(v-t)) for s < t <= u < v
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    double pts[4] = {u01(rng), u01(rng), u01(rng), u01(rng)};
    std::sort(pts, pts + 4);
    const double s = pts[0], t = pts[1], uu = pts[2], v = pts[3];
    if (t == s || v == uu || uu == t || uu == s) continue;
    const double bound = std::sqrt(2.0 / kPi) * (t - s) * (v - uu) / ((uu - s) * std::sqrt(v - t));
    CHECK(std::abs(hk::cross_increment_cov(s, t, uu, v)) <= bound * (1.0 + 1e-12));
  }

  // symmetry in the interval arguments
  CHECK(hk::cross_increment_cov(0.1, 0.4, 0.6, 0.9) ==
        doctest::Approx(hk::cross_increment_cov(0.6, 0.9, 0.1, 0.4)).epsilon(1e-15));
}

TEST_CASE("gamma sequence: value, bounds, monotonicity, telescoping") {
  CHECK(hk::gamma(1) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(hk::gamma(0), std::domain_error);

  double prev = 1.0;
  for (std::int64_t k = 1; k <= 10000; ++k) {
    const double g = hk::gamma(k);
    REQUIRE(g > 0.0);
    REQUIRE(g <= 1.0 / (std::sqrt(2.0) * std::pow(static_cast<double>(k), 1.5)));
    REQUIRE(g < prev);
    prev = g;
  }
  CHECK(hk::gamma(1000000) <= 1.0 / (std::sqrt(2.0) * 1e9));

  // partial sums rise to 1 with the exact telescoped remainder
  CompensatedSum sum;
  std::int64_t k = 1;
  for (std::int64_t m : {10LL, 100LL, 10000LL, 100000LL}) {
    for (; k <= m; ++k) sum.add(hk::gamma(k));
    CHECK(std::abs(sum.value() - hk::GammaSeq::partial_sum(static_cast<std::size_t>(m))) < 1e-12);
    CHECK(sum.value() < 1.0);
  }

  const hk::GammaSeq seq(50);
  CHECK(seq[1] == hk::gamma(1));
  CHECK(seq[50] == hk::gamma(50));
  CHECK_THROWS_AS(seq[0], std::out_of_range);
  CHECK_THROWS_AS(seq[51], std::out_of_range);
}

TEST_CASE("uniform increment covariance examples and decay bound") {
  CHECK(hk::uniform_increment_cov(1, 2, 1.0) ==
        doctest::Approx(-(hk::gamma(1) + hk::gamma(2)) / std::sqrt(2.0 * kPi)).epsilon(1e-14));
  CHECK_THROWS_AS(hk::uniform_increment_cov(0, 1, 0.5), std::domain_error);
  CHECK_THROWS_AS(hk::uniform_increment_cov(1, 1, 0.0), std::domain_error);

  for (double dt : {1.0, 1.0 / 64.0}) {
    CHECK(std::abs(hk::uniform_increment_cov(1, 101, dt)) <= 2.0 * std::sqrt(dt) / 1000.0);
    for (std::int64_t i = 1; i <= 40; ++i)
      for (std::int64_t j = 1; j <= 40; ++j) {
        const double lag = std::max<double>(static_cast<double>(std::abs(i - j)), 1.0);
        REQUIRE(std::abs(hk::uniform_increment_cov(i, j, dt)) <=
                2.0 * std::sqrt(dt) / std::pow(lag, 1.5) * (1.0 + 1e-12));
      }
  }
}

TEST_CASE("uniform covariance is consistent with the bilinear route to 1e-12 relative") {
  const std::int64_t n = 256;
  const double dt = 1.0 / static_cast<double>(n);
  for (std::int64_t i = 1; i <= n; ++i) {
    for (std::int64_t j = 1; j <= n; ++j) {
      const double a = hk::uniform_increment_cov(i, j, dt);
      const double b = hk::cross_increment_cov((i - 1) * dt, i * dt, (j - 1) * dt, j * dt);
      REQUIRE(std::abs(a - b) <= 1e-12 * std::abs(a));
    }
  }
}

TEST_CASE("row-sum identity: bilinearity against the full-grid increment") {
  for (std::int64_t n : {16, 256}) {
    const double dt = 1.0 / static_cast<double>(n);
    const double t_end = static_cast<double>(n) * dt;
    for (std::int64_t i = 1; i <= n; i += 7) {
      CompensatedSum row;
      for (std::int64_t j = 1; j <= n; ++j) row.add(hk::uniform_increment_cov(i, j, dt));
      const double rhs = hk::cross_increment_cov((i - 1) * dt, i * dt, 0.0, t_end);
      CHECK(std::abs(row.value() - rhs) <= 1e-12 * std::max(std::abs(rhs), std::sqrt(dt)));
    }
  }
}

TEST_CASE("K function: endpoints, parity, monotonicity, cubic bound") {
  CHECK(hk::k_function(0.0) == 0.0);
  CHECK(hk::k_function(1.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(hk::k_function(-1.0) == doctest::Approx(-3.0).epsilon(1e-14));
  CHECK_THROWS_AS(hk::k_function(1.0000001), std::domain_error);
  CHECK_THROWS_AS(hk::k_function(-1.5), std::domain_error);

  double prev = -3.1;
  for (int i = 0; i <= 10000; ++i) {
    const double x = -1.0 + 2.0 * static_cast<double>(i) / 10000.0;
    const double k = hk::k_function(x);
    REQUIRE(std::abs(k - 8.0 * x / kPi) <= 2.0 * std::abs(x * x * x) + 1e-15);
    REQUIRE(k == doctest::Approx(-hk::k_function(-x)).epsilon(1e-13));
    REQUIRE(k >= prev - 1e-14);
    prev = k;
  }
}

TEST_CASE("kappa constants") {
  const auto rad = hk::kappa_sq(Variant::RademacherSquares, 1e-10);
  CHECK(rad.kappa_sq == 6.0 / kPi);  // closed form, no truncation at all
  CHECK(rad.truncation_error == 0.0);
  CHECK(rad.kappa() == doctest::Approx(std::sqrt(6.0 / kPi)).epsilon(1e-15));

  const auto sgn = hk::kappa_sq(Variant::SignedSquares, 1e-10);
  CHECK(sgn.kappa_sq > 0.0);
  CHECK(sgn.kappa_sq < 6.0 / kPi);
  CHECK(sgn.truncation_error < 1e-10);
  // the subtracted series obeys the proof bound Sum K(gamma_i/2) <= 4/pi + 9 sqrt2/112 < 3/2
  const double sum_k = (6.0 / kPi - sgn.kappa_sq) * kPi / 4.0;
  CHECK(sum_k > 0.0);
  CHECK(sum_k <= 4.0 / kPi + 9.0 * std::sqrt(2.0) / 112.0);
  CHECK(sum_k < 1.5);

  const auto cen = hk::kappa_sq(Variant::CenteredSquares, 1e-10);
  CHECK(cen.truncation_error < 1e-10);
  // independent slow route: direct partial sum plus certified tail
  CompensatedSum direct;
  const std::size_t m = 2'000'000;
  for (std::size_t i = 1; i <= m; ++i) {
    const double g = hk::gamma(static_cast<std::int64_t>(i));
    direct.add(g * g);
  }
  const double direct_value = 4.0 / kPi + (2.0 / kPi) * direct.value();
  CHECK(std::abs(cen.kappa_sq - direct_value) <
        1e-10 + (2.0 / kPi) * hk::GammaSeq::tail_sum_sq(m));

  const auto alt = hk::kappa_sq(Variant::AlternatingCentered, 1e-10);
  CHECK(alt.kappa_sq > 0.0);
  CHECK(alt.truncation_error < 1e-10);

  for (auto v : kAllVariants) {
    const auto coarse = hk::kappa_sq(v, 1e-8);
    const auto fine = hk::kappa_sq(v, 1e-9);
    CHECK(coarse.kappa_sq > coarse.truncation_error);
    CHECK(std::abs(coarse.kappa_sq - fine.kappa_sq) < 1e-8);
  }

  CHECK_THROWS_AS(hk::kappa_sq(Variant::CenteredSquares, 1e-25), ResourceError);
  CHECK_THROWS_AS(hk::kappa_sq(Variant::CenteredSquares, 0.0), std::domain_error);
}

TEST_CASE("variant names round-trip") {
  for (auto v : kAllVariants) CHECK(variant_from_string(to_string(v)) == v);
  CHECK_THROWS_AS(variant_from_string("nope"), std::invalid_argument);
}

TEST_CASE("partitions: invariants, counting, uniform grids") {
  CHECK_THROWS_AS(Partition({0.5, 1.0}), std::invalid_argument);       // must start at 0
  CHECK_THROWS_AS(Partition({0.0, 1.0, 1.0}), std::invalid_argument);  // strictly increasing
  CHECK_THROWS_AS(Partition({0.0}), std::invalid_argument);

  const Partition general({0.0, 0.1, 0.4, 1.0});
  CHECK(general.mesh() == doctest::Approx(0.6));
  CHECK_FALSE(general.is_uniform());
  CHECK_THROWS_AS(general.uniform_rate(), std::logic_error);
  CHECK(general.count_up_to(0.05) == 0);
  CHECK(general.count_up_to(0.1) == 1);
  CHECK(general.count_up_to(0.99) == 2);
  CHECK(general.count_up_to(5.0) == 3);

  const auto uniform = Partition::uniform(3, 1.0);
  CHECK(uniform.is_uniform());
  CHECK(uniform.uniform_rate() == 3);
  CHECK(uniform.segments() == 3);
  for (std::size_t j = 0; j < uniform.times().size(); ++j)
    CHECK(uniform.times()[j] == static_cast<double>(j) / 3.0);  // exact representation

  // the index helper agrees with the grid-time comparison rule
  CHECK(grid_index(3, 1.0 / 3.0) == 1);
  CHECK(grid_index(3, std::nextafter(1.0 / 3.0, 0.0)) == 0);  // just below the grid point
  CHECK(grid_index(4096, 0.75) == 3072);
  CHECK(grid_index(7, 1.0) == 7);
  CHECK_THROWS_AS(grid_index(0, 0.5), std::invalid_argument);
}
