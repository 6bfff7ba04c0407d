#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "pcc/math/bessel.hpp"
#include "pcc/math/normal.hpp"
#include "pcc/math/optim.hpp"
#include "pcc/math/parallel.hpp"
#include "pcc/math/quadrature.hpp"
#include "pcc/math/ranks.hpp"
#include "pcc/math/rng.hpp"
#include "pcc/math/special.hpp"

using namespace pcc;

TEST_SUITE_BEGIN("math");

TEST_CASE("bessel k real order and argument vs stdlib") {
  double worst = 0.0;
  for (double nu : {0.0, 0.3, 0.5, 1.0, 1.7, 2.0, 5.5, 7.45, 17.5})
    for (double x : {0.05, 0.3, 0.9, 1.9, 2.1, 5.0, 20.0, 120.0}) {
      const double mine = math::bessel_k(nu, x);
      const double ref = std::cyl_bessel_k(nu, x);
      worst = std::max(worst, std::abs(mine - ref) / std::abs(ref));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("log bessel k agrees with integral representation") {
  double worst = 0.0;
  for (double nu : {0.0, 0.5, 1.7, 7.45, 17.5})
    for (double x : {0.05, 0.9, 5.0, 120.0})
      worst = std::max(worst, std::abs(math::log_bessel_k(nu, x) -
                                       math::log_bessel_k_integral(nu, x)));
  CHECK(worst < 1e-11);
  // overflow regime of the plain function
  CHECK(std::abs(math::log_bessel_k(100.0, 1e-4) -
                 math::log_bessel_k_integral(100.0, 1e-4)) < 1e-8);
}

TEST_CASE("complex bessel k vs integral oracle") {
  double worst = 0.0;
  for (double nu : {0.5, 1.0, 7.45, 17.5})
    for (double r : {0.3, 1.5, 3.0, 10.0, 60.0})
      for (double th : {0.0, 0.3, 0.7, 0.78}) {
        const std::complex<double> z = std::polar(r, th);
        const auto mine = math::bessel_k(nu, z);
        const auto ref = math::bessel_k_integral(nu, z);
        worst = std::max(worst, std::abs(mine - ref) / std::abs(ref));
      }
  CHECK(worst < 1e-10);
}

TEST_CASE("scaled bessel k at huge argument follows the asymptote") {
  CHECK(math::bessel_k_scaled(1.0, 700.0) ==
        doctest::Approx(std::sqrt(M_PI / 1400.0)).epsilon(1e-3));
}

TEST_CASE("normal cdf quantile round trip") {
  for (double p : {1e-10, 1e-4, 0.025, 0.5, 0.8, 0.975, 1.0 - 1e-6})
    CHECK(math::norm_cdf(math::norm_quantile(p)) ==
          doctest::Approx(p).epsilon(1e-12));
  CHECK(math::norm_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK_THROWS_AS(math::norm_quantile(0.0), ParameterError);
}

TEST_CASE("incomplete gamma and chi-squared tail") {
  for (double a : {0.5, 2.0, 7.5})
    for (double x : {0.1, 1.0, 12.0})
      CHECK(math::gamma_p(a, x) + math::gamma_q(a, x) ==
            doctest::Approx(1.0).epsilon(1e-13));
  // chi2_sf(x, 2) = exp(-x/2)
  CHECK(math::chi2_sf(3.0, 2.0) ==
        doctest::Approx(std::exp(-1.5)).epsilon(1e-13));
  // chi2_sf(x, 1) = 2 Phi(-sqrt(x))
  CHECK(math::chi2_sf(4.0, 1.0) ==
        doctest::Approx(2.0 * math::norm_cdf(-2.0)).epsilon(1e-12));
}

TEST_CASE("binomial tail sums the pmf exactly") {
  const int n = 20;
  const double p = 0.37;
  double worst = 0.0;
  for (int k = 0; k <= n; ++k) {
    long double acc = 0.0L;
    for (int j = k; j <= n; ++j)
      acc += std::exp((long double)math::log_binomial_pmf(n, j, p));
    worst = std::max(worst, std::abs(math::binomial_tail_geq(n, k, p) -
                                     (double)acc));
  }
  CHECK(worst < 1e-14);
  CHECK(math::binomial_tail_geq(5, 0, 0.3) == 1.0);
  CHECK(math::binomial_tail_geq(5, 3, 0.0) == 0.0);
}

TEST_CASE("quadrature on finite and half-infinite ranges") {
  const auto mass =
      math::integrate([](double x) { return math::norm_pdf(x); }, -12.0, 12.0,
                      1e-13, 1e-12);
  CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mass.converged);
  const auto expint = math::integrate_to_infinity(
      [](double x) { return std::exp(-x); }, 0.0, 1e-12, 1e-11);
  CHECK(expint.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("nelder-mead minimizes rosenbrock") {
  const auto f = [](const Eigen::VectorXd& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  const auto r = math::nelder_mead(f, x0, Eigen::VectorXd::Constant(2, 0.5),
                                   1e-12, 8000, 2);
  CHECK(r.converged);
  CHECK((r.x - Eigen::Vector2d(1.0, 1.0)).norm() < 1e-4);
}

TEST_CASE("bfgs minimizes a shifted quadratic") {
  const auto f = [](const Eigen::VectorXd& x) {
    return (x[0] - 3.0) * (x[0] - 3.0) + 5.0 * (x[1] + 1.0) * (x[1] + 1.0);
  };
  const auto r = math::bfgs_numeric(f, Eigen::VectorXd::Zero(2), 1e-9, 200);
  CHECK(r.converged);
  CHECK(std::abs(r.x[0] - 3.0) < 1e-6);
  CHECK(std::abs(r.x[1] + 1.0) < 1e-6);
}

TEST_CASE("rng determinism and stream separation") {
  math::Rng a(1234, 7), b(1234, 7), c(1234, 8);
  bool same = true, diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform(), y = b.uniform(), z = c.uniform();
    same = same && x == y;
    diff = diff || x != z;
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("rng normal and gamma moments") {
  math::Rng rng(99);
  const int n = 200000;
  double s = 0.0, s2 = 0.0, g = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
    g += rng.gamma(3.0);
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(g / n == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("average ranks with ties") {
  const auto r = math::average_ranks({3.0, 1.0, 1.0, 5.0});
  CHECK(r == std::vector<double>{3.0, 1.5, 1.5, 4.0});
}

TEST_CASE("parallel_for_blocks covers the range once under any cap") {
  for (int cap : {0, 1, 3}) {
    math::thread_limit() = cap;
    std::vector<int> hits(100, 0);
    math::parallel_for_blocks(100, 7, [&](int, int b, int e) {
      for (int i = b; i < e; ++i) ++hits[i];
    });
    for (int h : hits) CHECK(h == 1);
  }
  math::thread_limit() = 0;
}

TEST_SUITE_END();
