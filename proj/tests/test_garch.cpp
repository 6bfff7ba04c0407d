#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "pcc/errors.hpp"
#include "pcc/garch.hpp"
#include "pcc/math/rng.hpp"

using namespace pcc;

namespace {

Eigen::VectorXd simulate_ar_garch(double delta, double phi, double omega,
                                  double alpha, double beta, int n,
                                  uint64_t seed) {
  math::Rng rng(seed);
  const int burn = 500;
  double s2 = omega / (1.0 - alpha - beta);
  double r_prev = delta / (1.0 - phi);
  double eps_prev2 = 0.0;
  Eigen::VectorXd out(n);
  for (int t = 0; t < burn + n; ++t) {
    if (t > 0) s2 = omega + alpha * eps_prev2 + beta * s2;
    const double eps = std::sqrt(s2) * rng.normal();
    const double r = delta + phi * r_prev + eps;
    if (t >= burn) out[t - burn] = r;
    r_prev = r;
    eps_prev2 = eps * eps;
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("garch");

TEST_CASE("qml recovers ar-garch parameters within three standard errors") {
  const double delta = 0.0005, phi = -0.05, omega = 0.01, alpha = 0.1,
               beta = 0.8;
  const Eigen::VectorXd r =
      simulate_ar_garch(delta, phi, omega, alpha, beta, 5000, 42);
  const garch::GarchFit fit = garch::fit_ar_garch(r);
  REQUIRE(fit.converged);
  REQUIRE(fit.std_err.allFinite());
  const double truth[5] = {delta, phi, omega, alpha, beta};
  const double est[5] = {fit.delta, fit.phi, fit.omega, fit.alpha_g,
                         fit.beta_g};
  for (int i = 0; i < 5; ++i)
    CHECK(std::abs(est[i] - truth[i]) / fit.std_err[i] < 3.0);
}

TEST_CASE("filtered residuals standardized with no remaining arch effects") {
  const Eigen::VectorXd r =
      simulate_ar_garch(0.0005, -0.05, 0.01, 0.1, 0.8, 5000, 42);
  const garch::GarchFit fit = garch::fit_ar_garch(r);
  const Eigen::VectorXd x = garch::filter_residuals(r, fit);
  CHECK(x.size() == r.size() - 1);
  const double var =
      (x.array() - x.mean()).square().sum() / double(x.size() - 1);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  const garch::GarchPaths paths = garch::garch_paths(r, fit);
  CHECK((paths.sigma2.array() > 0.0).all());
  CHECK(garch::ljung_box_pvalue(x.array().square(), 10) > 0.01);
}

TEST_CASE("white noise degenerates to small persistence") {
  math::Rng rng(7);
  Eigen::VectorXd wn(2000);
  for (int i = 0; i < 2000; ++i) wn[i] = 0.001 + 0.2 * rng.normal();
  const garch::GarchFit fit = garch::fit_ar_garch(wn);
  const double var =
      (wn.array() - wn.mean()).square().sum() / double(wn.size() - 1);
  CHECK(fit.alpha_g + fit.beta_g < 0.2);
  CHECK(std::abs(fit.omega / (1.0 - fit.alpha_g - fit.beta_g) - var) <
        0.1 * var);
}

TEST_CASE("zero ar zero arch filter is the closed-form standardization") {
  garch::GarchFit fit;
  fit.delta = 0.2;
  fit.phi = 0.0;
  fit.omega = 4.0;
  fit.alpha_g = 0.0;
  fit.beta_g = 0.0;
  fit.n_obs = 5;
  fit.converged = true;
  Eigen::VectorXd r(5);
  r << 0.2, 1.2, -1.8, 4.2, 0.2;
  const Eigen::VectorXd x = garch::filter_residuals(r, fit);
  for (int t = 1; t < 5; ++t)
    CHECK(x[t - 1] == doctest::Approx((r[t] - 0.2) / 2.0).epsilon(1e-12));
}

TEST_CASE("input validation") {
  Eigen::VectorXd tiny = Eigen::VectorXd::LinSpaced(50, -1.0, 1.0);
  CHECK_THROWS_AS(garch::fit_ar_garch(tiny), DataError);
  Eigen::VectorXd withnan = simulate_ar_garch(0.0, 0.0, 0.01, 0.05, 0.9,
                                              300, 3);
  withnan[100] = std::nan("");
  CHECK_THROWS_AS(garch::fit_ar_garch(withnan), DataError);
  garch::GarchFit bad;
  bad.omega = 0.01;
  bad.alpha_g = 0.5;
  bad.beta_g = 0.5;  // persistence 1
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("ljung-box separates white noise from autocorrelation") {
  math::Rng rng(11);
  const int n = 2000;
  Eigen::VectorXd iid(n), ar(n);
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    iid[i] = rng.normal();
    prev = 0.7 * prev + rng.normal();
    ar[i] = prev;
  }
  CHECK(garch::ljung_box_pvalue(iid, 10) > 0.01);
  CHECK(garch::ljung_box_pvalue(ar, 10) < 1e-6);
}

TEST_CASE("panel fit is deterministic and matches per-column fits") {
  const int n = 600;
  Eigen::MatrixXd r(n, 3);
  r.col(0) = simulate_ar_garch(0.0, -0.03, 0.02, 0.08, 0.85, n, 21);
  r.col(1) = simulate_ar_garch(0.001, 0.0, 0.05, 0.05, 0.9, n, 22);
  r.col(2) = simulate_ar_garch(-0.001, 0.1, 0.01, 0.1, 0.8, n, 23);
  const auto fits = garch::fit_ar_garch_panel(r);
  REQUIRE(fits.size() == 3);
  const auto fits2 = garch::fit_ar_garch_panel(r);
  for (int j = 0; j < 3; ++j) {
    CHECK(fits[j].loglik == fits2[j].loglik);
    const auto single = garch::fit_ar_garch(r.col(j));
    CHECK(fits[j].loglik == single.loglik);
  }
  const Eigen::MatrixXd x = garch::filter_panel(r, fits);
  CHECK(x.rows() == n - 1);
  CHECK(x.cols() == 3);
}

TEST_SUITE_END();
