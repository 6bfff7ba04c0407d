#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "json.hpp"
#include "pcc/errors.hpp"
#include "pcc/estimate.hpp"
#include "pcc/math/normal.hpp"
#include "pcc/model.hpp"

using namespace pcc;

namespace {

Eigen::MatrixXd gauss_scores(const model::CopulaSample& u) {
  Eigen::MatrixXd z(u.n(), u.d());
  for (int r = 0; r < u.n(); ++r)
    for (int i = 0; i < u.d(); ++i) z(r, i) = math::norm_quantile(u.u(r, i));
  return z;
}

}  // namespace

TEST_SUITE_BEGIN("estimate");

TEST_CASE("shape vector round trips for the factory specs") {
  const auto g = dist::GroupSpec::gauss(3);
  CHECK(estimate::shape_names(g).empty());
  CHECK(estimate::extract_shape(g).empty());

  const auto t = dist::GroupSpec::student_t(3, 8.0);
  CHECK(estimate::shape_names(t) == std::vector<std::string>{"nu"});
  CHECK(estimate::inject_shape(t, {9.5}).groups[0].nu == 9.5);

  const auto sm = dist::GroupSpec::skew_t_market(3, 8.0, -0.3);
  CHECK(estimate::shape_names(sm) ==
        std::vector<std::string>{"nu1", "gamma1"});
  CHECK(estimate::extract_shape(sm) == std::vector<double>{8.0, -0.3});

  const auto hb =
      dist::GroupSpec::hyperbolic_normal(4, {{2.0, 0.5}, {1.8, -0.2}});
  CHECK(estimate::shape_names(hb) ==
        std::vector<std::string>{"alpha1", "beta1", "alpha2", "beta2"});
  CHECK(estimate::extract_shape(hb) ==
        std::vector<double>{2.0, 0.5, 1.8, -0.2});
  const auto hb2 = estimate::inject_shape(hb, {2.2, 0.4, 1.9, -0.1});
  CHECK(hb2.groups[1].alpha == 1.9);
  CHECK(hb2.groups[1].beta == -0.1);
  CHECK_THROWS_AS(estimate::inject_shape(hb, {1.0, 0.0}), ParameterError);
}

TEST_CASE("equal-tail linkage removes the skew-t dof from the shape vector") {
  auto linked = dist::GroupSpec::skew_t1_t_rest(4, 20.0, -0.5, 10.0);
  linked.common_tail = dist::CommonTail::EqualTail;
  CHECK(estimate::shape_names(linked) ==
        std::vector<std::string>{"gamma1", "nu"});
  const auto inj = estimate::inject_shape(linked, {-0.4, 12.0});
  double nu1 = 0.0, nut = 0.0;
  for (const auto& gg : inj.groups) {
    if (gg.family == dist::GeneratorFamily::SkewT) nu1 = gg.nu;
    if (gg.family == dist::GeneratorFamily::StudentT) nut = gg.nu;
  }
  CHECK(nu1 == 24.0);  // equal tail index: nu1 = 2 nu
  CHECK(nut == 12.0);
}

TEST_CASE("rank transform averages ties and rejects constant columns") {
  Eigen::MatrixXd x(6, 2);
  x << 1.0, 5.0, 2.0, 4.0, 2.0, 3.0, 4.0, 2.0, 5.0, 2.0, 6.0, 0.5;
  const auto u = estimate::ranks_to_pseudo_obs(x);
  CHECK(u.u(1, 0) == doctest::Approx(2.5 / 7.0).epsilon(1e-15));
  CHECK(u.u(2, 0) == doctest::Approx(2.5 / 7.0).epsilon(1e-15));
  Eigen::MatrixXd xc = x;
  xc.col(1).setConstant(1.0);
  CHECK_THROWS_AS(estimate::ranks_to_pseudo_obs(xc), DataError);
}

TEST_CASE("correlation models build valid matrices and round trip") {
  const auto eq = estimate::CorrelationModel::equicorrelation(4);
  Eigen::VectorXd th(1);
  th[0] = 0.3;
  const auto r = eq.build(th);
  CHECK(r(0, 1) == r(2, 3));
  CHECK(r(0, 0) == 1.0);
  CHECK(std::abs(eq.build(eq.initial_theta(r))(0, 1) - r(0, 1)) < 1e-9);

  const auto tf = estimate::CorrelationModel::two_factor(5);
  Eigen::VectorXd xi(5), ga(5);
  xi << 0.8, 0.7, 0.6, 0.5, 0.4;
  ga << 0.3, -0.2, 0.25, -0.3, 0.2;
  Eigen::MatrixXd base = xi * xi.transpose() + ga * ga.transpose();
  base.diagonal().setOnes();
  const auto rt = tf.build(tf.initial_theta(base));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rt);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK((rt.diagonal().array() == 1.0).all());
  CHECK((rt - base).cwiseAbs().maxCoeff() < 0.1);

  const auto fl = estimate::CorrelationModel::free_lower_triangle(3);
  Eigen::MatrixXd rho3 = Eigen::MatrixXd::Identity(3, 3);
  rho3(0, 1) = rho3(1, 0) = 0.3;
  rho3(0, 2) = rho3(2, 0) = -0.2;
  rho3(1, 2) = rho3(2, 1) = 0.1;
  CHECK(fl.n_params() == 3);
  CHECK((fl.build(fl.initial_theta(rho3)) - rho3).cwiseAbs().maxCoeff() <
        1e-9);
}

TEST_CASE("all-normal moment step reproduces exact normal scores") {
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(2, 2);
  rho(0, 1) = rho(1, 0) = 0.5;
  const auto m_true = model::PccModel::build(rho, dist::GroupSpec::gauss(2));
  const auto sim = m_true.simulate(1500, 20260816ull);
  const auto u = estimate::ranks_to_pseudo_obs(gauss_scores(sim));

  estimate::FitConfig fc;
  const auto m0 = model::PccModel::build(
      estimate::init_normal_scores(u).rho, dist::GroupSpec::gauss(2),
      m_true.cos_config(), fc.table_grid);
  const Eigen::MatrixXd z = gauss_scores(u);
  Eigen::MatrixXd m_exact = (z.transpose() * z) / double(u.n());
  m_exact.diagonal().setOnes();
  Eigen::MatrixXd m_tab(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int r = 0; r < u.n(); ++r)
        s += m0.marginal(i).inverse_cdf(u.u(r, i)) *
             m0.marginal(j).inverse_cdf(u.u(r, j));
      m_tab(i, j) = s / u.n();
    }
  m_tab.diagonal().setOnes();
  CHECK((m_tab - m_exact).norm() < 1e-4);
}

TEST_CASE("full mle recovers an equicorrelated gaussian") {
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(2, 2);
  rho(0, 1) = rho(1, 0) = 0.5;
  const auto m_true = model::PccModel::build(rho, dist::GroupSpec::gauss(2));
  const auto sim = m_true.simulate(1500, 20260816ull);
  const auto u = estimate::ranks_to_pseudo_obs(gauss_scores(sim));

  estimate::FitConfig fc;
  fc.max_evals = 200;
  const auto fit = estimate::fit_mle(
      u, dist::GroupSpec::gauss(2),
      estimate::CorrelationModel::equicorrelation(2), fc);
  CHECK(fit.converged);
  CHECK(fit.n_shape_params == 0);
  CHECK(std::abs(fit.fitted.rho()(0, 1) - 0.5) < 0.06);
  CHECK(fit.loglik > 0.0);
}

TEST_CASE("hybrid gmm with all-normal margins converges exactly at sweep 2") {
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(2, 2);
  rho(0, 1) = rho(1, 0) = 0.5;
  const auto m_true = model::PccModel::build(rho, dist::GroupSpec::gauss(2));
  const auto sim = m_true.simulate(1500, 20260816ull);
  const auto u = estimate::ranks_to_pseudo_obs(gauss_scores(sim));

  const auto fit = estimate::fit_gmm_hybrid(u, dist::GroupSpec::gauss(2));
  CHECK(fit.converged);
  CHECK(fit.iterations == 2);
  REQUIRE(fit.trace.size() == 2);
  CHECK(fit.trace[1].corr_delta < 1e-12);
  CHECK(estimate::gmm_moment_residual(fit.fitted, u) < 2e-3);
}

TEST_CASE("hybrid gmm recovers a hyperbolic-normal pair") {
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(2, 2);
  rho(0, 1) = rho(1, 0) = 0.4;
  const auto spec_true = dist::GroupSpec::hyperbolic_normal(2, {{2.0, 0.5}});
  const auto m_true = model::PccModel::build(rho, spec_true);
  const auto u = m_true.simulate(1200, 7ull);

  estimate::FitConfig fc;
  fc.max_evals = 250;
  const auto fit = estimate::fit_gmm_hybrid(
      u, dist::GroupSpec::hyperbolic_normal(2, {{1.7, 0.2}}), fc);
  CHECK(fit.converged);
  CHECK(std::abs(fit.fitted.lambda()[0] - 1.4) < 0.12);
  CHECK(std::abs(fit.shape[0] - 2.0) < 0.8);
  CHECK(std::abs(fit.shape[1] - 0.5) < 0.45);
  CHECK(estimate::gmm_moment_residual(fit.fitted, u) < 2e-3);

  // the richer family beats gauss on its own data
  const auto fit_g = estimate::fit_gmm_hybrid(u, dist::GroupSpec::gauss(2));
  const auto rows =
      estimate::information_criteria({fit_g, fit}, {"gauss", "hb-n"});
  CHECK(rows[0].delta_aic == 0.0);
  CHECK(rows[1].delta_aic < 0.0);

  const auto doc = nlohmann::json::parse(estimate::fit_report_json(fit, "hb-n"));
  CHECK(doc["shape"].contains("alpha1"));
  CHECK(doc["trace"].is_array());
  CHECK(doc["n_shape_params"] == 2);
}

TEST_CASE("shape mle gradient vanishes at the reported optimum") {
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(2, 2);
  rho(0, 1) = rho(1, 0) = 0.4;
  const auto spec_true = dist::GroupSpec::hyperbolic_normal(2, {{2.0, 0.5}});
  const auto m_true = model::PccModel::build(rho, spec_true);
  const auto u = m_true.simulate(1200, 7ull);
  estimate::FitConfig fc;
  fc.max_evals = 400;
  fc.f_tol = 1e-10;
  const auto fit = estimate::fit_gmm_hybrid(
      u, dist::GroupSpec::hyperbolic_normal(2, {{1.7, 0.2}}), fc);

  // mean log-likelihood as a function of the shape vector at frozen rho
  const auto mean_ll = [&](const std::vector<double>& shape) {
    const auto spec = estimate::inject_shape(fit.fitted.spec(), shape);
    const auto m = model::PccModel::build(fit.fitted.rho(), spec,
                                          fit.fitted.cos_config(),
                                          fc.table_grid);
    return m.copula_log_density(u).total / u.n();
  };
  for (std::size_t k = 0; k < fit.shape.size(); ++k) {
    const double h = 1e-4 * std::max(1.0, std::abs(fit.shape[k]));
    auto hi = fit.shape, lo = fit.shape;
    hi[k] += h;
    lo[k] -= h;
    const double grad = (mean_ll(hi) - mean_ll(lo)) / (2.0 * h);
    CHECK(std::abs(grad) < 1e-3);
  }
}

TEST_CASE("estimator consistent on a large synthetic sample") {
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(2, 2);
  rho(0, 1) = rho(1, 0) = 0.4;
  const auto spec_true = dist::GroupSpec::hyperbolic_normal(2, {{2.0, 0.5}});
  const auto m_true = model::PccModel::build(rho, spec_true);
  const auto sim = m_true.simulate(20000, 31ull);
  const Eigen::MatrixXd x = gauss_scores(sim);
  const auto u = estimate::ranks_to_pseudo_obs(x);

  estimate::FitConfig fc;
  fc.max_evals = 250;
  const auto fit = estimate::fit_gmm_hybrid(
      u, dist::GroupSpec::hyperbolic_normal(2, {{1.7, 0.2}}), fc);
  REQUIRE(fit.converged);

  const auto corr = estimate::CorrelationModel::fixed(fit.fitted.rho());
  const auto boot =
      estimate::bootstrap_se(x, fit.fitted.spec(),
                             estimate::FitMethod::GmmHybrid, corr, 19, 99ull,
                             fc);
  REQUIRE(boot.replicates.rows() >= 15);
  REQUIRE(boot.names.size() >= 2);
  CHECK(boot.names[0] == "alpha1");
  CHECK(std::abs(fit.shape[0] - 2.0) < 3.0 * boot.sd[0]);
  CHECK(std::abs(fit.shape[1] - 0.5) < 3.0 * boot.sd[1]);
}

TEST_CASE("bootstrap deterministic for a fixed seed") {
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(2, 2);
  rho(0, 1) = rho(1, 0) = 0.5;
  const auto m_true = model::PccModel::build(rho, dist::GroupSpec::gauss(2));
  const auto sim = m_true.simulate(300, 20260816ull);
  const Eigen::MatrixXd x = gauss_scores(sim);

  estimate::FitConfig fc;
  fc.table_grid = 512;
  fc.final_table_grid = 512;
  const auto corr = estimate::CorrelationModel::fixed(rho);
  const auto b1 = estimate::bootstrap_se(
      x, dist::GroupSpec::gauss(2), estimate::FitMethod::GmmHybrid, corr, 4,
      99ull, fc);
  const auto b2 = estimate::bootstrap_se(
      x, dist::GroupSpec::gauss(2), estimate::FitMethod::GmmHybrid, corr, 4,
      99ull, fc);
  CHECK(b1.names[0] == "lambda_1");
  CHECK(b1.sd == b2.sd);
  CHECK(b1.failures == 0);
  CHECK(b1.sd[0] > 0.0);
  CHECK(b1.sd[0] < 0.5);
}

TEST_SUITE_END();
