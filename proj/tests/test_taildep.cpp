#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "pcc/errors.hpp"
#include "pcc/model.hpp"
#include "pcc/taildep.hpp"

using namespace pcc;

namespace {

Eigen::MatrixXd equicorr(int d, double r) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(d, d, r);
  m.diagonal().setOnes();
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("taildep");

TEST_CASE("analytic tail coefficients match the erfc oracle") {
  const auto tc = taildep::hb_n_tail_coeffs(0.5, -0.25, 1.0);
  CHECK(std::abs(tc.eta_lower - std::erfc(0.25 / std::sqrt(2.0))) < 1e-14);
  CHECK(std::abs(tc.eta_upper - std::erfc(0.75 / std::sqrt(2.0))) < 1e-14);
  const auto sym = taildep::hb_n_tail_coeffs(1.3, 0.0, 0.7);
  CHECK(sym.eta_lower == sym.eta_upper);
  CHECK_THROWS_AS(taildep::hb_n_tail_coeffs(0.2, 0.3, 1.0), ParameterError);
}

TEST_CASE("tail coefficients decrease in the respective tail rates") {
  double prev_l = 2.0;
  for (double a = 0.3; a < 3.0; a += 0.3) {
    const auto t = taildep::hb_n_tail_coeffs(a, 0.0, 1.0);
    CHECK(t.eta_lower < prev_l);
    prev_l = t.eta_lower;
  }
  // lower rate alpha + beta fixed at 1.5; the upper rate alpha - beta rises
  const auto base = taildep::hb_n_tail_coeffs(1.5, 0.0, 1.0);
  const auto skew = taildep::hb_n_tail_coeffs(1.6, -0.1, 1.0);
  CHECK(skew.eta_lower == doctest::Approx(base.eta_lower).epsilon(1e-12));
  CHECK(skew.eta_upper < base.eta_upper);
}

TEST_CASE("generator-space numeric limit matches the analytic formula") {
  const auto an = taildep::hb_n_tail_coeffs(0.5, -0.25, 1.0);
  const auto lo = taildep::hb_n_pair_tail_limit(0.5, -0.25, 1.0, 1.0);
  const auto up = taildep::hb_n_pair_tail_limit(
      0.5, -0.25, 1.0, 1.0, taildep::default_q_sequence(), true);
  CHECK(!lo.truncated);
  CHECK(lo.q.size() == 4);
  CHECK(std::abs(lo.eta - an.eta_lower) < 0.02);
  CHECK(std::abs(up.eta - an.eta_upper) < 0.02);
}

TEST_CASE("model-route numeric limit matches the analytic formula") {
  const auto spec = dist::GroupSpec::hyperbolic_normal(2, {{1.2, 0.3}});
  const auto m = model::PccModel::build(equicorr(2, 0.8), spec);
  const auto an = taildep::hb_n_tail_coeffs(1.2, 0.3, m.lambda()[1]);
  const auto lo = taildep::numeric_tail_limit(m, 0, 1);
  const auto up = taildep::numeric_tail_limit(
      m, 0, 1, taildep::default_q_sequence(), true);
  CHECK(std::abs(lo.eta - an.eta_lower) < 0.02);
  CHECK(std::abs(up.eta - an.eta_upper) < 0.02);
}

TEST_CASE("gaussian pair decays toward tail independence") {
  const auto m =
      model::PccModel::build(equicorr(2, 0.6), dist::GroupSpec::gauss(2));
  const auto r = taildep::numeric_tail_limit(m, 0, 1);
  for (std::size_t k = 1; k < r.eta_q.size(); ++k)
    CHECK(r.eta_q[k] < r.eta_q[k - 1]);
  CHECK(r.eta < 0.15);
  const auto m2 =
      model::PccModel::build(equicorr(2, 0.999), dist::GroupSpec::gauss(2));
  CHECK(taildep::numeric_tail_limit(m2, 0, 1, {0.02}).eta_q[0] > 0.85);
}

TEST_CASE("t copula limit matches the closed form and is symmetric") {
  const auto m = model::PccModel::build(equicorr(2, 0.5),
                                        dist::GroupSpec::student_t(2, 4.0));
  const auto lo = taildep::numeric_tail_limit(m, 0, 1);
  // 2 t_{nu+1}(-sqrt((nu+1)(1-rho)/(1+rho))) at nu=4, rho=0.5
  CHECK(std::abs(lo.eta - 0.25335) < 0.06);
  const auto up = taildep::numeric_tail_limit(
      m, 0, 1, taildep::default_q_sequence(), true);
  CHECK(std::abs(up.eta - lo.eta) < 0.02);
}

TEST_CASE("mc cpjqe independence, symmetry, and reliability flag") {
  const auto m = model::PccModel::build(Eigen::MatrixXd::Identity(2, 2),
                                        dist::GroupSpec::gauss(2));
  const auto e = taildep::mc_cpjqe(m, 0.05, 400000, 11ull);
  CHECK(std::abs(e.eta(0, 1) - 0.05) < 0.004);
  CHECK(e.eta(0, 1) == e.eta(1, 0));
  CHECK(std::abs(e.eta(0, 0) - 1.0) < 0.02);
  CHECK(e.reliable);
  const auto s = m.simulate(5000, 5ull);
  CHECK_FALSE(taildep::mc_cpjqe(s, 0.001).reliable);
}

TEST_CASE("density integration and counting agree at the median corner") {
  const auto m = model::PccModel::build(equicorr(2, 0.5),
                                        dist::GroupSpec::student_t(2, 6.0));
  const auto num = taildep::numeric_tail_limit(m, 0, 1, {0.5});
  const auto sim = taildep::mc_cpjqe(m, 0.5, 400000, 12ull);
  CHECK(std::abs(num.eta_q[0] - sim.eta(0, 1)) < 0.005);
}

TEST_CASE("linear extrapolation recovers an exact line and clamps") {
  // eta_q = 0.2 + 3 q extrapolates to 0.2
  const std::vector<double> q{0.02, 0.01, 0.005, 0.0025};
  std::vector<double> eta;
  for (double x : q) eta.push_back(0.2 + 3.0 * x);
  CHECK(taildep::extrapolate_eta(q, eta) ==
        doctest::Approx(0.2).epsilon(1e-12));
  CHECK(taildep::extrapolate_eta({0.01}, {0.4}) == 0.4);
  // steep negative slope clamps at zero
  CHECK(taildep::extrapolate_eta({0.02, 0.01}, {0.5, 0.05}) >= 0.0);
  CHECK_THROWS_AS(taildep::extrapolate_eta({}, {}), ParameterError);
}

TEST_SUITE_END();
