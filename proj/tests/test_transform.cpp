#include <cmath>
#include <complex>

#include "doctest.h"
#include "pcc/dist.hpp"
#include "pcc/errors.hpp"
#include "pcc/math/normal.hpp"
#include "pcc/transform.hpp"

using namespace pcc;
using cplx = std::complex<double>;

namespace {

const transform::CharFn normal_cf = [](double t) {
  return cplx(std::exp(-0.5 * t * t), 0.0);
};

}  // namespace

TEST_SUITE_BEGIN("transform");

TEST_CASE("cos pdf reproduces the normal density to 1e-6 on [-8, 8]") {
  transform::CosConfig cfg;
  double sup = 0.0;
  for (double y = -8.0; y <= 8.0; y += 0.05)
    sup = std::max(sup, std::abs(transform::cos_pdf(normal_cf, cfg, y) -
                                 math::norm_pdf(y)));
  CHECK(sup < 1e-6);
  CHECK(std::abs(transform::cos_pdf(normal_cf, cfg, 1.3) -
                 transform::cos_pdf(normal_cf, cfg, -1.3)) < 1e-12);
}

TEST_CASE("doubling the term count changes the expansion below 1e-10") {
  transform::CosConfig c100;
  c100.n_terms = 100;
  transform::CosConfig c200 = c100;
  c200.n_terms = 200;
  double dsup = 0.0;
  for (double y = -8.0; y <= 8.0; y += 0.25)
    dsup = std::max(dsup, std::abs(transform::cos_pdf(normal_cf, c100, y) -
                                   transform::cos_pdf(normal_cf, c200, y)));
  CHECK(dsup < 1e-10);
}

TEST_CASE("cos cdf matches the normal cdf and saturates at the window edge") {
  transform::CosConfig cfg;
  CHECK(std::abs(transform::cos_cdf(normal_cf, cfg, 0.0) - 0.5) < 1e-8);
  CHECK(std::abs(transform::cos_cdf(normal_cf, cfg, 10.0) - 1.0) < 1e-6);
  double sup = 0.0;
  for (double y = -5.0; y <= 5.0; y += 0.5)
    sup = std::max(sup, std::abs(transform::cos_cdf(normal_cf, cfg, y) -
                                 math::norm_cdf(y)));
  CHECK(sup < 1e-8);
}

TEST_CASE("gil-pelaez inversion agrees with the cosine cdf") {
  transform::CosConfig cfg;
  CHECK(std::abs(transform::gil_pelaez_cdf(normal_cf, 0.0) - 0.5) < 1e-8);
  CHECK(std::abs(transform::gil_pelaez_cdf(normal_cf, 1.959964) - 0.975) <
        1e-6);
  double sup = 0.0;
  for (double y = -5.0; y <= 5.0; y += 1.0)
    sup = std::max(sup, std::abs(transform::gil_pelaez_cdf(normal_cf, y) -
                                 transform::cos_cdf(normal_cf, cfg, y)));
  CHECK(sup < 1e-6);
}

TEST_CASE("fft inversion agrees with the cosine expansion") {
  transform::CosConfig cfg;
  const auto fd = transform::fft_pdf(normal_cf, 4096, -10.0, 10.0);
  double sup = 0.0, mass = 0.0;
  for (Eigen::Index i = 0; i < fd.grid.size(); ++i) {
    sup = std::max(sup, std::abs(fd.pdf[i] - math::norm_pdf(fd.grid[i])));
    mass += fd.pdf[i];
  }
  CHECK(sup < 1e-6);
  CHECK(mass * 20.0 / 4096.0 == doctest::Approx(1.0).epsilon(1e-4));
  double cos_sup = 0.0;
  for (Eigen::Index i = 0; i < fd.grid.size(); i += 16)
    cos_sup = std::max(
        cos_sup,
        std::abs(fd.pdf[i] -
                 std::max(0.0, transform::cos_pdf(normal_cf, cfg, fd.grid[i]))));
  CHECK(cos_sup < 1e-5);
}

TEST_CASE("cos pdf reproduces the hyperbolic density to 1e-6") {
  const auto hb = dist::hyperbolic_match_moments(2.0, 0.5, 1.0);
  const transform::CharFn hb_cf = [&](double t) {
    return dist::hyperbolic_cf(t, hb);
  };
  transform::CosConfig cfg;
  double sup = 0.0, gp = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double y = -8.0 + 16.0 * i / 100.0;
    sup = std::max(sup, std::abs(transform::cos_pdf(hb_cf, cfg, y) -
                                 dist::hyperbolic_pdf(y, hb)));
  }
  for (double y = -5.0; y <= 5.0; y += 1.0)
    gp = std::max(gp, std::abs(transform::gil_pelaez_cdf(hb_cf, y) -
                               transform::cos_cdf(hb_cf, cfg, y)));
  CHECK(sup < 1e-6);
  CHECK(gp < 1e-6);
}

TEST_CASE("marginal table quantiles and round trip") {
  transform::CosConfig cfg;
  const auto table = transform::build_marginal_table(normal_cf, cfg, 4096, 0);
  CHECK(std::abs(table.inverse_cdf(0.5)) < 1e-8);
  CHECK(std::abs(table.inverse_cdf(0.975) - math::norm_quantile(0.975)) <
        1e-7);
  double rt = 0.0, rt_coarse = 0.0;
  for (int k = 1; k <= 999; ++k) {
    const double u = k / 1000.0;
    rt = std::max(rt, std::abs(table.cdf(table.inverse_cdf(u)) - u));
    rt_coarse = std::max(
        rt_coarse, std::abs(table.cdf(table.inverse_cdf(u, false)) - u));
  }
  CHECK(rt < 1e-12);        // with root refinement
  CHECK(rt_coarse < 1e-6);  // interpolation only
}

TEST_CASE("marginal table cdf strictly increasing onto the clipped range") {
  transform::CosConfig cfg;
  const auto table = transform::build_marginal_table(normal_cf, cfg, 4096, 0);
  const auto& cv = table.cdf_values();
  bool strict = true;
  for (Eigen::Index i = 1; i < cv.size(); ++i)
    if (!(cv[i] > cv[i - 1])) strict = false;
  CHECK(strict);
  CHECK(cv[0] >= 1e-10 - 1e-25);
  CHECK(cv[cv.size() - 1] <= 1.0 - 1e-10 + 1e-25);
}

TEST_CASE("hyperbolic marginal table tracks quadrature references") {
  const auto hb = dist::hyperbolic_match_moments(2.0, 0.5, 1.0);
  const transform::CharFn hb_cf = [&](double t) {
    return dist::hyperbolic_cf(t, hb);
  };
  transform::CosConfig cfg;
  const auto table = transform::build_marginal_table(hb_cf, cfg, 4096, 0);
  CHECK(std::abs(table.pdf(0.3) - dist::hyperbolic_pdf(0.3, hb)) < 1e-6);
  CHECK(std::abs(table.cdf(-1.2) - transform::gil_pelaez_cdf(hb_cf, -1.2)) <
        1e-7);
}

TEST_CASE("evaluation outside the truncation window throws") {
  transform::CosConfig cfg;
  CHECK_THROWS_AS(transform::cos_pdf(normal_cf, cfg, 10.5), ParameterError);
}

TEST_SUITE_END();
