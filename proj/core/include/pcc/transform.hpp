#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <vector>

#include "pcc/math/pchip.hpp"

namespace pcc::transform {

using CharFn = std::function<std::complex<double>(double)>;

// Truncation window and expansion length for the cosine-series inversion.
struct CosConfig {
  double a = -10.0;
  double b = 10.0;
  int n_terms = 100;

  void validate() const;  // a < b, n_terms >= 16
};

// Series coefficients c_k = (2/(b-a)) Re[phi(k pi/(b-a)) e^{-i k a pi/(b-a)}].
std::vector<double> cos_coefficients(const CharFn& cf, const CosConfig& cfg);

// Truncated cosine expansion of the density at each y (y must lie in [a, b]).
Eigen::VectorXd cos_pdf(const CharFn& cf, const CosConfig& cfg,
                        const Eigen::VectorXd& y);
double cos_pdf(const CharFn& cf, const CosConfig& cfg, double y);

// Companion sine expansion of the CDF, clipped to [0, 1].
Eigen::VectorXd cos_cdf(const CharFn& cf, const CosConfig& cfg,
                        const Eigen::VectorXd& y);
double cos_cdf(const CharFn& cf, const CosConfig& cfg, double y);

// Independent inversion oracle:
//   F(y) = 1/2 - (1/pi) int_0^inf Im[e^{-ity} phi(t)] / t dt
// by adaptive quadrature over doubling segments. Throws NumericError with
// diagnostics when the quadrature fails to settle.
double gil_pelaez_cdf(const CharFn& cf, double y);

// Discrete Fourier inversion of the CF on a uniform n-point grid over [a, b);
// n must be a power of two >= 256. Density floored at zero. Second oracle for
// cos_pdf, and the bulk-evaluation route when many grid densities are needed.
struct FftDensity {
  Eigen::VectorXd grid;
  Eigen::VectorXd pdf;
};
FftDensity fft_pdf(const CharFn& cf, int n_points, double a, double b);

// ---------------------------------------------------------------------------
// Marginal lookup table: pdf/CDF of one margin from its CF, with a monotone
// inverse. The CDF is repaired (running maximum, tie-lift) and mapped onto
// [eps, 1-eps], eps = 1e-10; the inverse is monotone-cubic interpolation
// Newton-polished against the series CDF. Immutable after construction.
// ---------------------------------------------------------------------------
class MarginalTable {
 public:
  static constexpr double kEps = 1e-10;

  MarginalTable() = default;

  double pdf(double y) const;          // series evaluation, 0 outside [a, b]
  double log_pdf(double y) const;
  double cdf(double y) const;          // series + repair map, in [eps, 1-eps]
  double inverse_cdf(double u) const;  // monotone interpolation + refinement
  double inverse_cdf(double u, bool refine) const;

  const Eigen::VectorXd& grid() const { return grid_; }
  const Eigen::VectorXd& pdf_values() const { return pdf_; }
  const Eigen::VectorXd& cdf_values() const { return cdf_; }
  const CosConfig& config() const { return cfg_; }
  int index() const { return index_; }

 private:
  friend MarginalTable build_marginal_table(const CharFn&, const CosConfig&,
                                            int, int);
  CosConfig cfg_;
  std::vector<double> coef_;
  int index_ = -1;
  Eigen::VectorXd grid_;
  Eigen::VectorXd pdf_;  // floored at zero
  Eigen::VectorXd cdf_;  // strictly increasing, spans [eps, 1-eps]
  double map_lo_ = 0.0;  // affine repair map: cdf = lo + slope * raw
  double map_slope_ = 1.0;
  math::MonotoneCubic inverse_;  // cdf -> y

  double raw_cdf_series(double y) const;
  double raw_pdf_series(double y) const;
};

// Builds the table on an n_grid-point uniform grid over [cfg.a, cfg.b]
// (default 4096 points); index tags which margin the table belongs to.
MarginalTable build_marginal_table(const CharFn& cf, const CosConfig& cfg,
                                   int n_grid = 4096, int index = -1);

}  // namespace pcc::transform
