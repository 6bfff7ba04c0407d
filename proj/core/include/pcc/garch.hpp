#pragma once

#include <Eigen/Core>
#include <vector>

namespace pcc::garch {

// AR(1)-GARCH(1,1) quasi-maximum-likelihood fit for one return series:
//   r_t = delta + phi * r_{t-1} + eps_t
//   sigma2_t = omega + alpha_g * eps_{t-1}^2 + beta_g * sigma2_{t-1}
// The variance recursion is booted at the unconditional level
// omega / (1 - alpha_g - beta_g).
struct GarchFit {
  double delta = 0.0;
  double phi = 0.0;
  double omega = 1.0;
  double alpha_g = 0.0;
  double beta_g = 0.0;

  double loglik = 0.0;
  int n_obs = 0;
  bool converged = false;
  // Asymptotic standard errors for (delta, phi, omega, alpha_g, beta_g) from
  // the observed information; NaN entries mean the Hessian was not usable in
  // that direction (typically a boundary optimum).
  Eigen::VectorXd std_err;

  // Throws ParameterError unless omega > 0, alpha_g >= 0, beta_g >= 0 and
  // alpha_g + beta_g < 1 (covariance stationarity).
  void validate() const;
};

// Conditional paths implied by a fit on a series: eps and sigma2 both have
// length n-1 (the first observation is consumed by the AR lag).
struct GarchPaths {
  Eigen::VectorXd eps;
  Eigen::VectorXd sigma2;
};

GarchPaths garch_paths(const Eigen::VectorXd& r, const GarchFit& fit);

// Gaussian QML fit. Requires length >= 200 and no non-finite entries
// (DataError otherwise). Optimizes on transformed parameters so the
// constraints hold smoothly: omega = exp(t), persistence
// s = alpha_g + beta_g = logistic(t) in (0,1), split alpha_g = s * logistic(t),
// phi = tanh(t). The starting point sets the implied unconditional variance
// equal to the sample variance of the AR residuals from an OLS AR(1) pre-fit.
// Throws NonConvergenceError with diagnostics if no finite optimum is found.
GarchFit fit_ar_garch(const Eigen::VectorXd& r);

// Devolatized residuals x_t = eps_t / sigma_t, length n-1. On a valid fit the
// sample variance is close to 1.
Eigen::VectorXd filter_residuals(const Eigen::VectorXd& r, const GarchFit& fit);

// Column-wise panel versions; fits are independent and run in parallel under
// the process thread cap.
std::vector<GarchFit> fit_ar_garch_panel(const Eigen::MatrixXd& returns);
Eigen::MatrixXd filter_panel(const Eigen::MatrixXd& returns,
                             const std::vector<GarchFit>& fits);

// Ljung-Box p-value for the first `lags` autocorrelations of `series`
// (pass the squared residuals to test for remaining ARCH effects).
double ljung_box_pvalue(const Eigen::VectorXd& series, int lags);

}  // namespace pcc::garch
