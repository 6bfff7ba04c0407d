#include "pcc/garch.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcc/errors.hpp"
#include "pcc/math/optim.hpp"
#include "pcc/math/parallel.hpp"
#include "pcc/math/special.hpp"

namespace pcc::garch {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kWall = 1e300;

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

struct Native {
  double delta, phi, omega, alpha, beta;
};

Native from_theta(const Eigen::VectorXd& t) {
  const double s = logistic(t[3]);
  const double w = logistic(t[4]);
  return {t[0], std::tanh(t[1]), std::exp(t[2]), s * w, s * (1.0 - w)};
}

// Negative Gaussian QML log-likelihood over the n-1 conditional densities.
// Invalid parameter regions return a wall value instead of throwing so the
// optimizer can probe freely.
double negloglik(const Eigen::VectorXd& r, const Native& p) {
  const auto n = r.size();
  const double persistence = p.alpha + p.beta;
  if (!(p.omega > 0.0) || p.alpha < -0.5 || p.beta < -0.5 ||
      persistence >= 1.0 || !std::isfinite(p.omega)) {
    return kWall;
  }
  double s2 = p.omega / (1.0 - persistence);
  if (!(s2 > 0.0) || !std::isfinite(s2)) return kWall;
  double nll = 0.0;
  double prev_eps2 = 0.0;
  for (Eigen::Index t = 1; t < n; ++t) {
    if (t > 1) s2 = p.omega + p.alpha * prev_eps2 + p.beta * s2;
    if (!(s2 > 0.0) || !std::isfinite(s2)) return kWall;
    const double eps = r[t] - p.delta - p.phi * r[t - 1];
    nll += 0.5 * (kLog2Pi + std::log(s2) + eps * eps / s2);
    prev_eps2 = eps * eps;
  }
  return std::isfinite(nll) ? nll : kWall;
}

// Observed-information standard errors: central-difference Hessian of the
// negative log-likelihood in native parameter space, inverted where usable.
Eigen::VectorXd hessian_std_err(const Eigen::VectorXd& r, const Native& p) {
  Eigen::VectorXd x(5);
  x << p.delta, p.phi, p.omega, p.alpha, p.beta;
  const auto f = [&](const Eigen::VectorXd& v) {
    return negloglik(r, {v[0], v[1], v[2], v[3], v[4]});
  };
  Eigen::VectorXd h(5);
  for (int i = 0; i < 5; ++i) h[i] = 1e-3 * std::max(std::abs(x[i]), 1e-3);

  Eigen::MatrixXd hess(5, 5);
  const double f0 = f(x);
  bool usable = f0 < kWall / 2;
  for (int i = 0; i < 5 && usable; ++i) {
    for (int j = i; j < 5 && usable; ++j) {
      double d2;
      if (i == j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h[i];
        xm[i] -= h[i];
        d2 = (f(xp) - 2.0 * f0 + f(xm)) / (h[i] * h[i]);
      } else {
        Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
        xpp[i] += h[i];
        xpp[j] += h[j];
        xpm[i] += h[i];
        xpm[j] -= h[j];
        xmp[i] -= h[i];
        xmp[j] += h[j];
        xmm[i] -= h[i];
        xmm[j] -= h[j];
        d2 = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h[i] * h[j]);
      }
      if (!std::isfinite(d2) || std::abs(d2) >= kWall / 2) usable = false;
      hess(i, j) = hess(j, i) = d2;
    }
  }

  Eigen::VectorXd se =
      Eigen::VectorXd::Constant(5, std::numeric_limits<double>::quiet_NaN());
  if (!usable) return se;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(hess);
  if (!lu.isInvertible()) return se;
  const Eigen::MatrixXd cov = lu.inverse();
  for (int i = 0; i < 5; ++i) {
    if (cov(i, i) > 0.0 && std::isfinite(cov(i, i)))
      se[i] = std::sqrt(cov(i, i));
  }
  return se;
}

}  // namespace

void GarchFit::validate() const {
  if (!(omega > 0.0)) throw ParameterError("garch: omega must be positive");
  if (alpha_g < 0.0 || beta_g < 0.0)
    throw ParameterError("garch: alpha_g and beta_g must be non-negative");
  if (!(alpha_g + beta_g < 1.0))
    throw ParameterError(
        "garch: alpha_g + beta_g must be below 1 (covariance stationarity)");
  if (!std::isfinite(delta) || !std::isfinite(phi))
    throw ParameterError("garch: delta and phi must be finite");
}

GarchPaths garch_paths(const Eigen::VectorXd& r, const GarchFit& fit) {
  fit.validate();
  if (r.size() < 2) throw DataError("garch: series needs at least 2 points");
  if (!r.allFinite()) throw DataError("garch: series contains non-finite values");
  const auto m = r.size() - 1;
  GarchPaths out;
  out.eps.resize(m);
  out.sigma2.resize(m);
  double s2 = fit.omega / (1.0 - fit.alpha_g - fit.beta_g);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (k > 0)
      s2 = fit.omega + fit.alpha_g * out.eps[k - 1] * out.eps[k - 1] +
           fit.beta_g * s2;
    out.eps[k] = r[k + 1] - fit.delta - fit.phi * r[k];
    out.sigma2[k] = s2;
  }
  return out;
}

GarchFit fit_ar_garch(const Eigen::VectorXd& r) {
  const auto n = r.size();
  if (n < 200) throw DataError("garch: series length must be at least 200");
  if (!r.allFinite()) throw DataError("garch: series contains non-finite values");

  // OLS AR(1) pre-fit for the mean equation and the residual variance that
  // anchors the variance-equation start.
  const auto m = n - 1;
  const Eigen::VectorXd x = r.head(m);
  const Eigen::VectorXd y = r.tail(m);
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  double phi0 = 0.0;
  if (sxx > 0.0) phi0 = ((x.array() - mx) * (y.array() - my)).sum() / sxx;
  phi0 = std::clamp(phi0, -0.95, 0.95);
  const double delta0 = my - phi0 * mx;
  const Eigen::VectorXd resid = y.array() - delta0 - phi0 * x.array();
  double v = resid.squaredNorm() / static_cast<double>(m);
  if (!(v > 0.0)) throw DataError("garch: series has zero residual variance");

  // Start: persistence 0.9 split heavily toward beta, omega chosen so the
  // implied unconditional variance equals the AR residual sample variance.
  const double s0 = 0.9;
  const double alpha0 = 0.05;
  Eigen::VectorXd theta0(5);
  theta0 << delta0, std::atanh(phi0), std::log(v * (1.0 - s0)),
      std::log(s0 / (1.0 - s0)), std::log(alpha0 / (s0 - alpha0));

  const auto obj = [&](const Eigen::VectorXd& t) {
    return negloglik(r, from_theta(t));
  };

  math::OptimResult opt = math::bfgs_numeric(obj, theta0, 1e-5, 400);
  if (!opt.converged || opt.value >= kWall / 2) {
    Eigen::VectorXd step = Eigen::VectorXd::Constant(5, 0.2);
    step[0] = std::max(1e-4, 0.1 * std::sqrt(v));
    math::OptimResult nm =
        math::nelder_mead(obj, opt.value < kWall / 2 ? opt.x : theta0, step,
                          1e-10, 6000, 2);
    math::OptimResult polish = math::bfgs_numeric(obj, nm.x, 1e-5, 400);
    if (polish.value <= nm.value) {
      polish.converged = polish.converged || nm.converged;
      opt = polish;
    } else {
      opt = nm;
    }
  }

  // Second start at low persistence. When the series has no ARCH effects the
  // likelihood is flat in beta_g along alpha_g ~ 0, so the persistent start
  // above stalls on the ridge; near-ties are broken toward the parsimonious
  // fit. Genuinely identified fits win by far more than the tie tolerance.
  {
    const double s1 = 0.1;
    Eigen::VectorXd theta_low(5);
    theta_low << delta0, std::atanh(phi0), std::log(v * (1.0 - s1)),
        std::log(s1 / (1.0 - s1)), 0.0;
    const math::OptimResult low = math::bfgs_numeric(obj, theta_low, 1e-5, 400);
    if (low.value < kWall / 2) {
      const Native a = from_theta(opt.x);
      const Native b = from_theta(low.x);
      const bool better = low.value < opt.value - 0.25;
      const bool tie_and_simpler = std::abs(low.value - opt.value) <= 0.25 &&
                                   b.alpha + b.beta < a.alpha + a.beta;
      if (better || tie_and_simpler) opt = low;
    }
  }
  if (!std::isfinite(opt.value) || opt.value >= kWall / 2) {
    std::ostringstream msg;
    msg << "garch: QML optimization failed (n=" << n
        << ", start delta=" << delta0 << " phi=" << phi0 << " var=" << v
        << ", final objective=" << opt.value << ")";
    throw NonConvergenceError(msg.str());
  }

  const Native p = from_theta(opt.x);
  GarchFit fit;
  fit.delta = p.delta;
  fit.phi = p.phi;
  fit.omega = p.omega;
  fit.alpha_g = p.alpha;
  fit.beta_g = p.beta;
  fit.loglik = -opt.value;
  fit.n_obs = static_cast<int>(n);
  fit.converged = opt.converged;
  fit.std_err = hessian_std_err(r, p);
  fit.validate();
  return fit;
}

Eigen::VectorXd filter_residuals(const Eigen::VectorXd& r,
                                 const GarchFit& fit) {
  const GarchPaths paths = garch_paths(r, fit);
  return paths.eps.array() / paths.sigma2.array().sqrt();
}

std::vector<GarchFit> fit_ar_garch_panel(const Eigen::MatrixXd& returns) {
  const auto d = returns.cols();
  std::vector<GarchFit> fits(static_cast<std::size_t>(d));
  math::parallel_for_blocks(
      static_cast<std::size_t>(d), 1,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j)
          fits[j] = fit_ar_garch(returns.col(static_cast<Eigen::Index>(j)));
      });
  return fits;
}

Eigen::MatrixXd filter_panel(const Eigen::MatrixXd& returns,
                             const std::vector<GarchFit>& fits) {
  const auto d = returns.cols();
  if (static_cast<Eigen::Index>(fits.size()) != d)
    throw ParameterError("garch: one fit per column required");
  if (returns.rows() < 2)
    throw DataError("garch: panel needs at least 2 rows");
  Eigen::MatrixXd x(returns.rows() - 1, d);
  for (Eigen::Index j = 0; j < d; ++j)
    x.col(j) = filter_residuals(returns.col(j), fits[static_cast<std::size_t>(j)]);
  return x;
}

double ljung_box_pvalue(const Eigen::VectorXd& series, int lags) {
  const auto m = series.size();
  if (lags < 1) throw ParameterError("ljung_box: lags must be positive");
  if (m <= lags + 1)
    throw DataError("ljung_box: series too short for requested lags");
  const Eigen::ArrayXd z = series.array() - series.mean();
  const double denom = z.square().sum();
  if (!(denom > 0.0)) throw DataError("ljung_box: series is constant");
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    const double rk =
        (z.tail(m - k) * z.head(m - k)).sum() / denom;
    q += rk * rk / static_cast<double>(m - k);
  }
  q *= static_cast<double>(m) * (static_cast<double>(m) + 2.0);
  return math::chi2_sf(q, static_cast<double>(lags));
}

}  // namespace pcc::garch
