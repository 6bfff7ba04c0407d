#include "pcc/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pcc/errors.hpp"
#include "pcc/math/quadrature.hpp"

namespace pcc::transform {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Cosine and sine series at x = pi (y - a) / (b - a) via the Chebyshev-style
// three-term recurrence; one pass yields both when needed.
struct SeriesEval {
  double cos_sum;  // 0.5 c_0 + sum_{k>=1} c_k cos(k x)
  double sin_sum;  // sum_{k>=1} (c_k / k) sin(k x)
};

SeriesEval evaluate_series(const std::vector<double>& c, double x) {
  SeriesEval out{0.5 * c[0], 0.0};
  const double cx = std::cos(x), sx = std::sin(x);
  double ck = 1.0, sk = 0.0;  // cos(0), sin(0)
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double cn = ck * cx - sk * sx;
    const double sn = sk * cx + ck * sx;
    ck = cn;
    sk = sn;
    out.cos_sum += c[k] * ck;
    out.sin_sum += c[k] * sk / static_cast<double>(k);
  }
  return out;
}

void require_in_window(const CosConfig& cfg, double y) {
  if (!(y >= cfg.a && y <= cfg.b)) {
    std::ostringstream msg;
    msg << "cosine expansion evaluated outside its truncation window: y=" << y
        << " not in [" << cfg.a << ", " << cfg.b << "]";
    throw ParameterError(msg.str());
  }
}

void fft_radix2(std::vector<cplx>& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx u = x[i + k];
        const cplx v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

}  // namespace

void CosConfig::validate() const {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw ParameterError("cos config: need finite a < b");
  if (n_terms < 16) throw ParameterError("cos config: n_terms must be >= 16");
}

std::vector<double> cos_coefficients(const CharFn& cf, const CosConfig& cfg) {
  cfg.validate();
  const double span = cfg.b - cfg.a;
  std::vector<double> c(static_cast<std::size_t>(cfg.n_terms));
  for (int k = 0; k < cfg.n_terms; ++k) {
    const double u = static_cast<double>(k) * kPi / span;
    const cplx phase(std::cos(u * cfg.a), -std::sin(u * cfg.a));
    c[static_cast<std::size_t>(k)] = 2.0 / span * (cf(u) * phase).real();
  }
  return c;
}

Eigen::VectorXd cos_pdf(const CharFn& cf, const CosConfig& cfg,
                        const Eigen::VectorXd& y) {
  const auto c = cos_coefficients(cf, cfg);
  const double span = cfg.b - cfg.a;
  Eigen::VectorXd out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    require_in_window(cfg, y[i]);
    out[i] = evaluate_series(c, kPi * (y[i] - cfg.a) / span).cos_sum;
  }
  return out;
}

double cos_pdf(const CharFn& cf, const CosConfig& cfg, double y) {
  return cos_pdf(cf, cfg, Eigen::VectorXd::Constant(1, y))[0];
}

Eigen::VectorXd cos_cdf(const CharFn& cf, const CosConfig& cfg,
                        const Eigen::VectorXd& y) {
  const auto c = cos_coefficients(cf, cfg);
  const double span = cfg.b - cfg.a;
  Eigen::VectorXd out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    require_in_window(cfg, y[i]);
    const auto s = evaluate_series(c, kPi * (y[i] - cfg.a) / span);
    const double raw =
        0.5 * c[0] * (y[i] - cfg.a) + s.sin_sum * span / kPi;
    out[i] = std::clamp(raw, 0.0, 1.0);
  }
  return out;
}

double cos_cdf(const CharFn& cf, const CosConfig& cfg, double y) {
  return cos_cdf(cf, cfg, Eigen::VectorXd::Constant(1, y))[0];
}

double gil_pelaez_cdf(const CharFn& cf, double y) {
  const auto integrand = [&](double t) {
    const cplx phase(std::cos(t * y), -std::sin(t * y));
    return (phase * cf(t)).imag() / t;
  };
  const auto r = math::integrate_to_infinity(integrand, 0.0, 1e-11, 1e-9);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "gil_pelaez_cdf failed to converge at y=" << y
        << " (error estimate " << r.error_estimate << " after "
        << r.evaluations << " evaluations)";
    throw NumericError(msg.str());
  }
  return std::clamp(0.5 - r.value / kPi, 0.0, 1.0);
}

FftDensity fft_pdf(const CharFn& cf, int n_points, double a, double b) {
  if (n_points < 256 || (n_points & (n_points - 1)) != 0)
    throw ParameterError("fft_pdf: n_points must be a power of two >= 256");
  if (!(a < b)) throw ParameterError("fft_pdf: need a < b");
  const std::size_t n = static_cast<std::size_t>(n_points);
  const double span = b - a;
  const double dt = 2.0 * kPi / span;
  std::vector<cplx> g(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) - 0.5 * static_cast<double>(n)) * dt;
    const cplx phase(std::cos(t * a), -std::sin(t * a));
    g[j] = cf(t) * phase;
  }
  fft_radix2(g);
  FftDensity out;
  out.grid.resize(n_points);
  out.pdf.resize(n_points);
  const double dy = span / static_cast<double>(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    out.grid[static_cast<Eigen::Index>(m)] = a + static_cast<double>(m) * dy;
    out.pdf[static_cast<Eigen::Index>(m)] =
        std::max(0.0, sign * g[m].real() / span);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MarginalTable
// ---------------------------------------------------------------------------

double MarginalTable::raw_pdf_series(double y) const {
  const double span = cfg_.b - cfg_.a;
  return evaluate_series(coef_, kPi * (y - cfg_.a) / span).cos_sum;
}

double MarginalTable::raw_cdf_series(double y) const {
  const double span = cfg_.b - cfg_.a;
  const auto s = evaluate_series(coef_, kPi * (y - cfg_.a) / span);
  return 0.5 * coef_[0] * (y - cfg_.a) + s.sin_sum * span / kPi;
}

double MarginalTable::pdf(double y) const {
  if (y < cfg_.a || y > cfg_.b) return 0.0;
  return std::max(0.0, raw_pdf_series(y));
}

double MarginalTable::log_pdf(double y) const {
  const double f = pdf(y);
  return f > 0.0 ? std::log(f) : -std::numeric_limits<double>::infinity();
}

double MarginalTable::cdf(double y) const {
  if (y <= cfg_.a) return kEps;
  if (y >= cfg_.b) return 1.0 - kEps;
  const double mapped = map_lo_ + map_slope_ * raw_cdf_series(y);
  return std::clamp(mapped, kEps, 1.0 - kEps);
}

double MarginalTable::inverse_cdf(double u) const { return inverse_cdf(u, true); }

double MarginalTable::inverse_cdf(double u, bool refine) const {
  if (!(u > 0.0 && u < 1.0))
    throw ParameterError("inverse_cdf: u must lie strictly inside (0, 1)");
  const double uc = std::clamp(u, kEps, 1.0 - kEps);
  double y = inverse_(uc);
  if (!refine) return y;
  const double step_cap =
      10.0 * (cfg_.b - cfg_.a) / static_cast<double>(grid_.size());
  for (int it = 0; it < 8; ++it) {
    const double err = cdf(y) - uc;
    if (std::abs(err) < 1e-13) break;
    const double f = pdf(y);
    if (!(f > 0.0)) break;
    const double step = err / f;
    if (std::abs(step) > step_cap) break;  // repair zone; keep interpolant
    y = std::clamp(y - step, cfg_.a, cfg_.b);
  }
  return y;
}

MarginalTable build_marginal_table(const CharFn& cf, const CosConfig& cfg,
                                   int n_grid, int index) {
  cfg.validate();
  if (n_grid < 16) throw ParameterError("build_marginal_table: n_grid >= 16");
  MarginalTable t;
  t.cfg_ = cfg;
  t.coef_ = cos_coefficients(cf, cfg);
  t.index_ = index;
  const auto n = static_cast<Eigen::Index>(n_grid);
  t.grid_ = Eigen::VectorXd::LinSpaced(n, cfg.a, cfg.b);
  t.pdf_.resize(n);
  Eigen::VectorXd raw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.pdf_[i] = std::max(0.0, t.raw_pdf_series(t.grid_[i]));
    raw[i] = t.raw_cdf_series(t.grid_[i]);
  }
  // Monotone repair: running maximum, lift exact ties, then affine map onto
  // [eps, 1-eps]. Oscillations only appear in the far tails, so the lifted
  // values differ from the raw series by O(1e-12) at most.
  for (Eigen::Index i = 1; i < n; ++i) {
    const double floor_val = raw[i - 1] + 1e-15;
    if (raw[i] < floor_val) raw[i] = floor_val;
  }
  const double lo = raw[0], hi = raw[n - 1];
  if (!(hi - lo > 1e-6))
    throw NumericError(
        "build_marginal_table: CDF series has no usable rise over the "
        "truncation window; widen [a, b]");
  const double eps = MarginalTable::kEps;
  t.map_slope_ = (1.0 - 2.0 * eps) / (hi - lo);
  t.map_lo_ = eps - t.map_slope_ * lo;
  t.cdf_ = (raw.array() * t.map_slope_ + t.map_lo_).matrix();
  t.inverse_ = math::MonotoneCubic(
      std::vector<double>(t.cdf_.data(), t.cdf_.data() + n),
      std::vector<double>(t.grid_.data(), t.grid_.data() + n));
  return t;
}

}  // namespace pcc::transform
