#include "pcc/math/bessel.hpp"

#include <cmath>
#include <limits>

#include "pcc/errors.hpp"

namespace pcc::math {

namespace {

using cplx = std::complex<double>;

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxIter = 20000;
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kLog2 = 0.693147180559945309417232121458176568;

// Coefficients of 1/Gamma(z) = sum_k c_k z^k (Abramowitz & Stegun 6.1.34).
constexpr double kInvGammaCoef[] = {
    +1.00000000000000000000e+00, +5.77215664901532860607e-01,
    -6.55878071520253881077e-01, -4.20026350340952355290e-02,
    +1.66538611382291489502e-01, -4.21977345555443367482e-02,
    -9.62197152787697356211e-03, +7.21894324666309954240e-03,
    -1.16516759185906511211e-03, -2.15241674114950972816e-04,
    +1.28050282388116186153e-04, -2.01348547807882386557e-05,
    -1.25049348214267065735e-06, +1.13302723198169588237e-06,
    -2.05633841697760710345e-07, +6.11609510448141581786e-09,
    +5.00200764446922293006e-09, -1.18127457048702014459e-09,
    +1.04342671169110051049e-10, +7.78226343990507125405e-12,
    -3.69680561864220570819e-12, +5.10037028745447597902e-13,
    -2.05832605356650678322e-14, -5.34812253942301798237e-15,
    +1.22677862823826079016e-15, -1.18125930169745876951e-16};

// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)   (-> Euler gamma as mu->0)
// gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
// gampl = 1/Gamma(1+mu), gammi = 1/Gamma(1-mu); |mu| <= 1/2.
void gamma_chi(double mu, double& gam1, double& gam2, double& gampl,
               double& gammi) {
  // 1/Gamma(1+x) = sum_k c_k x^{k-1}; accumulate even and odd parts in mu so
  // the mu->0 limit of gam1 carries no cancellation.
  double even = 0.0, odd = 0.0;
  const double mu2 = mu * mu;
  double p = 1.0;
  for (std::size_t k = 0; k + 1 < std::size(kInvGammaCoef); k += 2) {
    even += kInvGammaCoef[k] * p;
    odd += kInvGammaCoef[k + 1] * p;
    p *= mu2;
  }
  gampl = even + mu * odd;
  gammi = even - mu * odd;
  gam1 = -odd;
  gam2 = even;
}

struct KPair {
  cplx k_mu;   // K_{order}(z) * exp(-log_scale)
  cplx k_mu1;  // K_{order+1}(z) * exp(-log_scale)
  double log_scale = 0.0;
};

// Temme's series for K_mu, K_{mu+1}; |mu| <= 1/2, |z| <= 2, Re z > 0.
KPair temme_series(double mu, cplx z) {
  const double mu2 = mu * mu;
  const double pimu = kPi * mu;
  const double fact = (std::abs(pimu) < 1e-14) ? 1.0 : pimu / std::sin(pimu);
  const cplx half_z = 0.5 * z;
  const cplx d = -std::log(half_z);
  const cplx e = mu * d;
  const cplx fact2 = (std::abs(e) < 1e-14) ? cplx(1.0) : std::sinh(e) / e;
  double gam1, gam2, gampl, gammi;
  gamma_chi(mu, gam1, gam2, gampl, gammi);
  cplx ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
  cplx sum = ff;
  const cplx ee = std::exp(e);
  cplx p = 0.5 * ee / gampl;
  cplx q = 0.5 / (ee * gammi);
  cplx c(1.0);
  const cplx zz4 = half_z * half_z;
  cplx sum1 = p;
  int i = 1;
  for (; i <= kMaxIter; ++i) {
    ff = (static_cast<double>(i) * ff + p + q) /
         (static_cast<double>(i) * i - mu2);
    c *= zz4 / static_cast<double>(i);
    p /= (i - mu);
    q /= (i + mu);
    const cplx del = c * ff;
    sum += del;
    sum1 += c * (p - static_cast<double>(i) * ff);
    if (std::abs(del) < std::abs(sum) * kEps) break;
  }
  if (i > kMaxIter) throw NumericError("bessel_k: Temme series did not converge");
  return {sum, sum1 * (2.0 / z), 0.0};
}

// Steed's CF2 for K_mu, K_{mu+1}; |mu| <= 1/2, |z| > 2, Re z > 0.
// Values carry scale exp(-Re z); the oscillatory exp(-i Im z) is folded in.
KPair cf2(double mu, cplx z) {
  const double mu2 = mu * mu;
  const double a1 = 0.25 - mu2;
  cplx b = 2.0 * (1.0 + z);
  cplx d = 1.0 / b;
  cplx delh = d;
  cplx h = delh;
  cplx q1(0.0), q2(1.0);
  cplx q(a1), c(a1);
  double a = -a1;
  cplx s = 1.0 + q * delh;
  int i = 2;
  for (; i <= kMaxIter; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / static_cast<double>(i);
    const cplx qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const cplx dels = q * delh;
    s += dels;
    if (std::abs(dels) < std::abs(s) * kEps) break;
  }
  if (i > kMaxIter) throw NumericError("bessel_k: CF2 did not converge");
  h = a1 * h;
  const cplx kmu =
      std::sqrt(kPi / (2.0 * z)) / s * std::exp(cplx(0.0, -z.imag()));
  const cplx kmu1 = kmu * (mu + z + 0.5 - h) / z;
  return {kmu, kmu1, -z.real()};
}

KPair bessel_k_core(double nu, cplx z) {
  nu = std::abs(nu);
  if (!(z.real() > 0.0))
    throw ParameterError("bessel_k requires Re(z) > 0");
  const int n = static_cast<int>(std::floor(nu + 0.5));
  const double mu = nu - n;  // |mu| <= 1/2
  KPair pair = (std::abs(z) <= 2.0) ? temme_series(mu, z) : cf2(mu, z);
  cplx km = pair.k_mu;
  cplx k1 = pair.k_mu1;
  double scale = pair.log_scale;
  for (int j = 1; j <= n; ++j) {
    const cplx k2 = km + (2.0 * (mu + j) / z) * k1;
    km = k1;
    k1 = k2;
    const double m = std::abs(k1.real()) + std::abs(k1.imag());
    if (m > 1e250) {
      km *= 1e-250;
      k1 *= 1e-250;
      scale += 575.646273248511421004;  // log(1e250)
    }
  }
  return {km, k1, scale};
}

}  // namespace

std::complex<double> bessel_k(double nu, std::complex<double> z) {
  const KPair p = bessel_k_core(nu, z);
  return p.k_mu * std::exp(p.log_scale);
}

std::complex<double> bessel_k_scaled(double nu, std::complex<double> z) {
  const KPair p = bessel_k_core(nu, z);
  return p.k_mu * std::exp(cplx(p.log_scale) + z);
}

std::complex<double> log_bessel_k(double nu, std::complex<double> z) {
  const KPair p = bessel_k_core(nu, z);
  return std::log(p.k_mu) + p.log_scale;
}

double bessel_k(double nu, double x) {
  return bessel_k(nu, cplx(x, 0.0)).real();
}

double bessel_k_scaled(double nu, double x) {
  return bessel_k_scaled(nu, cplx(x, 0.0)).real();
}

double log_bessel_k(double nu, double x) {
  return log_bessel_k(nu, cplx(x, 0.0)).real();
}

// Trapezoidal sum of e^{-z cosh t} cosh(nu t) over t >= 0, written as
// (e^{g+} + e^{g-})/2 with g± = -z cosh t ± nu t and a common magnitude
// shift so nothing overflows. Step 0.04 is far below the accuracy limit of
// the double-exponential decay; this is a test oracle, not a hot path.
std::complex<double> bessel_k_integral(double nu, std::complex<double> z) {
  if (!(z.real() > 0.0))
    throw ParameterError("bessel_k_integral requires Re(z) > 0");
  nu = std::abs(nu);
  const double h = 0.04;
  const double t_peak = std::asinh(nu / z.real());
  double peak = -z.real();
  for (double t = 0.0; t < t_peak + 3.0; t += h)
    peak = std::max(peak, -z.real() * std::cosh(t) + nu * t);
  cplx sum(0.0);
  for (int k = 0; k < 200000; ++k) {
    const double t = k * h;
    const double ct = std::cosh(t);
    const double re_plus = -z.real() * ct + nu * t - peak;
    if (re_plus < -45.0 && t > t_peak + 1.0) break;
    const double w = (k == 0) ? 0.5 : 1.0;
    const cplx common = cplx(-z.imag() * ct) * cplx(0.0, 1.0);
    sum += w * 0.5 *
           (std::exp(cplx(re_plus) + common) +
            std::exp(cplx(-z.real() * ct - nu * t - peak) + common));
  }
  return h * sum * std::exp(peak);
}

double log_bessel_k_integral(double nu, double x) {
  if (!(x > 0.0)) throw ParameterError("log_bessel_k_integral requires x > 0");
  nu = std::abs(nu);
  const double h = 0.04;
  const auto g = [&](double t) {
    const double at = nu * t;
    return -x * std::cosh(t) + at + std::log1p(std::exp(-2.0 * at)) - kLog2;
  };
  const double t_peak = std::asinh(nu / x);
  double peak = g(0.0);
  for (double t = 0.0; t < t_peak + 3.0; t += h) peak = std::max(peak, g(t));
  double sum = 0.0;
  for (int k = 0; k < 200000; ++k) {
    const double t = k * h;
    const double gt = g(t) - peak;
    if (gt < -45.0 && t > t_peak + 1.0) break;
    sum += (k == 0 ? 0.5 : 1.0) * std::exp(gt);
  }
  return peak + std::log(h * sum);
}

}  // namespace pcc::math
