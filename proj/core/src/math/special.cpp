#include "pcc/math/special.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "pcc/errors.hpp"

namespace pcc::math {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Series expansion of P(a,x), reliable for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 600; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericError("gamma_p: series did not converge");
}

// Lentz continued fraction for Q(a,x), reliable for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 600; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NumericError("gamma_q: continued fraction did not converge");
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw ParameterError("gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw ParameterError("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, double k) {
  if (!(k > 0.0)) throw ParameterError("chi2_sf: need k > 0");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * k, 0.5 * x);
}

double log_binomial_pmf(int n, int k, double p) {
  if (n < 0 || k < 0 || k > n) throw ParameterError("log_binomial_pmf: bad n/k");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("log_binomial_pmf: bad p");
  if (p == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p == 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
  const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                            std::lgamma(n - k + 1.0);
  return log_choose + k * std::log(p) + (n - k) * std::log1p(-p);
}

double binomial_tail_geq(int n, int k, double p) {
  if (n < 0 || k < 0) throw ParameterError("binomial_tail_geq: bad n/k");
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  // Sum pmf from k to n in log space anchored at the largest term.
  std::vector<double> logs;
  logs.reserve(n - k + 1);
  double peak = -std::numeric_limits<double>::infinity();
  for (int j = k; j <= n; ++j) {
    const double lp = log_binomial_pmf(n, j, p);
    logs.push_back(lp);
    peak = std::max(peak, lp);
    // Terms decay fast beyond the mode; stop once negligible.
    if (lp < peak - 60.0 && j > n * p + k) break;
  }
  double sum = 0.0;
  for (const double lp : logs) sum += std::exp(lp - peak);
  const double tail = std::exp(peak) * sum;
  return std::min(1.0, tail);
}

}  // namespace pcc::math
