#pragma once

namespace pcc::math {

// Regularized lower incomplete gamma P(a, x) = gamma(a,x)/Gamma(a).
double gamma_p(double a, double x);

// Upper tail Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

// Chi-square upper-tail probability with k degrees of freedom.
double chi2_sf(double x, double k);

// log of the binomial pmf  C(n,k) p^k (1-p)^{n-k}.
double log_binomial_pmf(int n, int k, double p);

// One-sided exact binomial tail P[Bin(n, p) >= k], accumulated in log space.
double binomial_tail_geq(int n, int k, double p);

}  // namespace pcc::math
