#pragma once

#include <complex>

namespace pcc::math {

// Modified Bessel function of the second kind K_nu(z) for real order nu and
// complex argument with Re(z) > 0. Order is symmetric: K_{-nu} = K_nu.
//
// Implementation: Temme's series for |z| <= 2, Steed's continued fraction
// (CF2) for |z| > 2, then upward recurrence in the order. Both branches are
// carried with a running scale so intermediate overflow cannot occur; the
// endpoint functions below expose the value in the form each caller needs.

// K_nu(z). Overflows to inf honestly when the true value exceeds double range.
std::complex<double> bessel_k(double nu, std::complex<double> z);

// e^z K_nu(z); bounded for large |z|, use in characteristic-function ratios.
std::complex<double> bessel_k_scaled(double nu, std::complex<double> z);

// log K_nu(z). The imaginary part is reduced modulo 2*pi (exponentiating
// reproduces K exactly; do not difference branches across calls).
std::complex<double> log_bessel_k(double nu, std::complex<double> z);

// Real-argument conveniences (x > 0).
double bessel_k(double nu, double x);
double bessel_k_scaled(double nu, double x);
double log_bessel_k(double nu, double x);

// Quadrature oracle: trapezoidal evaluation of the integral representation
//   K_nu(z) = \int_0^inf exp(-z cosh t) cosh(nu t) dt,  Re z > 0.
// Slow but independent of the series/CF code paths; used by tests.
std::complex<double> bessel_k_integral(double nu, std::complex<double> z);
double log_bessel_k_integral(double nu, double x);

}  // namespace pcc::math
