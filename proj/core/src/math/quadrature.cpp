#include "pcc/math/quadrature.hpp"

#include <cmath>

#include "pcc/errors.hpp"

namespace pcc::math {

namespace {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss
// rule (positive half; symmetric).
constexpr double kKronrodNode[8] = {
    0.000000000000000000000000000000000, 0.207784955007898467600689403773245,
    0.405845151377397166906606412076961, 0.586087235467691130294144838258730,
    0.741531185599394439863864773280788, 0.864864423359769072789712788640926,
    0.949107912342758524526189684047851, 0.991455371120812639206854697526329};
constexpr double kKronrodWeight[8] = {
    0.209482141084727828012999174891714, 0.204432940075298892414161999234649,
    0.190350578064785409913256402421014, 0.169004726639267902826583426598550,
    0.140653259715525918745189590510238, 0.104790010322250183839876322541518,
    0.063092092629978553290700663189204, 0.022935322010529224963732008058970};
constexpr double kGaussWeight[4] = {
    0.417959183673469387755102040816327, 0.381830050505118944950369775488975,
    0.279705391489276667901467771423780, 0.129484966168869693270611432679082};

struct PanelResult {
  double kronrod;
  double gauss;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double f0 = f(c);
  double kron = kKronrodWeight[0] * f0;
  double gauss = kGaussWeight[0] * f0;
  for (int i = 1; i < 8; ++i) {
    const double dx = h * kKronrodNode[i];
    const double s = f(c - dx) + f(c + dx);
    kron += kKronrodWeight[i] * s;
    if (i % 2 == 0) gauss += kGaussWeight[i / 2] * s;
  }
  return {kron * h, gauss * h};
}

void adapt(const std::function<double(double)>& f, double a, double b,
           double tol, int depth, int max_depth, QuadratureResult& out) {
  const PanelResult p = gk15(f, a, b);
  out.evaluations += 15;
  const double err = std::abs(p.kronrod - p.gauss);
  if (err <= tol || depth >= max_depth) {
    out.value += p.kronrod;
    out.error_estimate += err;
    if (depth >= max_depth && err > tol) out.converged = false;
    return;
  }
  const double m = 0.5 * (a + b);
  adapt(f, a, m, 0.5 * tol, depth + 1, max_depth, out);
  adapt(f, m, b, 0.5 * tol, depth + 1, max_depth, out);
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol, double rel_tol,
                           int max_depth) {
  if (!(b > a)) throw ParameterError("integrate requires b > a");
  QuadratureResult out;
  out.converged = true;
  // First pass to size the relative tolerance.
  const PanelResult whole = gk15(f, a, b);
  const double tol =
      std::max(abs_tol, rel_tol * std::abs(whole.kronrod));
  adapt(f, a, b, tol, 0, max_depth, out);
  return out;
}

QuadratureResult integrate_to_infinity(const std::function<double(double)>& f,
                                       double a, double abs_tol,
                                       double rel_tol, double first_segment,
                                       int max_segments) {
  QuadratureResult total;
  total.converged = true;
  double lo = a;
  double len = first_segment;
  int quiet = 0;
  for (int s = 0; s < max_segments; ++s) {
    const QuadratureResult part =
        integrate(f, lo, lo + len, abs_tol, rel_tol);
    total.value += part.value;
    total.error_estimate += part.error_estimate;
    total.evaluations += part.evaluations;
    total.converged = total.converged && part.converged;
    const double scale = std::max(1.0, std::abs(total.value));
    if (std::abs(part.value) < std::max(abs_tol, rel_tol * scale))
      ++quiet;
    else
      quiet = 0;
    if (quiet >= 2) return total;
    lo += len;
    len *= 2.0;
  }
  total.converged = false;
  return total;
}

}  // namespace pcc::math
