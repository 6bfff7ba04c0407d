#pragma once

#include <functional>

namespace pcc::math {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod (G7,K15) on [a, b].
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol = 1e-12,
                           double rel_tol = 1e-10, int max_depth = 30);

// Integral over [a, inf): successive unit-doubling segments until two
// consecutive segments contribute less than the tolerance.
QuadratureResult integrate_to_infinity(const std::function<double(double)>& f,
                                       double a, double abs_tol = 1e-12,
                                       double rel_tol = 1e-10,
                                       double first_segment = 1.0,
                                       int max_segments = 60);

}  // namespace pcc::math
