#pragma once

#include <Eigen/Core>
#include <functional>

namespace pcc::math {

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

// Derivative-free Nelder-Mead simplex minimizer. `step` sets the initial
// simplex edge per coordinate; restarts rebuild a fresh simplex around the
// incumbent best with halved steps.
OptimResult nelder_mead(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                        const Eigen::VectorXd& step, double f_tol = 1e-9,
                        int max_evaluations = 4000, int restarts = 1);

// Quasi-Newton (BFGS) with central-difference gradients and Armijo
// backtracking; for smooth low-dimensional objectives.
OptimResult bfgs_numeric(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                         double grad_tol = 1e-7, int max_iterations = 300);

}  // namespace pcc::math
