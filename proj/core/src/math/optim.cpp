#include "pcc/math/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pcc/errors.hpp"

namespace pcc::math {

namespace {

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;

  void sort() {
    std::vector<std::size_t> idx(f.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    std::vector<Eigen::VectorXd> xs(x.size());
    std::vector<double> fs(f.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      xs[i] = x[idx[i]];
      fs[i] = f[idx[i]];
    }
    x.swap(xs);
    f.swap(fs);
  }
};

OptimResult nelder_mead_once(const ObjectiveFn& fn, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& step, double f_tol,
                             int max_evaluations) {
  const int n = static_cast<int>(x0.size());
  Simplex s;
  s.x.resize(n + 1);
  s.f.resize(n + 1);
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& p) {
    ++evals;
    const double v = fn(p);
    return std::isfinite(v) ? v : 1e300;
  };
  s.x[0] = x0;
  s.f[0] = eval(x0);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p = x0;
    p[i] += (step[i] != 0.0 ? step[i] : 0.1);
    s.x[i + 1] = p;
    s.f[i + 1] = eval(p);
  }
  bool converged = false;
  while (evals < max_evaluations) {
    s.sort();
    const double spread = std::abs(s.f[n] - s.f[0]);
    if (spread <= f_tol * (std::abs(s.f[0]) + f_tol) + f_tol) {
      converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += s.x[i];
    centroid /= n;
    const Eigen::VectorXd reflected = centroid + (centroid - s.x[n]);
    const double fr = eval(reflected);
    if (fr < s.f[0]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - s.x[n]);
      const double fe = eval(expanded);
      if (fe < fr) {
        s.x[n] = expanded;
        s.f[n] = fe;
      } else {
        s.x[n] = reflected;
        s.f[n] = fr;
      }
    } else if (fr < s.f[n - 1]) {
      s.x[n] = reflected;
      s.f[n] = fr;
    } else {
      const Eigen::VectorXd contracted =
          centroid + 0.5 * (s.x[n] - centroid);
      const double fc = eval(contracted);
      if (fc < s.f[n]) {
        s.x[n] = contracted;
        s.f[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          s.x[i] = s.x[0] + 0.5 * (s.x[i] - s.x[0]);
          s.f[i] = eval(s.x[i]);
        }
      }
    }
  }
  s.sort();
  return {s.x[0], s.f[0], evals, converged};
}

}  // namespace

OptimResult nelder_mead(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                        const Eigen::VectorXd& step, double f_tol,
                        int max_evaluations, int restarts) {
  if (x0.size() == 0) throw ParameterError("nelder_mead: empty start point");
  if (step.size() != x0.size())
    throw ParameterError("nelder_mead: step size mismatch");
  OptimResult best = nelder_mead_once(f, x0, step, f_tol, max_evaluations);
  for (int r = 0; r < restarts; ++r) {
    const Eigen::VectorXd shrunk = step * std::pow(0.5, r + 1);
    OptimResult next =
        nelder_mead_once(f, best.x, shrunk, f_tol, max_evaluations);
    next.evaluations += best.evaluations;
    if (next.value <= best.value) {
      best = next;
    } else {
      best.evaluations = next.evaluations;
    }
  }
  return best;
}

OptimResult bfgs_numeric(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                         double grad_tol, int max_iterations) {
  const int n = static_cast<int>(x0.size());
  if (n == 0) throw ParameterError("bfgs_numeric: empty start point");
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& p) {
    ++evals;
    const double v = f(p);
    return std::isfinite(v) ? v : 1e300;
  };
  auto grad = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(p[i]));
      Eigen::VectorXd hi = p, lo = p;
      hi[i] += h;
      lo[i] -= h;
      g[i] = (eval(hi) - eval(lo)) / (2.0 * h);
    }
    return g;
  };
  Eigen::VectorXd x = x0;
  double fx = eval(x);
  Eigen::VectorXd g = grad(x);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool converged = false;
  for (int it = 0; it < max_iterations; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < grad_tol) {
      converged = true;
      break;
    }
    Eigen::VectorXd dir = -H * g;
    if (dir.dot(g) >= 0.0) {
      H.setIdentity();
      dir = -g;
    }
    double t = 1.0;
    const double slope = g.dot(dir);
    double f_new = fx;
    Eigen::VectorXd x_new = x;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + t * dir;
      f_new = eval(x_new);
      if (f_new <= fx + 1e-4 * t * slope) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      converged = g.lpNorm<Eigen::Infinity>() < 1e2 * grad_tol;
      break;
    }
    const Eigen::VectorXd g_new = grad(x_new);
    const Eigen::VectorXd sk = x_new - x;
    const Eigen::VectorXd yk = g_new - g;
    const double sy = sk.dot(yk);
    if (sy > 1e-12 * sk.norm() * yk.norm()) {
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      const Eigen::MatrixXd V = I - (sk * yk.transpose()) / sy;
      H = V * H * V.transpose() + (sk * sk.transpose()) / sy;
    }
    x = x_new;
    fx = f_new;
    g = g_new;
    if (sk.lpNorm<Eigen::Infinity>() <
        1e-12 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
      converged = true;
      break;
    }
  }
  return {x, fx, evals, converged};
}

}  // namespace pcc::math
