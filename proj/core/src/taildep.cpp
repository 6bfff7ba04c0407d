#include "pcc/taildep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "pcc/errors.hpp"
#include "pcc/math/normal.hpp"
#include "pcc/math/parallel.hpp"
#include "pcc/math/quadrature.hpp"
#include "pcc/transform.hpp"

namespace pcc::taildep {

namespace {

constexpr int kChunkRows = 131072;

std::vector<double> clean_sequence(const std::vector<double>& q_sequence) {
  if (q_sequence.empty()) throw ParameterError("empty quantile sequence");
  std::vector<double> q = q_sequence;
  for (double v : q)
    if (!(v > 0.0) || v > 0.5)
      throw ParameterError("quantiles must lie in (0, 0.5]");
  std::sort(q.begin(), q.end(), std::greater<double>());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  return q;
}

// Corner mass of a two-dimensional model by nested quadrature with infinite
// tails: P(Y_0 <= y0, Y_1 <= y1) (or the upper corner mirrored). The outer
// tolerance must sit well above the inner integration noise; abs_floor is
// the absolute accuracy the caller actually needs.
double corner_mass_2d(const model::PccModel& m, double y0, double y1,
                      bool upper, double abs_floor) {
  const double sgn = upper ? 1.0 : -1.0;
  const auto inner = [&](double s0) {
    const double a0 = y0 + sgn * s0;
    const auto f = [&](double s1) {
      Eigen::VectorXd y(2);
      y[0] = a0;
      y[1] = y1 + sgn * s1;
      return m.joint_density_Y(y);
    };
    return math::integrate_to_infinity(f, 0.0, 1e-12, 1e-7).value;
  };
  const auto res = math::integrate_to_infinity(inner, 0.0, 1e-10, 1e-6);
  if (!res.converged && res.error_estimate > abs_floor)
    throw NumericError("corner integration did not converge");
  return res.value;
}

// Exceedance counts for selected column pair on simulated chunks.
double mc_pair_exceedance(const model::PccModel& m, int i, int j, double q,
                          bool upper, int n_sim, std::uint64_t seed) {
  std::int64_t hits = 0;
  int done = 0;
  int chunk_id = 0;
  while (done < n_sim) {
    const int n = std::min(kChunkRows, n_sim - done);
    const auto s = m.simulate(n, seed + static_cast<std::uint64_t>(chunk_id));
    for (int r = 0; r < n; ++r) {
      const bool hi = upper ? (s.u(r, i) >= 1.0 - q) : (s.u(r, i) <= q);
      const bool hj = upper ? (s.u(r, j) >= 1.0 - q) : (s.u(r, j) <= q);
      hits += (hi && hj) ? 1 : 0;
    }
    done += n;
    ++chunk_id;
  }
  return static_cast<double>(hits) / (static_cast<double>(n_sim) * q);
}

Eigen::MatrixXd indicator_cross_counts(const Eigen::MatrixXd& u, double q,
                                       bool upper) {
  const int n = static_cast<int>(u.rows());
  const int d = static_cast<int>(u.cols());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(d, d);
  for (int start = 0; start < n; start += kChunkRows) {
    const int len = std::min(kChunkRows, n - start);
    Eigen::MatrixXd ind(len, d);
    for (int r = 0; r < len; ++r)
      for (int c = 0; c < d; ++c) {
        const double v = u(start + r, c);
        ind(r, c) = (upper ? v >= 1.0 - q : v <= q) ? 1.0 : 0.0;
      }
    counts.noalias() += ind.transpose() * ind;
  }
  return counts;
}

}  // namespace

double extrapolate_eta(const std::vector<double>& q,
                       const std::vector<double>& eta) {
  const int n = static_cast<int>(q.size());
  if (n < 1 || eta.size() != q.size())
    throw ParameterError("extrapolate_eta: matching nonempty sequences required");
  if (n == 1) return std::clamp(eta[0], 0.0, 1.0);
  double sq = 0, se = 0, sqq = 0, sqe = 0;
  for (int k = 0; k < n; ++k) {
    sq += q[k];
    se += eta[k];
    sqq += q[k] * q[k];
    sqe += q[k] * eta[k];
  }
  const double denom = n * sqq - sq * sq;
  if (denom == 0.0) return std::clamp(eta[0], 0.0, 1.0);
  const double intercept = (se * sqq - sq * sqe) / denom;
  return std::clamp(intercept, 0.0, 1.0);
}

TailCoefficients hb_n_tail_coeffs(double alpha1, double beta1, double lambda2) {
  if (!(alpha1 > std::abs(beta1)))
    throw ParameterError("hyperbolic tail rates need alpha > |beta|");
  if (!(lambda2 > 0.0)) throw ParameterError("lambda2 must be positive");
  const double s2 = std::sqrt(lambda2);
  TailCoefficients out;
  out.eta_lower = 2.0 * math::norm_cdf(-(alpha1 + beta1) * s2);
  out.eta_upper = 2.0 * math::norm_cdf(-(alpha1 - beta1) * s2);
  out.method = TailMethod::Analytic;
  return out;
}

std::vector<double> default_q_sequence() { return {0.02, 0.01, 0.005, 0.0025}; }

TailLimitResult numeric_tail_limit(const model::PccModel& m, int i, int j,
                                   const std::vector<double>& q_sequence,
                                   bool upper, int n_sim, std::uint64_t seed) {
  const int d = m.dim();
  if (i < 0 || j < 0 || i >= d || j >= d || i == j)
    throw ParameterError("need two distinct margin indices");
  const std::vector<double> q = clean_sequence(q_sequence);

  TailLimitResult out;
  if (d == 2) {
    out.method = TailMethod::NumericLimit;
    for (double qk : q) {
      try {
        const double ui = upper ? 1.0 - qk : qk;
        const double yi = m.marginal(i).inverse_cdf(ui);
        const double yj = m.marginal(j).inverse_cdf(ui);
        const double mass = corner_mass_2d(m, i == 0 ? yi : yj,
                                           i == 0 ? yj : yi, upper, 1e-4 * qk);
        out.q.push_back(qk);
        out.eta_q.push_back(mass / qk);
      } catch (const NumericError&) {
        out.truncated = true;
      }
    }
  } else {
    if (n_sim < 1000) throw ParameterError("n_sim too small");
    out.method = TailMethod::MonteCarlo;
    for (double qk : q) {
      out.q.push_back(qk);
      out.eta_q.push_back(mc_pair_exceedance(m, i, j, qk, upper, n_sim, seed));
    }
  }
  if (out.q.empty())
    throw NumericError("no quantile in the sequence could be evaluated");
  out.eta = extrapolate_eta(out.q, out.eta_q);
  return out;
}

TailLimitResult hb_n_pair_tail_limit(double alpha1, double beta1, double chi1,
                                     double sigma2,
                                     const std::vector<double>& q_sequence,
                                     bool upper) {
  if (!(alpha1 > std::abs(beta1)))
    throw ParameterError("hyperbolic tail rates need alpha > |beta|");
  if (!(chi1 > 0.0) || !(sigma2 > 0.0))
    throw ParameterError("chi1 and sigma2 must be positive");
  const std::vector<double> q = clean_sequence(q_sequence);

  dist::HyperbolicParams p1(alpha1, beta1, chi1, 0.0);
  p1.mu = -dist::hyperbolic_moments(p1).mean;

  // Y1 = (P1 + P2)/sqrt(2): phi(t) = phi_P1(t/sqrt 2) exp(-sigma2^2 t^2 / 4).
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const transform::CharFn cf = [&](double t) {
    return dist::hyperbolic_cf(t * inv_sqrt2, p1) *
           std::exp(-0.25 * sigma2 * sigma2 * t * t);
  };

  const auto quantile = [&](double prob) {
    // expanding bracket + bisection on the Gil-Pelaez CDF
    double lo = -1.0, hi = 1.0;
    int guard = 0;
    while (transform::gil_pelaez_cdf(cf, lo) > prob) {
      lo *= 2.0;
      if (++guard > 60) throw NumericError("quantile bracket failed (low)");
    }
    guard = 0;
    while (transform::gil_pelaez_cdf(cf, hi) < prob) {
      hi *= 2.0;
      if (++guard > 60) throw NumericError("quantile bracket failed (high)");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, std::abs(lo));
         ++it) {
      const double mid = 0.5 * (lo + hi);
      (transform::gil_pelaez_cdf(cf, mid) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  TailLimitResult out;
  out.method = TailMethod::NumericLimit;
  const double sqrt2 = std::sqrt(2.0);
  for (double qk : q) {
    try {
      const double yq = quantile(upper ? 1.0 - qk : qk);
      // corner mass = int_0^inf f_P1(sqrt2 yq -/+ s) (2 Phi(s/sigma2) - 1) ds
      const auto f = [&](double s) {
        const double p = upper ? sqrt2 * yq + s : sqrt2 * yq - s;
        return dist::hyperbolic_pdf(p, p1) *
               (2.0 * math::norm_cdf(s / sigma2) - 1.0);
      };
      const auto res =
          math::integrate_to_infinity(f, 0.0, 1e-13, 1e-9, sigma2);
      if (!res.converged)
        throw NumericError("corner integration did not converge");
      out.q.push_back(qk);
      out.eta_q.push_back(res.value / qk);
    } catch (const NumericError&) {
      out.truncated = true;
    }
  }
  if (out.q.empty())
    throw NumericError("no quantile in the sequence could be evaluated");
  out.eta = extrapolate_eta(out.q, out.eta_q);
  return out;
}

CpjqeEstimate mc_cpjqe(const model::CopulaSample& sample, double q) {
  if (!(q > 0.0) || q > 0.5) throw ParameterError("q must lie in (0, 0.5]");
  sample.validate();
  const int n = sample.n();
  CpjqeEstimate out;
  out.n_used = n;
  out.reliable = n * q >= 10.0;
  out.eta = indicator_cross_counts(sample.u, q, false) / (n * q);
  return out;
}

CpjqeEstimate mc_cpjqe(const model::PccModel& m, double q, int n_sim,
                       std::uint64_t seed) {
  if (!(q > 0.0) || q > 0.5) throw ParameterError("q must lie in (0, 0.5]");
  if (n_sim < 1000) throw ParameterError("n_sim too small");
  const int d = m.dim();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(d, d);
  int done = 0;
  int chunk_id = 0;
  while (done < n_sim) {
    const int len = std::min(kChunkRows, n_sim - done);
    const auto s = m.simulate(len, seed + static_cast<std::uint64_t>(chunk_id));
    counts += indicator_cross_counts(s.u, q, false);
    done += len;
    ++chunk_id;
  }
  CpjqeEstimate out;
  out.n_used = n_sim;
  out.reliable = n_sim * q >= 10.0;
  out.eta = counts / (static_cast<double>(n_sim) * q);
  return out;
}

}  // namespace pcc::taildep
