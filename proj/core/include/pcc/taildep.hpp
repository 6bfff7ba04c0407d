#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "pcc/model.hpp"

namespace pcc::taildep {

enum class TailMethod { Analytic, NumericLimit, MonteCarlo };

struct TailCoefficients {
  double eta_lower = 0.0;
  double eta_upper = 0.0;
  TailMethod method = TailMethod::Analytic;
};

// Tail dependence of the two-dimensional hyperbolic-normal copula: the
// exponential tail rates of the first generator against the Gaussian spread
// of the second give
//   eta_l = 2 Phi(-(alpha1 + beta1) sqrt(lambda2)),
//   eta_u = 2 Phi(-(alpha1 - beta1) sqrt(lambda2)).
TailCoefficients hb_n_tail_coeffs(double alpha1, double beta1, double lambda2);

struct TailLimitResult {
  std::vector<double> q;      // quantiles that evaluated successfully
  std::vector<double> eta_q;  // C(q,q)/q, or the upper-corner analog
  double eta = 0.0;           // linear-in-q extrapolation to q = 0
  bool truncated = false;     // part of the requested sequence failed
  TailMethod method = TailMethod::NumericLimit;
};

// {0.02, 0.01, 0.005, 0.0025}
std::vector<double> default_q_sequence();

// Least-squares line through (q, eta_q); the intercept, clamped to [0,1],
// is the q -> 0 limit. A single point returns its own value.
double extrapolate_eta(const std::vector<double>& q,
                       const std::vector<double>& eta_q);

// Conditional exceedance eta_q = P(U_i <= q | U_j <= q) along a decreasing
// quantile sequence, extrapolated linearly in q to the limit. Two-dimensional
// models integrate the joint density over the corner; higher-dimensional
// pairs fall back to counting on a fresh simulation of n_sim rows. Quantiles
// that fail to integrate are dropped and flagged. upper = true measures the
// upper corner P(U > 1-q) instead.
TailLimitResult numeric_tail_limit(
    const model::PccModel& m, int i, int j,
    const std::vector<double>& q_sequence = default_q_sequence(),
    bool upper = false, int n_sim = 1000000, std::uint64_t seed = 1);

// Tail limit of the raw two-generator pair Y1 = (P1 + P2)/sqrt(2),
// Y2 = (P1 - P2)/sqrt(2) with P1 hyperbolic (centered; chi1 is free because
// the limit does not depend on it) and P2 ~ N(0, sigma2^2). One-dimensional
// generator-space quadrature with root-solved marginal quantiles. Covers
// tail-rate regimes whose variance-matched copula would be infeasible.
TailLimitResult hb_n_pair_tail_limit(
    double alpha1, double beta1, double chi1, double sigma2,
    const std::vector<double>& q_sequence = default_q_sequence(),
    bool upper = false);

struct CpjqeEstimate {
  Eigen::MatrixXd eta;   // d x d, exactly symmetric
  int n_used = 0;
  bool reliable = true;  // n q >= 10
};

// Conditional probability of joint quantile exceedance,
// eta_q[i][j] = (1/(n q)) sum_t 1{u_{t,i} <= q, u_{t,j} <= q}.
CpjqeEstimate mc_cpjqe(const model::CopulaSample& sample, double q);
// Same estimator on a fresh simulation of the model.
CpjqeEstimate mc_cpjqe(const model::PccModel& m, double q, int n_sim = 1000000,
                       std::uint64_t seed = 1);

}  // namespace pcc::taildep
