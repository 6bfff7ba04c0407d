#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace pcc::dist {

// ---------------------------------------------------------------------------
// Univariate hyperbolic distribution with density
//   f(x) = sqrt(psi/chi) / (2 alpha K_1(sqrt(chi psi)))
//          * exp(-alpha sqrt(chi + (x-mu)^2) + beta (x-mu)),
// psi = alpha^2 - beta^2. alpha + beta governs the lower tail rate,
// alpha - beta the upper.
// ---------------------------------------------------------------------------
struct HyperbolicParams {
  double alpha = 1.0;
  double beta = 0.0;
  double chi = 1.0;
  double mu = 0.0;

  HyperbolicParams() = default;
  HyperbolicParams(double alpha_in, double beta_in, double chi_in,
                   double mu_in);
  double psi() const { return alpha * alpha - beta * beta; }
};

double hyperbolic_log_pdf(double x, const HyperbolicParams& p);
double hyperbolic_pdf(double x, const HyperbolicParams& p);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Analytic mean/variance through the GIG(1, chi, psi) mixing moments.
Moments hyperbolic_moments(const HyperbolicParams& p);

// Chooses chi and mu so the distribution has mean 0 and variance target_var.
// The attainable variance range for fixed (alpha, beta) is bounded below by
// the chi -> 0 limit; targets outside it raise NumericError (the bisection
// cannot bracket). Bisection runs on log chi over [1e-8, 1e8], rel tol 1e-12.
HyperbolicParams hyperbolic_match_moments(double alpha, double beta,
                                          double target_var);

std::complex<double> hyperbolic_cf(double t, const HyperbolicParams& p);

// ---------------------------------------------------------------------------
// Multivariate generalized hyperbolic characteristic function
//   phi(t) = e^{i t'mu} (psi / w(t))^{lambda/2}
//            K_lambda(sqrt(chi w(t))) / K_lambda(sqrt(chi psi)),
//   w(t) = psi + t' Sigma t - 2 i t' gamma.
// ---------------------------------------------------------------------------
struct GhParams {
  double lambda = 1.0;
  double chi = 1.0;
  double psi = 1.0;
  Eigen::VectorXd mu;
  Eigen::VectorXd gamma;
  Eigen::MatrixXd sigma;

  void validate() const;
};

std::complex<double> gh_cf(const Eigen::VectorXd& t, const GhParams& p);

// ---------------------------------------------------------------------------
// Skew-t limit of the GH family: lambda = -nu/2, chi = nu, psi -> 0,
// implemented in its exact limiting form (no epsilon stand-in):
//   phi(t) = e^{i t'mu} 2^{1-nu/2}/Gamma(nu/2) (nu w)^{nu/4}
//            K_{nu/2}(sqrt(nu w)),  w = t' Sigma t - 2 i t' gamma.
// Dispersion is diagonal here; groups built from eigenvalues never need more.
// gamma = 0 gives the symmetric Student t.
// ---------------------------------------------------------------------------
struct SkewTParams {
  double nu = 10.0;
  Eigen::VectorXd mu;          // location per coordinate
  Eigen::VectorXd gamma;       // skewness per coordinate
  Eigen::VectorXd sigma_diag;  // diagonal of the dispersion matrix

  void validate() const;
  int dim() const { return static_cast<int>(sigma_diag.size()); }
};

std::complex<double> skew_t_cf(const Eigen::VectorXd& t, const SkewTParams& p);
double skew_t_log_pdf(const Eigen::VectorXd& x, const SkewTParams& p);

// Scalar skew-t generator with mean zero and variance lambda_var:
//   mu1 = -nu gamma1 / (nu - 2),
//   sigma11 = (nu-2)/nu lambda_var - 2 nu gamma1^2 / ((nu-2)(nu-4)).
// Requires nu > 4 when gamma1 != 0 (nu > 2 otherwise); sigma11 <= 0 raises
// FeasibilityError (gamma1 too large for the eigenvalue and dof).
struct SkewT1Params {
  double nu = 10.0;
  double lambda_var = 1.0;
  double gamma1 = 0.0;
  double mu1 = 0.0;      // derived
  double sigma11 = 1.0;  // derived
};

SkewT1Params skew_t1_match_moments(double nu, double gamma1, double lambda_var);

// ---------------------------------------------------------------------------
// Generator group structure. Groups partition the principal-component indices
// {0, ..., d-1}; each group is mutually independent of the others. Within a
// skew_t / t group all coordinates share one inverse-gamma mixing variable;
// skewness (gamma1) attaches to the group's first index only.
// ---------------------------------------------------------------------------
enum class GeneratorFamily { Normal, Hyperbolic, SkewT, StudentT };

enum class CommonTail { None, EqualDof, EqualTail };

struct GeneratorGroup {
  GeneratorFamily family = GeneratorFamily::Normal;
  std::vector<int> indices;
  double alpha = 0.0;   // hyperbolic
  double beta = 0.0;    // hyperbolic
  double nu = 0.0;      // skew_t / t degrees of freedom
  double gamma1 = 0.0;  // skew_t skewness on the group's first index
};

struct GroupSpec {
  std::vector<GeneratorGroup> groups;
  CommonTail common_tail = CommonTail::None;

  // Throws ParameterError unless groups partition [0, d) with valid family
  // parameters (alpha > |beta|; nu > 2, and > 4 where skewness is present;
  // hyperbolic groups are scalar).
  void validate(int d) const;

  // All-normal generators: the exact Gaussian copula.
  static GroupSpec gauss(int d);
  // One joint t group over all components (the t_d copula).
  static GroupSpec student_t(int d, double nu);
  // One joint skew-t group, skewness on the first principal component
  // (the skew-t_d copula with skewness vector aligned to w_1).
  static GroupSpec skew_t_market(int d, double nu, double gamma1);
  // Leading hyperbolic generators, remaining ones normal (HB-N).
  static GroupSpec hyperbolic_normal(
      int d, const std::vector<std::pair<double, double>>& alpha_beta);
  // Scalar skew-t first generator; each higher generator its own scalar t.
  static GroupSpec skew_t1_t1(int d, double nu1, double gamma1,
                              double nu_higher);
  // Scalar skew-t first generator; higher generators one joint t group.
  static GroupSpec skew_t1_t_rest(int d, double nu1, double gamma1,
                                  double nu_higher);
};

// Applies the common-tail linkage: given the shared dof parameter, returns
// {nu1, nu_higher}. EqualDof: nu1 = nu. EqualTail: nu1 = 2 nu, so the skew-t
// generator's heavy-tail index nu1/2 matches the t generators' index nu.
std::pair<double, double> linked_dofs(CommonTail link, double nu);

// ---------------------------------------------------------------------------
// A group with its moment matching resolved against the eigenvalues: every
// coordinate of P has mean 0 and variance lambda_j. Build once, evaluate many.
// ---------------------------------------------------------------------------
struct PreparedGroup {
  GeneratorFamily family = GeneratorFamily::Normal;
  std::vector<int> indices;
  Eigen::VectorXd sd;  // Normal: per-coordinate standard deviations
  HyperbolicParams hb; // Hyperbolic (always scalar)
  SkewTParams st;      // SkewT / StudentT (gamma = 0 for the latter)
};

PreparedGroup prepare_group(const GeneratorGroup& g,
                            const Eigen::VectorXd& lambda);
std::vector<PreparedGroup> prepare_groups(const GroupSpec& spec,
                                          const Eigen::VectorXd& lambda);

// Joint CF / log density of the group's generator block. Arguments follow the
// order of pg.indices.
std::complex<double> group_cf(const PreparedGroup& pg,
                              const Eigen::VectorXd& s);
double group_log_pdf(const PreparedGroup& pg, const Eigen::VectorXd& p);

// Count of free shape parameters the family contributes under a fit
// (Normal 0; Hyperbolic 2; scalar/joint t 1; skew-t 2), used by the
// information criteria. Linked tails are accounted for by the caller.
int group_shape_param_count(const GeneratorGroup& g);

// Draws n rows of the d generator variables P (columns follow PC indices).
// var(P_j) = lambda_j via moment matching per family. Deterministic for a
// fixed seed; row blocks use derived streams so results do not depend on the
// thread count.
Eigen::MatrixXd sample_generators(const GroupSpec& spec,
                                  const Eigen::VectorXd& lambda, int n,
                                  std::uint64_t seed);

}  // namespace pcc::dist
