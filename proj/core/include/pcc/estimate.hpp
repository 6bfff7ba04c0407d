#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pcc/model.hpp"

namespace pcc::estimate {

// ---------------------------------------------------------------------------
// Fit configuration shared by MLE and the hybrid GMM iteration.
// ---------------------------------------------------------------------------
struct FitConfig {
  int max_iterations = 10;      // n_r in the hybrid iteration
  double corr_tol = 1e-4;       // Frobenius tolerance on consecutive rho
  double shape_tol = 1e-4;      // max-abs tolerance on consecutive shape
  int max_evals = 400;          // inner optimizer budget per call
  double f_tol = 1e-8;          // simplex spread tolerance
  int table_grid = 1024;        // marginal grid while optimizing
  int final_table_grid = 4096;  // marginal grid of the returned model
  int n_boot = 100;
  bool keep_trace = true;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double corr_delta = 0.0;   // Frobenius change of rho
  double shape_delta = 0.0;  // max-abs change of the shape vector
  std::vector<double> shape;
  double loglik = 0.0;
};

struct FitResult {
  model::PccModel fitted;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int n_obs = 0;
  int n_shape_params = 0;
  int iterations = 0;
  bool converged = false;
  int clipped_rows = 0;
  std::vector<std::string> shape_names;
  std::vector<double> shape;
  std::vector<IterationRecord> trace;
};

// ---------------------------------------------------------------------------
// Shape-parameter vector of a group spec. Order: (alpha_g, beta_g) for each
// hyperbolic group; then per skew-t group nu (only when unlinked or no t
// groups exist) and gamma1; then one shared nu for all t groups. All t groups
// must carry the same dof. Linked tails (CommonTail != None) derive the
// skew-t dof from the shared t dof and drop it from the vector.
// ---------------------------------------------------------------------------
std::vector<std::string> shape_names(const dist::GroupSpec& spec);
std::vector<double> extract_shape(const dist::GroupSpec& spec);
dist::GroupSpec inject_shape(const dist::GroupSpec& base,
                             const std::vector<double>& shape);

// ---------------------------------------------------------------------------
// rank transform and normal-scores initialization
// ---------------------------------------------------------------------------

// U_{i,t} = rank(X_{i,t}) / (n+1), ties by average rank. A constant column
// has no rank information and raises DataError.
model::CopulaSample ranks_to_pseudo_obs(const Eigen::MatrixXd& x);

struct InitScores {
  Eigen::MatrixXd rho;      // PSD-projected normal-scores correlation
  model::EigenDecomp eig;
};
InitScores init_normal_scores(const model::CopulaSample& u);

// ---------------------------------------------------------------------------
// Structured correlation parameterizations for the full MLE.
// ---------------------------------------------------------------------------
class CorrelationModel {
 public:
  enum class Kind { Fixed, Equicorrelation, TwoFactor, FreeLowerTriangle };

  static CorrelationModel fixed(const Eigen::MatrixXd& rho);
  static CorrelationModel equicorrelation(int d);
  // rho_ij = xi_i xi_j + gamma_i gamma_j off the diagonal.
  static CorrelationModel two_factor(int d);
  static CorrelationModel free_lower_triangle(int d);

  Kind kind() const { return kind_; }
  int dim() const { return d_; }
  int n_params() const;
  // Builds a valid correlation matrix from unconstrained parameters
  // (bounded transforms plus PSD projection).
  Eigen::MatrixXd build(const Eigen::VectorXd& theta) const;
  // Starting parameters reproducing rho0 as closely as the structure allows.
  Eigen::VectorXd initial_theta(const Eigen::MatrixXd& rho0) const;
  std::vector<std::string> param_names() const;

 private:
  Kind kind_ = Kind::Fixed;
  int d_ = 0;
  Eigen::MatrixXd fixed_;
};

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

// Full MLE: maximizes the copula log-likelihood jointly over the correlation
// parameters and the spec's shape parameters (start values taken from spec).
// Non-convergence returns the best point found with converged = false.
FitResult fit_mle(const model::CopulaSample& u, const dist::GroupSpec& spec,
                  const CorrelationModel& corr, const FitConfig& cfg = {});

// Hybrid iteration: (a) moment update of rho from model quantiles,
// symmetrize + unit diagonal + PSD projection; (b) PCA; (c) shape MLE with
// frozen correlations; repeat until both deltas drop below tolerance.
FitResult fit_gmm_hybrid(const model::CopulaSample& u,
                         const dist::GroupSpec& spec,
                         const FitConfig& cfg = {});

// Moment residual max_ij |rho_ij - (1/n) sum_t qhat_i qhat_j| of a fitted
// model on its data; the exactly identified GMM condition at convergence.
double gmm_moment_residual(const model::PccModel& m,
                           const model::CopulaSample& u);

// ---------------------------------------------------------------------------
// Bootstrap standard errors: iid row resampling of the filtered returns,
// re-rank, re-fit with the same recipe. Failed replicates are skipped and
// counted. Deterministic for a fixed seed.
// ---------------------------------------------------------------------------
struct BootstrapResult {
  std::vector<std::string> names;     // shape names then lambda_1..lambda_d
  std::vector<double> sd;
  Eigen::MatrixXd replicates;         // n_ok x names.size()
  int failures = 0;
};

enum class FitMethod { Mle, GmmHybrid };

BootstrapResult bootstrap_se(const Eigen::MatrixXd& x_filtered,
                             const dist::GroupSpec& spec, FitMethod method,
                             const CorrelationModel& corr, int n_boot,
                             std::uint64_t seed, const FitConfig& cfg = {});

// ---------------------------------------------------------------------------
// Information criteria over shape parameters only, deltas vs the first fit.
// ---------------------------------------------------------------------------
struct ComparisonRow {
  std::string label;
  double loglik = 0.0;
  int n_shape_params = 0;
  double aic = 0.0;
  double bic = 0.0;
  double delta_aic = 0.0;
  double delta_bic = 0.0;
};

std::vector<ComparisonRow> information_criteria(
    const std::vector<FitResult>& fits, const std::vector<std::string>& labels);

// JSON fit report (parameters, loglik, AIC/BIC, iteration trace).
std::string fit_report_json(const FitResult& fit, const std::string& label);

}  // namespace pcc::estimate
