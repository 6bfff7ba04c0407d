#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "pcc/dist.hpp"
#include "pcc/transform.hpp"

namespace pcc::model {

// Pseudo copula observations: n rows in (0,1)^d.
struct CopulaSample {
  enum class Source { RankedHistorical, Simulated };

  Eigen::MatrixXd u;
  Source source = Source::Simulated;

  int n() const { return static_cast<int>(u.rows()); }
  int d() const { return static_cast<int>(u.cols()); }
  // Entries strictly inside (0,1); ranked-historical columns must be
  // permutations of {1/(n+1), ..., n/(n+1)}.
  void validate() const;
};

// Symmetrizes, floors negative eigenvalues at zero, reconstructs, and
// rescales to unit diagonal. Idempotent up to floating point; the projection
// applied after every moment-based correlation update.
Eigen::MatrixXd make_correlation_psd(const Eigen::MatrixXd& a);

struct EigenDecomp {
  Eigen::MatrixXd w;        // orthogonal, columns are eigenvectors
  Eigen::VectorXd lambda;   // descending, floored at 0, sum renormalized to d
};

// Symmetric eigendecomposition with the deterministic conventions: columns
// ordered by descending eigenvalue (exact ties broken by the index of the
// largest-magnitude weight), each column's largest-magnitude entry positive.
EigenDecomp decompose_correlation(const Eigen::MatrixXd& rho);

// Default inversion window for a generator spec: (-10, 10, 100), widened to
// (-15, 15, 150) when any t/skew-t group has dof below 6 (heavier tails need
// more support; terms scale with the window to keep frequency resolution).
transform::CosConfig cos_config_for(const dist::GroupSpec& spec);

// ---------------------------------------------------------------------------
// The principal component copula model: Y = W P with uncorrelated generators
// P, rho_Y = W diag(Lambda) W'. Immutable after construction.
// ---------------------------------------------------------------------------
class PccModel {
 public:
  PccModel() = default;

  // Eigendecomposes rho (must be a valid correlation matrix; apply
  // make_correlation_psd first if it came from a moment estimate) and builds
  // all d marginal tables. cfg defaults to cos_config_for(spec).
  static PccModel build(const Eigen::MatrixXd& rho, const dist::GroupSpec& spec,
                        transform::CosConfig cfg, int n_grid = 4096);
  static PccModel build(const Eigen::MatrixXd& rho,
                        const dist::GroupSpec& spec);

  // Trusts the supplied decomposition (used by deserialization so that the
  // stored W/Lambda round-trip bit-exactly); validates the invariants.
  static PccModel from_components(const Eigen::MatrixXd& rho,
                                  const Eigen::MatrixXd& w,
                                  const Eigen::VectorXd& lambda,
                                  const dist::GroupSpec& spec,
                                  transform::CosConfig cfg, int n_grid);

  int dim() const { return static_cast<int>(lambda_.size()); }
  const Eigen::MatrixXd& rho() const { return rho_; }
  const Eigen::MatrixXd& w() const { return w_; }
  const Eigen::VectorXd& lambda() const { return lambda_; }
  const dist::GroupSpec& spec() const { return spec_; }
  const transform::CosConfig& cos_config() const { return cfg_; }
  int table_grid() const { return n_grid_; }
  const transform::MarginalTable& marginal(int i) const;
  const std::vector<dist::PreparedGroup>& prepared_groups() const {
    return prepared_;
  }

  // phi_Y(t) = prod_g phi_{P_g}(W_g' t).
  std::complex<double> cf_of_Y(const Eigen::VectorXd& t) const;
  // Marginal CF phi_{Y_i}(t) = phi_Y(t e_i), evaluated exactly through the
  // group CFs at the sliced argument.
  std::complex<double> marginal_cf(int i, double t) const;

  // f_Y(y) = prod_g f_{P_g}(W_g' y); |J| = 1 since W is orthogonal.
  double joint_log_density_Y(const Eigen::VectorXd& y) const;
  double joint_density_Y(const Eigen::VectorXd& y) const;

  struct LogDensity {
    Eigen::VectorXd per_row;
    double total = 0.0;
    int clipped_rows = 0;  // rows with a quantile at the clipping bound
  };
  // ln c(u_t) = ln f_Y(y_t) - sum_i ln f_{Y_i}(y_{i,t}),
  // y_{i,t} = F^{-1}_{Y_i}(u_{i,t}) through the marginal tables.
  LogDensity copula_log_density(const CopulaSample& sample) const;
  double copula_log_density_row(const Eigen::VectorXd& u_row) const;

  // Simulates u rows: P from the generator spec, Y = W P, u_i = F_{Y_i}(Y_i).
  // Deterministic given the seed, independent of the thread count.
  CopulaSample simulate(int n, std::uint64_t seed) const;

  struct Scores {
    Eigen::MatrixXd y;  // n x d
    Eigen::MatrixXd p;  // n x d, P_t = W' Y_t
  };
  // gaussian_margins = true is the exploration scheme (Phi^{-1} instead of
  // the model's marginal quantiles).
  Scores implied_normal_scores(const CopulaSample& sample,
                               bool gaussian_margins = false) const;

 private:
  Eigen::MatrixXd rho_;
  Eigen::MatrixXd w_;
  Eigen::VectorXd lambda_;
  dist::GroupSpec spec_;
  transform::CosConfig cfg_;
  int n_grid_ = 4096;
  std::vector<dist::PreparedGroup> prepared_;
  std::vector<transform::MarginalTable> marginals_;

  void finish_build();
  void check_invariants() const;
};

// Single-document JSON serialization: rho (row-major), Lambda, W, group spec,
// COS config, library name/version. Doubles round-trip bit-exactly (shortest
// round-trip decimal encoding).
std::string to_json(const PccModel& model, int indent = 2);
PccModel model_from_json(const std::string& text);
void save_model(const PccModel& model, const std::string& path);
PccModel load_model(const std::string& path);

}  // namespace pcc::model
