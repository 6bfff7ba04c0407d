#include "pcc/estimate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "pcc/errors.hpp"
#include "pcc/math/normal.hpp"
#include "pcc/math/optim.hpp"
#include "pcc/math/parallel.hpp"
#include "pcc/math/ranks.hpp"
#include "pcc/math/rng.hpp"

namespace pcc::estimate {

namespace {

using dist::CommonTail;
using dist::GeneratorFamily;
using dist::GeneratorGroup;
using dist::GroupSpec;

bool has_family(const GroupSpec& spec, GeneratorFamily f) {
  for (const auto& g : spec.groups)
    if (g.family == f) return true;
  return false;
}

bool has_t_tail(const GroupSpec& spec) {
  return has_family(spec, GeneratorFamily::StudentT);
}

// Skew-t dofs appear as free parameters only when no t groups exist or the
// tails are unlinked; otherwise the shared t dof determines them.
bool skew_nu_is_free(const GroupSpec& spec) {
  return spec.common_tail == CommonTail::None || !has_t_tail(spec);
}

// The optimizer must see one fixed inversion window: cos_config_for switches
// at dof 6, which would step the objective when nu crosses it mid-fit. Any
// t-tailed spec therefore fits under the wide window; the returned model is
// rebuilt under the standard rule.
transform::CosConfig fit_cos_config(const GroupSpec& spec) {
  if (has_family(spec, GeneratorFamily::SkewT) || has_t_tail(spec))
    return transform::CosConfig{-15.0, 15.0, 150};
  return model::cos_config_for(spec);
}

double step_for(const std::string& name) {
  if (name.rfind("nu", 0) == 0) return 0.5;
  return 0.1;  // alpha, beta, gamma
}

Eigen::VectorXd shape_steps(const std::vector<std::string>& names) {
  Eigen::VectorXd s(static_cast<int>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i)
    s[static_cast<int>(i)] = step_for(names[i]);
  return s;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<int>(v.size()));
}

// Negative copula log-likelihood of (rho, shape); exceptions from parameter
// domains, infeasible moment matches, or numeric failures become a wall so
// the optimizers stay inside the valid region.
double penalized_negloglik(const model::CopulaSample& u, const GroupSpec& base,
                           const Eigen::MatrixXd& rho,
                           const std::vector<double>& shape,
                           const transform::CosConfig& cfg, int grid) {
  try {
    const GroupSpec spec = inject_shape(base, shape);
    const auto m = model::PccModel::build(rho, spec, cfg, grid);
    const auto ld = m.copula_log_density(u);
    if (!std::isfinite(ld.total)) return 1e300;
    return -ld.total;
  } catch (const ParameterError&) {
    return 1e300;
  } catch (const NumericError&) {
    return 1e300;
  }
}

// Raw second-moment matrix of the model-implied quantiles, symmetrized with
// unit diagonal: the moment condition matched in the hybrid iteration.
Eigen::MatrixXd quantile_moment_matrix(const model::PccModel& m,
                                       const model::CopulaSample& u) {
  const int n = u.n();
  const int d = u.d();
  Eigen::MatrixXd q(n, d);
  math::parallel_for_blocks(
      static_cast<std::size_t>(n), 256,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r)
          for (int i = 0; i < d; ++i)
            q(static_cast<int>(r), i) = m.marginal(i).inverse_cdf(u.u(r, i));
      });
  Eigen::MatrixXd mm = (q.transpose() * q) / static_cast<double>(n);
  mm = 0.5 * (mm + mm.transpose()).eval();
  mm.diagonal().setOnes();
  return mm;
}

FitResult finalize_fit(const model::CopulaSample& u, const GroupSpec& base,
                       const Eigen::MatrixXd& rho,
                       const std::vector<double>& shape, const FitConfig& cfg,
                       int iterations, bool converged,
                       std::vector<IterationRecord> trace) {
  const GroupSpec spec = inject_shape(base, shape);
  FitResult out;
  out.fitted = model::PccModel::build(rho, spec, model::cos_config_for(spec),
                                      cfg.final_table_grid);
  const auto ld = out.fitted.copula_log_density(u);
  out.loglik = ld.total;
  out.clipped_rows = ld.clipped_rows;
  out.n_obs = u.n();
  out.shape_names = shape_names(spec);
  out.shape = shape;
  out.n_shape_params = static_cast<int>(shape.size());
  const double k = static_cast<double>(out.n_shape_params);
  out.aic = 2.0 * k - 2.0 * out.loglik;
  out.bic = k * std::log(static_cast<double>(out.n_obs)) - 2.0 * out.loglik;
  out.iterations = iterations;
  out.converged = converged;
  out.trace = std::move(trace);
  return out;
}

double clamp_abs(double x, double bound) {
  return std::clamp(x, -bound, bound);
}

}  // namespace

void FitConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(corr_tol > 0.0) || !(shape_tol > 0.0))
    throw ConfigError("tolerances must be positive");
  if (max_evals < 10) throw ConfigError("max_evals must be >= 10");
  if (!(f_tol > 0.0)) throw ConfigError("f_tol must be positive");
  if (table_grid < 64 || final_table_grid < 64)
    throw ConfigError("table grids must be >= 64");
  if (n_boot < 0) throw ConfigError("n_boot must be >= 0");
}

// ---------------------------------------------------------------------------
// shape vector
// ---------------------------------------------------------------------------

std::vector<std::string> shape_names(const GroupSpec& spec) {
  std::vector<std::string> names;
  int h = 0;
  for (const auto& g : spec.groups) {
    if (g.family != GeneratorFamily::Hyperbolic) continue;
    ++h;
    names.push_back("alpha" + std::to_string(h));
    names.push_back("beta" + std::to_string(h));
  }
  const bool free_nu = skew_nu_is_free(spec);
  int s = 0;
  for (const auto& g : spec.groups) {
    if (g.family != GeneratorFamily::SkewT) continue;
    ++s;
    if (free_nu) names.push_back("nu" + std::to_string(s));
    names.push_back("gamma" + std::to_string(s));
  }
  if (has_t_tail(spec)) names.push_back("nu");
  return names;
}

std::vector<double> extract_shape(const GroupSpec& spec) {
  std::vector<double> shape;
  for (const auto& g : spec.groups) {
    if (g.family != GeneratorFamily::Hyperbolic) continue;
    shape.push_back(g.alpha);
    shape.push_back(g.beta);
  }
  const bool free_nu = skew_nu_is_free(spec);
  for (const auto& g : spec.groups) {
    if (g.family != GeneratorFamily::SkewT) continue;
    if (free_nu) shape.push_back(g.nu);
    shape.push_back(g.gamma1);
  }
  if (has_t_tail(spec)) {
    double nu_t = 0.0;
    bool first = true;
    for (const auto& g : spec.groups) {
      if (g.family != GeneratorFamily::StudentT) continue;
      if (first) {
        nu_t = g.nu;
        first = false;
      } else if (std::abs(g.nu - nu_t) > 1e-9) {
        throw ParameterError("all t groups must share one dof");
      }
    }
    if (!free_nu) {
      const double nu1 = dist::linked_dofs(spec.common_tail, nu_t).first;
      for (const auto& g : spec.groups)
        if (g.family == GeneratorFamily::SkewT &&
            std::abs(g.nu - nu1) > 1e-6 * std::max(1.0, nu1))
          throw ParameterError(
              "skew-t dof inconsistent with the common-tail linkage");
    }
    shape.push_back(nu_t);
  }
  return shape;
}

GroupSpec inject_shape(const GroupSpec& base, const std::vector<double>& shape) {
  GroupSpec spec = base;
  std::size_t k = 0;
  const auto next = [&]() {
    if (k >= shape.size())
      throw ParameterError("shape vector too short for the group spec");
    return shape[k++];
  };
  for (auto& g : spec.groups) {
    if (g.family != GeneratorFamily::Hyperbolic) continue;
    g.alpha = next();
    g.beta = next();
  }
  const bool free_nu = skew_nu_is_free(spec);
  for (auto& g : spec.groups) {
    if (g.family != GeneratorFamily::SkewT) continue;
    if (free_nu) g.nu = next();
    g.gamma1 = next();
  }
  if (has_t_tail(spec)) {
    const double nu_t = next();
    for (auto& g : spec.groups)
      if (g.family == GeneratorFamily::StudentT) g.nu = nu_t;
    if (!free_nu) {
      const double nu1 = dist::linked_dofs(spec.common_tail, nu_t).first;
      for (auto& g : spec.groups)
        if (g.family == GeneratorFamily::SkewT) g.nu = nu1;
    }
  }
  if (k != shape.size())
    throw ParameterError("shape vector too long for the group spec");
  return spec;
}

// ---------------------------------------------------------------------------
// ranks and normal scores
// ---------------------------------------------------------------------------

model::CopulaSample ranks_to_pseudo_obs(const Eigen::MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (n < 2 || d < 1) throw DataError("need at least 2 rows and 1 column");
  if (!x.allFinite()) throw DataError("non-finite entries in the data matrix");
  model::CopulaSample out;
  out.u.resize(n, d);
  out.source = model::CopulaSample::Source::RankedHistorical;
  std::vector<double> col(static_cast<std::size_t>(n));
  for (int i = 0; i < d; ++i) {
    for (int r = 0; r < n; ++r) col[static_cast<std::size_t>(r)] = x(r, i);
    if (*std::max_element(col.begin(), col.end()) ==
        *std::min_element(col.begin(), col.end()))
      throw DataError("column " + std::to_string(i) +
                      " is constant: degenerate margin has no ranks");
    const auto rank = math::average_ranks(col);
    for (int r = 0; r < n; ++r)
      out.u(r, i) = rank[static_cast<std::size_t>(r)] / (n + 1.0);
  }
  out.validate();
  return out;
}

InitScores init_normal_scores(const model::CopulaSample& u) {
  u.validate();
  const int n = u.n();
  const int d = u.d();
  Eigen::MatrixXd z(n, d);
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < d; ++i) z(r, i) = math::norm_quantile(u.u(r, i));
  const Eigen::RowVectorXd mean = z.colwise().mean();
  const Eigen::MatrixXd zc = z.rowwise() - mean;
  Eigen::MatrixXd cov = (zc.transpose() * zc) / static_cast<double>(n - 1);
  Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  for (int i = 0; i < d; ++i)
    if (!(sd[i] > 0.0))
      throw DataError("degenerate normal-scores column " + std::to_string(i));
  Eigen::MatrixXd corr =
      cov.array() / (sd * sd.transpose()).array();
  InitScores out;
  out.rho = model::make_correlation_psd(corr);
  out.eig = model::decompose_correlation(out.rho);
  return out;
}

// ---------------------------------------------------------------------------
// CorrelationModel
// ---------------------------------------------------------------------------

CorrelationModel CorrelationModel::fixed(const Eigen::MatrixXd& rho) {
  if (rho.rows() != rho.cols() || rho.rows() < 2)
    throw ParameterError("fixed correlation must be square, d >= 2");
  CorrelationModel m;
  m.kind_ = Kind::Fixed;
  m.d_ = static_cast<int>(rho.rows());
  m.fixed_ = model::make_correlation_psd(rho);
  return m;
}

CorrelationModel CorrelationModel::equicorrelation(int d) {
  if (d < 2) throw ParameterError("equicorrelation needs d >= 2");
  CorrelationModel m;
  m.kind_ = Kind::Equicorrelation;
  m.d_ = d;
  return m;
}

CorrelationModel CorrelationModel::two_factor(int d) {
  if (d < 3) throw ParameterError("two-factor structure needs d >= 3");
  CorrelationModel m;
  m.kind_ = Kind::TwoFactor;
  m.d_ = d;
  return m;
}

CorrelationModel CorrelationModel::free_lower_triangle(int d) {
  if (d < 2) throw ParameterError("free correlation needs d >= 2");
  CorrelationModel m;
  m.kind_ = Kind::FreeLowerTriangle;
  m.d_ = d;
  return m;
}

int CorrelationModel::n_params() const {
  switch (kind_) {
    case Kind::Fixed: return 0;
    case Kind::Equicorrelation: return 1;
    case Kind::TwoFactor: return 2 * d_;
    case Kind::FreeLowerTriangle: return d_ * (d_ - 1) / 2;
  }
  return 0;
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Eigen::MatrixXd CorrelationModel::build(const Eigen::VectorXd& theta) const {
  if (theta.size() != n_params())
    throw ParameterError("correlation parameter vector has wrong length");
  switch (kind_) {
    case Kind::Fixed:
      return fixed_;
    case Kind::Equicorrelation: {
      const double lo = -1.0 / (d_ - 1.0) + 1e-6;
      const double hi = 1.0 - 1e-6;
      const double r = lo + (hi - lo) * logistic(theta[0]);
      Eigen::MatrixXd rho = Eigen::MatrixXd::Constant(d_, d_, r);
      rho.diagonal().setOnes();
      return rho;
    }
    case Kind::TwoFactor: {
      Eigen::VectorXd xi(d_), ga(d_);
      for (int i = 0; i < d_; ++i) {
        xi[i] = std::tanh(theta[i]);
        // loading on the second factor is scaled into the unit disc so the
        // residual variances stay positive
        ga[i] = std::tanh(theta[d_ + i]) * std::sqrt(1.0 - xi[i] * xi[i]);
      }
      Eigen::MatrixXd rho = xi * xi.transpose() + ga * ga.transpose();
      rho.diagonal().setOnes();
      return rho;
    }
    case Kind::FreeLowerTriangle: {
      Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(d_, d_);
      int k = 0;
      for (int i = 1; i < d_; ++i)
        for (int j = 0; j < i; ++j) {
          rho(i, j) = std::tanh(theta[k]);
          rho(j, i) = rho(i, j);
          ++k;
        }
      return model::make_correlation_psd(rho);
    }
  }
  throw ParameterError("unknown correlation kind");
}

Eigen::VectorXd CorrelationModel::initial_theta(
    const Eigen::MatrixXd& rho0) const {
  if (rho0.rows() != d_ || rho0.cols() != d_)
    throw ParameterError("rho0 dimension mismatch");
  switch (kind_) {
    case Kind::Fixed:
      return Eigen::VectorXd();
    case Kind::Equicorrelation: {
      const double lo = -1.0 / (d_ - 1.0) + 1e-6;
      const double hi = 1.0 - 1e-6;
      double sum = 0.0;
      for (int i = 1; i < d_; ++i)
        for (int j = 0; j < i; ++j) sum += rho0(i, j);
      double r = sum / (0.5 * d_ * (d_ - 1.0));
      r = std::clamp(r, lo + 1e-6, hi - 1e-6);
      Eigen::VectorXd t(1);
      t[0] = std::log((r - lo) / (hi - r));
      return t;
    }
    case Kind::TwoFactor: {
      // Principal-axis factoring: iterate communalities on the reduced
      // matrix so heterogeneous residual variances do not tilt the loadings
      // the way raw eigenvectors of the unit-diagonal matrix would.
      const Eigen::MatrixXd r = model::make_correlation_psd(rho0);
      Eigen::VectorXd h(d_);
      for (int i = 0; i < d_; ++i) {
        double m = 0.0;
        for (int j = 0; j < d_; ++j)
          if (j != i) m = std::max(m, std::abs(r(i, j)));
        h[i] = m;
      }
      Eigen::MatrixXd load = Eigen::MatrixXd::Zero(d_, 2);
      for (int pass = 0; pass < 200; ++pass) {
        Eigen::MatrixXd rr = r;
        rr.diagonal() = h;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rr);
        for (int c = 0; c < 2; ++c) {
          const int k = d_ - 1 - c;
          load.col(c) = std::sqrt(std::max(es.eigenvalues()[k], 0.0)) *
                        es.eigenvectors().col(k);
        }
        Eigen::VectorXd h_new =
            load.rowwise().squaredNorm().cwiseMin(0.995);
        const double delta = (h_new - h).cwiseAbs().maxCoeff();
        h = h_new;
        if (delta < 1e-10) break;
      }
      Eigen::VectorXd t(2 * d_);
      for (int i = 0; i < d_; ++i) {
        const double xi = clamp_abs(load(i, 0), 0.995);
        const double ratio =
            clamp_abs(load(i, 1) / std::sqrt(1.0 - xi * xi), 0.995);
        t[i] = std::atanh(xi);
        t[d_ + i] = std::atanh(ratio);
      }
      return t;
    }
    case Kind::FreeLowerTriangle: {
      Eigen::VectorXd t(n_params());
      int k = 0;
      for (int i = 1; i < d_; ++i)
        for (int j = 0; j < i; ++j) t[k++] = std::atanh(clamp_abs(rho0(i, j), 0.995));
      return t;
    }
  }
  throw ParameterError("unknown correlation kind");
}

std::vector<std::string> CorrelationModel::param_names() const {
  std::vector<std::string> names;
  switch (kind_) {
    case Kind::Fixed:
      break;
    case Kind::Equicorrelation:
      names.push_back("rho");
      break;
    case Kind::TwoFactor:
      for (int i = 1; i <= d_; ++i) names.push_back("xi_" + std::to_string(i));
      for (int i = 1; i <= d_; ++i)
        names.push_back("gamma_" + std::to_string(i));
      break;
    case Kind::FreeLowerTriangle:
      for (int i = 2; i <= d_; ++i)
        for (int j = 1; j < i; ++j)
          names.push_back("r_" + std::to_string(i) + "_" + std::to_string(j));
      break;
  }
  return names;
}

// ---------------------------------------------------------------------------
// full MLE
// ---------------------------------------------------------------------------

FitResult fit_mle(const model::CopulaSample& u, const GroupSpec& spec,
                  const CorrelationModel& corr, const FitConfig& cfg) {
  cfg.validate();
  u.validate();
  const int d = u.d();
  spec.validate(d);
  if (corr.dim() != d)
    throw ParameterError("correlation model dimension mismatch");

  const auto names = shape_names(spec);
  const std::vector<double> shape0 = extract_shape(spec);
  const int nc = corr.n_params();
  const int ns = static_cast<int>(shape0.size());
  const transform::CosConfig cfg_fit = fit_cos_config(spec);

  Eigen::VectorXd x0(nc + ns);
  if (nc > 0) {
    const Eigen::MatrixXd rho0 = init_normal_scores(u).rho;
    x0.head(nc) = corr.initial_theta(rho0);
  }
  for (int i = 0; i < ns; ++i) x0[nc + i] = shape0[static_cast<std::size_t>(i)];

  const auto objective = [&](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd rho = corr.build(x.head(nc));
    return penalized_negloglik(u, spec, rho,
                               to_std(x.tail(ns)), cfg_fit, cfg.table_grid);
  };

  Eigen::MatrixXd rho_best;
  std::vector<double> shape_best;
  int evals = 0;
  bool converged = true;
  if (nc + ns == 0) {
    rho_best = corr.build(Eigen::VectorXd());
    evals = 1;
  } else {
    Eigen::VectorXd step(nc + ns);
    step.head(nc).setConstant(0.25);
    step.tail(ns) = shape_steps(names);
    math::OptimResult opt;
    if (nc + ns <= 6) {
      opt = math::nelder_mead(objective, x0, step, cfg.f_tol, cfg.max_evals, 1);
    } else {
      opt = math::bfgs_numeric(objective, x0, 1e-6, cfg.max_evals);
    }
    if (opt.value >= 1e300)
      throw NumericError("likelihood is infinite everywhere the optimizer looked");
    rho_best = corr.build(opt.x.head(nc));
    shape_best = to_std(opt.x.tail(ns));
    evals = opt.evaluations;
    converged = opt.converged;
  }

  std::vector<IterationRecord> trace;
  FitResult out = finalize_fit(u, spec, rho_best, shape_best, cfg, evals,
                               converged, std::move(trace));
  if (cfg.keep_trace) {
    IterationRecord rec;
    rec.iteration = 1;
    rec.shape = out.shape;
    rec.loglik = out.loglik;
    out.trace.push_back(rec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// hybrid GMM iteration
// ---------------------------------------------------------------------------

FitResult fit_gmm_hybrid(const model::CopulaSample& u, const GroupSpec& spec,
                         const FitConfig& cfg) {
  cfg.validate();
  u.validate();
  const int d = u.d();
  spec.validate(d);

  const auto names = shape_names(spec);
  std::vector<double> shape = extract_shape(spec);
  const Eigen::VectorXd steps0 = shape_steps(names);
  const transform::CosConfig cfg_fit = fit_cos_config(spec);

  Eigen::MatrixXd rho = init_normal_scores(u).rho;
  std::vector<IterationRecord> trace;
  bool converged = false;
  int iterations = 0;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    // (a) moment update of rho through the current model's quantiles
    const GroupSpec spec_it = inject_shape(spec, shape);
    const auto m_it =
        model::PccModel::build(rho, spec_it, cfg_fit, cfg.table_grid);
    const Eigen::MatrixXd mm = quantile_moment_matrix(m_it, u);
    const Eigen::MatrixXd rho_new = model::make_correlation_psd(mm);
    const double corr_delta = (rho_new - rho).norm();
    rho = rho_new;

    // (b) PCA happens inside every model build; (c) shape MLE at frozen rho
    double shape_delta = 0.0;
    double loglik = 0.0;
    if (!shape.empty()) {
      const auto objective = [&](const Eigen::VectorXd& x) {
        return penalized_negloglik(u, spec, rho, to_std(x), cfg_fit,
                                   cfg.table_grid);
      };
      const Eigen::VectorXd steps = (it == 1) ? steps0 : (0.5 * steps0).eval();
      const auto opt = math::nelder_mead(objective, to_eigen(shape), steps,
                                         cfg.f_tol, cfg.max_evals, 1);
      if (opt.value >= 1e300)
        throw NumericError("shape likelihood is infinite at every trial point");
      for (std::size_t i = 0; i < shape.size(); ++i)
        shape_delta = std::max(
            shape_delta, std::abs(opt.x[static_cast<int>(i)] - shape[i]));
      shape = to_std(opt.x);
      loglik = -opt.value;
    } else {
      const auto m_ll =
          model::PccModel::build(rho, spec_it, cfg_fit, cfg.table_grid);
      loglik = m_ll.copula_log_density(u).total;
    }

    iterations = it;
    if (cfg.keep_trace) {
      IterationRecord rec;
      rec.iteration = it;
      rec.corr_delta = corr_delta;
      rec.shape_delta = shape_delta;
      rec.shape = shape;
      rec.loglik = loglik;
      trace.push_back(rec);
    }
    if (corr_delta < cfg.corr_tol && shape_delta < cfg.shape_tol) {
      converged = true;
      break;
    }
  }

  return finalize_fit(u, spec, rho, shape, cfg, iterations, converged,
                      std::move(trace));
}

double gmm_moment_residual(const model::PccModel& m,
                           const model::CopulaSample& u) {
  if (m.dim() != u.d()) throw ParameterError("model/sample dimension mismatch");
  const Eigen::MatrixXd mm = quantile_moment_matrix(m, u);
  double worst = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < i; ++j)
      worst = std::max(worst, std::abs(m.rho()(i, j) - mm(i, j)));
  return worst;
}

// ---------------------------------------------------------------------------
// bootstrap
// ---------------------------------------------------------------------------

BootstrapResult bootstrap_se(const Eigen::MatrixXd& x_filtered,
                             const GroupSpec& spec, FitMethod method,
                             const CorrelationModel& corr, int n_boot,
                             std::uint64_t seed, const FitConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(x_filtered.rows());
  const int d = static_cast<int>(x_filtered.cols());
  if (n < 8) throw DataError("too few rows to bootstrap");
  if (n_boot < 2) throw ParameterError("n_boot must be >= 2");

  BootstrapResult out;
  out.names = shape_names(spec);
  for (int j = 1; j <= d; ++j) out.names.push_back("lambda_" + std::to_string(j));
  const int p = static_cast<int>(out.names.size());

  FitConfig rep_cfg = cfg;
  rep_cfg.keep_trace = false;

  std::vector<Eigen::VectorXd> rows;
  rows.reserve(static_cast<std::size_t>(n_boot));
  for (int b = 0; b < n_boot; ++b) {
    math::Rng rng(seed, static_cast<std::uint64_t>(b));
    Eigen::MatrixXd xb(n, d);
    for (int r = 0; r < n; ++r) {
      const int pick = std::min(n - 1, static_cast<int>(rng.uniform() * n));
      xb.row(r) = x_filtered.row(pick);
    }
    try {
      const auto ub = ranks_to_pseudo_obs(xb);
      const FitResult fit = (method == FitMethod::Mle)
                                ? fit_mle(ub, spec, corr, rep_cfg)
                                : fit_gmm_hybrid(ub, spec, rep_cfg);
      Eigen::VectorXd row(p);
      for (std::size_t i = 0; i < fit.shape.size(); ++i)
        row[static_cast<int>(i)] = fit.shape[i];
      row.tail(d) = fit.fitted.lambda();
      rows.push_back(std::move(row));
    } catch (const std::exception&) {
      ++out.failures;
    }
  }

  const int ok = static_cast<int>(rows.size());
  if (ok < 2) throw NumericError("fewer than 2 bootstrap replicates succeeded");
  out.replicates.resize(ok, p);
  for (int b = 0; b < ok; ++b) out.replicates.row(b) = rows[static_cast<std::size_t>(b)];
  out.sd.resize(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    const double mean = out.replicates.col(j).mean();
    const double ss = (out.replicates.col(j).array() - mean).square().sum();
    out.sd[static_cast<std::size_t>(j)] = std::sqrt(ss / (ok - 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// model comparison and reporting
// ---------------------------------------------------------------------------

std::vector<ComparisonRow> information_criteria(
    const std::vector<FitResult>& fits,
    const std::vector<std::string>& labels) {
  if (fits.empty()) throw ParameterError("no fits to compare");
  if (fits.size() != labels.size())
    throw ParameterError("one label per fit required");
  for (const auto& f : fits)
    if (f.n_obs != fits.front().n_obs)
      throw ParameterError("information criteria require a common sample");
  std::vector<ComparisonRow> rows;
  rows.reserve(fits.size());
  for (std::size_t i = 0; i < fits.size(); ++i) {
    ComparisonRow r;
    r.label = labels[i];
    r.loglik = fits[i].loglik;
    r.n_shape_params = fits[i].n_shape_params;
    r.aic = fits[i].aic;
    r.bic = fits[i].bic;
    r.delta_aic = fits[i].aic - fits.front().aic;
    r.delta_bic = fits[i].bic - fits.front().bic;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string fit_report_json(const FitResult& fit, const std::string& label) {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["loglik"] = fit.loglik;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["n_obs"] = fit.n_obs;
  j["n_shape_params"] = fit.n_shape_params;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["clipped_rows"] = fit.clipped_rows;
  nlohmann::ordered_json shape = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < fit.shape_names.size(); ++i)
    shape[fit.shape_names[i]] = fit.shape[i];
  j["shape"] = shape;
  nlohmann::ordered_json lambda = nlohmann::ordered_json::array();
  for (int i = 0; i < fit.fitted.dim(); ++i) lambda.push_back(fit.fitted.lambda()[i]);
  j["lambda"] = lambda;
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const auto& rec : fit.trace) {
    nlohmann::ordered_json t;
    t["iteration"] = rec.iteration;
    t["corr_delta"] = rec.corr_delta;
    t["shape_delta"] = rec.shape_delta;
    t["loglik"] = rec.loglik;
    t["shape"] = rec.shape;
    trace.push_back(std::move(t));
  }
  j["trace"] = trace;
  return j.dump(2);
}

}  // namespace pcc::estimate
