#include "pcc/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "pcc/errors.hpp"
#include "pcc/math/normal.hpp"
#include "pcc/math/parallel.hpp"
#include "pcc/math/ranks.hpp"
#include "pcc/version.hpp"

namespace pcc::model {

namespace {

using cplx = std::complex<double>;
using ordered_json = nlohmann::ordered_json;

constexpr double kOrthoTol = 1e-10;
constexpr double kTraceTol = 1e-8;

Eigen::VectorXd gather(const Eigen::VectorXd& full,
                       const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k)
    out[static_cast<Eigen::Index>(k)] = full[idx[k]];
  return out;
}

std::string family_to_string(dist::GeneratorFamily f) {
  switch (f) {
    case dist::GeneratorFamily::Normal: return "normal";
    case dist::GeneratorFamily::Hyperbolic: return "hyperbolic";
    case dist::GeneratorFamily::SkewT: return "skew_t";
    case dist::GeneratorFamily::StudentT: return "t";
  }
  throw ParameterError("unknown generator family");
}

dist::GeneratorFamily family_from_string(const std::string& s) {
  if (s == "normal") return dist::GeneratorFamily::Normal;
  if (s == "hyperbolic") return dist::GeneratorFamily::Hyperbolic;
  if (s == "skew_t") return dist::GeneratorFamily::SkewT;
  if (s == "t" || s == "joint_t") return dist::GeneratorFamily::StudentT;
  throw DataError("model json: unknown generator family '" + s + "'");
}

std::string tail_to_string(dist::CommonTail t) {
  switch (t) {
    case dist::CommonTail::None: return "none";
    case dist::CommonTail::EqualDof: return "equal_dof";
    case dist::CommonTail::EqualTail: return "equal_tail";
  }
  throw ParameterError("unknown common-tail mode");
}

dist::CommonTail tail_from_string(const std::string& s) {
  if (s == "none") return dist::CommonTail::None;
  if (s == "equal_dof") return dist::CommonTail::EqualDof;
  if (s == "equal_tail") return dist::CommonTail::EqualTail;
  throw DataError("model json: unknown common_tail '" + s + "'");
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j, const char* name) {
  if (!j.is_array() || j.empty())
    throw DataError(std::string("model json: ") + name +
                    " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw DataError(std::string("model json: ragged rows in ") + name);
    for (Eigen::Index k = 0; k < cols; ++k)
      m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const ordered_json& j, const char* name) {
  if (!j.is_array() || j.empty())
    throw DataError(std::string("model json: ") + name +
                    " must be a non-empty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = j.at(i).get<double>();
  return v;
}

}  // namespace

void CopulaSample::validate() const {
  if (u.rows() == 0 || u.cols() == 0)
    throw DataError("copula sample: empty matrix");
  if (!((u.array() > 0.0).all() && (u.array() < 1.0).all()))
    throw DataError("copula sample: entries must lie strictly inside (0,1)");
  if (source == Source::RankedHistorical) {
    // u must be exactly what average ranks of u itself produce: permutations
    // of {k/(n+1)} when untied, tied runs at their average rank otherwise.
    const auto rows = u.rows();
    std::vector<double> col(static_cast<std::size_t>(rows));
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      for (Eigen::Index i = 0; i < rows; ++i)
        col[static_cast<std::size_t>(i)] = u(i, j);
      const auto rank = math::average_ranks(col);
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double want =
            rank[static_cast<std::size_t>(i)] / static_cast<double>(rows + 1);
        if (std::abs(col[static_cast<std::size_t>(i)] - want) > 1e-9)
          throw DataError(
              "copula sample: ranked-historical column is not rank/(n+1)");
      }
    }
  }
}

Eigen::MatrixXd make_correlation_psd(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw ParameterError("make_correlation_psd: matrix must be square");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success)
    throw NumericError("make_correlation_psd: eigendecomposition failed");
  const Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd rebuilt =
      es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
  Eigen::VectorXd scale(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (!(rebuilt(i, i) > 0.0))
      throw NumericError(
          "make_correlation_psd: zero variance after projection (degenerate "
          "input row)");
    scale[i] = 1.0 / std::sqrt(rebuilt(i, i));
  }
  Eigen::MatrixXd out = scale.asDiagonal() * rebuilt * scale.asDiagonal();
  out = 0.5 * (out + out.transpose()).eval();
  out.diagonal().setOnes();
  return out;
}

EigenDecomp decompose_correlation(const Eigen::MatrixXd& rho) {
  const auto d = rho.rows();
  if (d == 0 || rho.cols() != d)
    throw ParameterError("decompose_correlation: matrix must be square");
  if ((rho - rho.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw ParameterError("decompose_correlation: matrix must be symmetric");
  if ((rho.diagonal().array() - 1.0).abs().maxCoeff() > 1e-8)
    throw ParameterError("decompose_correlation: diagonal must be 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho);
  if (es.info() != Eigen::Success)
    throw NumericError("decompose_correlation: eigendecomposition failed");
  Eigen::VectorXd vals = es.eigenvalues();
  if (vals.minCoeff() < -1e-8)
    throw ParameterError(
        "decompose_correlation: matrix is not PSD; project with "
        "make_correlation_psd first");
  vals = vals.cwiseMax(0.0);
  const double total = vals.sum();
  if (!(total > 0.0))
    throw NumericError("decompose_correlation: zero trace after flooring");
  vals *= static_cast<double>(d) / total;
  Eigen::MatrixXd vecs = es.eigenvectors();

  // Sign convention: the largest-magnitude weight of each column positive
  // (first such index on exact ties).
  std::vector<Eigen::Index> peak(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double mag = std::abs(vecs(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (vecs(arg, j) < 0.0) vecs.col(j) *= -1.0;
    peak[static_cast<std::size_t>(j)] = arg;
  }

  // Descending eigenvalues; exact ties ordered by peak-weight index.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     if (vals[a] != vals[b]) return vals[a] > vals[b];
                     return peak[static_cast<std::size_t>(a)] <
                            peak[static_cast<std::size_t>(b)];
                   });
  EigenDecomp out;
  out.w.resize(d, d);
  out.lambda.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    out.w.col(j) = vecs.col(order[static_cast<std::size_t>(j)]);
    out.lambda[j] = vals[order[static_cast<std::size_t>(j)]];
  }
  return out;
}

transform::CosConfig cos_config_for(const dist::GroupSpec& spec) {
  double min_nu = std::numeric_limits<double>::infinity();
  for (const auto& g : spec.groups)
    if (g.family == dist::GeneratorFamily::SkewT ||
        g.family == dist::GeneratorFamily::StudentT)
      min_nu = std::min(min_nu, g.nu);
  transform::CosConfig cfg;
  if (min_nu < 6.0) {
    cfg.a = -15.0;
    cfg.b = 15.0;
    cfg.n_terms = 150;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// PccModel
// ---------------------------------------------------------------------------

PccModel PccModel::build(const Eigen::MatrixXd& rho,
                         const dist::GroupSpec& spec,
                         transform::CosConfig cfg, int n_grid) {
  PccModel m;
  m.rho_ = rho;
  m.rho_.diagonal().setOnes();
  const auto decomp = decompose_correlation(m.rho_);
  m.w_ = decomp.w;
  m.lambda_ = decomp.lambda;
  m.spec_ = spec;
  m.cfg_ = cfg;
  m.n_grid_ = n_grid;
  m.finish_build();
  return m;
}

PccModel PccModel::build(const Eigen::MatrixXd& rho,
                         const dist::GroupSpec& spec) {
  return build(rho, spec, cos_config_for(spec));
}

PccModel PccModel::from_components(const Eigen::MatrixXd& rho,
                                   const Eigen::MatrixXd& w,
                                   const Eigen::VectorXd& lambda,
                                   const dist::GroupSpec& spec,
                                   transform::CosConfig cfg, int n_grid) {
  PccModel m;
  m.rho_ = rho;
  m.w_ = w;
  m.lambda_ = lambda;
  m.spec_ = spec;
  m.cfg_ = cfg;
  m.n_grid_ = n_grid;
  m.finish_build();
  return m;
}

void PccModel::finish_build() {
  cfg_.validate();
  check_invariants();
  prepared_ = dist::prepare_groups(spec_, lambda_);
  const int d = dim();
  marginals_.assign(static_cast<std::size_t>(d), transform::MarginalTable());
  math::parallel_for_blocks(
      static_cast<std::size_t>(d), 1,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const int idx = static_cast<int>(i);
          const transform::CharFn cf = [this, idx](double t) {
            return marginal_cf(idx, t);
          };
          marginals_[i] = transform::build_marginal_table(cf, cfg_, n_grid_,
                                                          idx);
        }
      });
}

void PccModel::check_invariants() const {
  const auto d = rho_.rows();
  if (d == 0 || rho_.cols() != d || w_.rows() != d || w_.cols() != d ||
      lambda_.size() != d)
    throw ParameterError("model: inconsistent dimensions");
  const Eigen::MatrixXd wtw = w_.transpose() * w_;
  if ((wtw - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() > kOrthoTol)
    throw ParameterError("model: W is not orthogonal within tolerance");
  const Eigen::MatrixXd rebuilt = w_ * lambda_.asDiagonal() * w_.transpose();
  if ((rebuilt - rho_).cwiseAbs().maxCoeff() > kOrthoTol)
    throw ParameterError("model: rho != W diag(Lambda) W' within tolerance");
  if ((rho_.diagonal().array() != 1.0).any())
    throw ParameterError("model: rho diagonal must be exactly 1");
  if (lambda_.minCoeff() < 0.0)
    throw ParameterError("model: eigenvalues must be nonnegative");
  if (std::abs(lambda_.sum() - static_cast<double>(d)) > kTraceTol)
    throw ParameterError("model: eigenvalues must sum to d");
  for (Eigen::Index j = 0; j + 1 < d; ++j)
    if (lambda_[j] < lambda_[j + 1])
      throw ParameterError("model: eigenvalues must be descending");
}

const transform::MarginalTable& PccModel::marginal(int i) const {
  if (i < 0 || i >= dim())
    throw ParameterError("model: marginal index out of range");
  return marginals_[static_cast<std::size_t>(i)];
}

std::complex<double> PccModel::cf_of_Y(const Eigen::VectorXd& t) const {
  if (t.size() != dim()) throw ParameterError("cf_of_Y: dimension mismatch");
  const Eigen::VectorXd s = w_.transpose() * t;
  cplx prod(1.0, 0.0);
  for (const auto& pg : prepared_) prod *= dist::group_cf(pg, gather(s, pg.indices));
  return prod;
}

std::complex<double> PccModel::marginal_cf(int i, double t) const {
  if (i < 0 || i >= dim())
    throw ParameterError("marginal_cf: index out of range");
  const Eigen::VectorXd s = t * w_.row(i).transpose();
  cplx prod(1.0, 0.0);
  for (const auto& pg : prepared_) prod *= dist::group_cf(pg, gather(s, pg.indices));
  return prod;
}

double PccModel::joint_log_density_Y(const Eigen::VectorXd& y) const {
  if (y.size() != dim())
    throw ParameterError("joint_log_density_Y: dimension mismatch");
  const Eigen::VectorXd p = w_.transpose() * y;
  double acc = 0.0;
  for (const auto& pg : prepared_)
    acc += dist::group_log_pdf(pg, gather(p, pg.indices));
  return acc;
}

double PccModel::joint_density_Y(const Eigen::VectorXd& y) const {
  return std::exp(joint_log_density_Y(y));
}

PccModel::LogDensity PccModel::copula_log_density(
    const CopulaSample& sample) const {
  if (sample.d() != dim())
    throw ParameterError("copula_log_density: sample dimension mismatch");
  const int n = sample.n();
  const int d = dim();
  constexpr double kEps = transform::MarginalTable::kEps;
  LogDensity out;
  out.per_row.resize(n);
  constexpr std::size_t kBlock = 256;
  const std::size_t n_blocks =
      (static_cast<std::size_t>(n) + kBlock - 1) / kBlock;
  std::vector<double> block_sum(n_blocks, 0.0);
  std::vector<int> block_clipped(n_blocks, 0);
  math::parallel_for_blocks(
      static_cast<std::size_t>(n), kBlock,
      [&](std::size_t block, std::size_t begin, std::size_t end) {
        Eigen::VectorXd y(d);
        math::KahanSum acc;
        int clipped = 0;
        for (std::size_t r = begin; r < end; ++r) {
          const auto row = static_cast<Eigen::Index>(r);
          bool row_clipped = false;
          double marg = 0.0;
          for (int i = 0; i < d; ++i) {
            const double u = sample.u(row, i);
            if (u <= kEps || u >= 1.0 - kEps) row_clipped = true;
            y[i] = marginals_[static_cast<std::size_t>(i)].inverse_cdf(u);
            marg += std::log(std::max(
                marginals_[static_cast<std::size_t>(i)].pdf(y[i]), 1e-300));
          }
          const double v = joint_log_density_Y(y) - marg;
          out.per_row[row] = v;
          acc.add(v);
          if (row_clipped) ++clipped;
        }
        block_sum[block] = acc.value();
        block_clipped[block] = clipped;
      });
  math::KahanSum total;
  for (std::size_t b = 0; b < n_blocks; ++b) total.add(block_sum[b]);
  out.total = total.value();
  out.clipped_rows = std::accumulate(block_clipped.begin(),
                                     block_clipped.end(), 0);
  return out;
}

double PccModel::copula_log_density_row(const Eigen::VectorXd& u_row) const {
  CopulaSample s;
  s.u = u_row.transpose();
  return copula_log_density(s).per_row[0];
}

CopulaSample PccModel::simulate(int n, std::uint64_t seed) const {
  const Eigen::MatrixXd p = dist::sample_generators(spec_, lambda_, n, seed);
  const Eigen::MatrixXd y = p * w_.transpose();
  CopulaSample out;
  out.source = CopulaSample::Source::Simulated;
  out.u.resize(n, dim());
  const int d = dim();
  math::parallel_for_blocks(
      static_cast<std::size_t>(n), 2048,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r)
          for (int i = 0; i < d; ++i)
            out.u(static_cast<Eigen::Index>(r), i) =
                marginals_[static_cast<std::size_t>(i)].cdf(
                    y(static_cast<Eigen::Index>(r), i));
      });
  return out;
}

PccModel::Scores PccModel::implied_normal_scores(const CopulaSample& sample,
                                                 bool gaussian_margins) const {
  if (sample.d() != dim())
    throw ParameterError("implied_normal_scores: sample dimension mismatch");
  const int n = sample.n();
  const int d = dim();
  Scores out;
  out.y.resize(n, d);
  math::parallel_for_blocks(
      static_cast<std::size_t>(n), 2048,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
          const auto row = static_cast<Eigen::Index>(r);
          for (int i = 0; i < d; ++i) {
            const double u = sample.u(row, i);
            out.y(row, i) =
                gaussian_margins
                    ? math::norm_quantile(u)
                    : marginals_[static_cast<std::size_t>(i)].inverse_cdf(u);
          }
        }
      });
  out.p = out.y * w_;
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string to_json(const PccModel& model, int indent) {
  ordered_json groups = ordered_json::array();
  for (const auto& g : model.spec().groups) {
    ordered_json jg;
    jg["family"] = family_to_string(g.family);
    jg["indices"] = g.indices;
    switch (g.family) {
      case dist::GeneratorFamily::Normal:
        break;
      case dist::GeneratorFamily::Hyperbolic:
        jg["alpha"] = g.alpha;
        jg["beta"] = g.beta;
        break;
      case dist::GeneratorFamily::SkewT:
        jg["nu"] = g.nu;
        jg["gamma1"] = g.gamma1;
        break;
      case dist::GeneratorFamily::StudentT:
        jg["nu"] = g.nu;
        break;
    }
    groups.push_back(std::move(jg));
  }
  ordered_json j;
  j["library"] = std::string(library_name);
  j["version"] = std::string(library_version);
  j["model"] = {
      {"d", model.dim()},
      {"rho", matrix_to_json(model.rho())},
      {"lambda", std::vector<double>(model.lambda().data(),
                                     model.lambda().data() + model.dim())},
      {"w", matrix_to_json(model.w())},
      {"groups", std::move(groups)},
      {"common_tail", tail_to_string(model.spec().common_tail)},
      {"cos",
       {{"a", model.cos_config().a},
        {"b", model.cos_config().b},
        {"n_terms", model.cos_config().n_terms},
        {"n_grid", model.table_grid()}}},
  };
  return indent >= 0 ? j.dump(indent) : j.dump();
}

PccModel model_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model json: parse failure: ") + e.what());
  }
  try {
    if (!j.contains("model"))
      throw DataError("model json: missing 'model' object");
    const auto& jm = j.at("model");
    const int d = jm.at("d").get<int>();
    const Eigen::MatrixXd rho = matrix_from_json(jm.at("rho"), "rho");
    const Eigen::MatrixXd w = matrix_from_json(jm.at("w"), "w");
    const Eigen::VectorXd lambda = vector_from_json(jm.at("lambda"), "lambda");
    if (rho.rows() != d || w.rows() != d || lambda.size() != d)
      throw DataError("model json: dimension fields disagree");
    dist::GroupSpec spec;
    spec.common_tail = tail_from_string(
        jm.value("common_tail", std::string("none")));
    for (const auto& jg : jm.at("groups")) {
      dist::GeneratorGroup g;
      g.family = family_from_string(jg.at("family").get<std::string>());
      g.indices = jg.at("indices").get<std::vector<int>>();
      g.alpha = jg.value("alpha", 0.0);
      g.beta = jg.value("beta", 0.0);
      g.nu = jg.value("nu", 0.0);
      g.gamma1 = jg.value("gamma1", 0.0);
      spec.groups.push_back(std::move(g));
    }
    transform::CosConfig cfg;
    int n_grid = 4096;
    if (jm.contains("cos")) {
      const auto& jc = jm.at("cos");
      cfg.a = jc.value("a", cfg.a);
      cfg.b = jc.value("b", cfg.b);
      cfg.n_terms = jc.value("n_terms", cfg.n_terms);
      n_grid = jc.value("n_grid", n_grid);
    }
    return PccModel::from_components(rho, w, lambda, spec, cfg, n_grid);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model json: malformed document: ") +
                    e.what());
  }
}

void save_model(const PccModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("save_model: cannot open '" + path + "'");
  out << to_json(model) << "\n";
  if (!out) throw DataError("save_model: write failure on '" + path + "'");
}

PccModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_model: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace pcc::model
