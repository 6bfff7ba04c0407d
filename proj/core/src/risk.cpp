#include "pcc/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "pcc/errors.hpp"
#include "pcc/io.hpp"
#include "pcc/math/parallel.hpp"
#include "pcc/math/ranks.hpp"
#include "pcc/math/rng.hpp"

namespace pcc::risk {

namespace {

constexpr int kSimChunk = 65536;

struct Cell {
  std::string axis;
  double q;
  int k;
  std::vector<int> subset;
};

void require_unit_open(const Eigen::MatrixXd& u, const char* what) {
  if (u.rows() < 1 || u.cols() < 1)
    throw DataError(std::string(what) + ": empty sample");
  if (!u.allFinite() || u.minCoeff() <= 0.0 || u.maxCoeff() >= 1.0)
    throw DataError(std::string(what) + ": entries must lie in (0,1)");
}

long long count_cell(const Eigen::MatrixXd& u, double q, int k,
                     const std::vector<int>& subset) {
  long long hits = 0;
  const auto n = u.rows();
  for (Eigen::Index r = 0; r < n; ++r) {
    int below = 0;
    for (const int j : subset) {
      if (u(r, j) <= q) ++below;
    }
    if (below >= k) ++hits;
  }
  return hits;
}

std::vector<Cell> build_cells(int d, const DistressConfig& cfg) {
  std::vector<int> full(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) full[static_cast<std::size_t>(j)] = j;

  std::vector<Cell> cells;
  for (const double q : cfg.q_grid) cells.push_back({"q", q, d, full});
  for (const double kd : cfg.k_over_d_grid) {
    const int k = std::max(1, static_cast<int>(std::ceil(kd * d - 1e-9)));
    cells.push_back({"k", cfg.fixed_q, k, full});
  }
  for (const int s : cfg.d_axis_sizes) {
    std::vector<int> subset(cfg.index_order.begin(),
                            cfg.index_order.begin() + s);
    cells.push_back({"d", cfg.fixed_q, s, std::move(subset)});
  }
  return cells;
}

// Pseudo-observations of a row-resampled sample: per-column average ranks
// scaled by 1/(n+1), mirroring the construction of the original copula data.
Eigen::MatrixXd resample_and_rerank(const Eigen::MatrixXd& u, math::Rng& rng) {
  const auto n = u.rows();
  const auto d = u.cols();
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(n));
  for (auto& p : pick)
    p = std::min<Eigen::Index>(n - 1,
                               static_cast<Eigen::Index>(rng.uniform() * n));
  Eigen::MatrixXd out(n, d);
  std::vector<double> col(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index r = 0; r < n; ++r)
      col[static_cast<std::size_t>(r)] = u(pick[static_cast<std::size_t>(r)], j);
    const std::vector<double> rk = math::average_ranks(col);
    for (Eigen::Index r = 0; r < n; ++r)
      out(r, j) = rk[static_cast<std::size_t>(r)] / (static_cast<double>(n) + 1.0);
  }
  return out;
}

}  // namespace

void DistressConfig::validate(int d) const {
  if (d < 1) throw ConfigError("distress: dimension must be positive");
  if (q_grid.empty()) throw ConfigError("distress: q_grid must be nonempty");
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (!(q_grid[i] > 0.0) || q_grid[i] > 0.5)
      throw ConfigError("distress: q_grid entries must lie in (0, 0.5]");
    if (i > 0 && q_grid[i] <= q_grid[i - 1])
      throw ConfigError("distress: q_grid must be strictly increasing");
  }
  if (k_over_d_grid.empty())
    throw ConfigError("distress: k_over_d_grid must be nonempty");
  for (std::size_t i = 0; i < k_over_d_grid.size(); ++i) {
    if (!(k_over_d_grid[i] > 0.0) || k_over_d_grid[i] > 1.0)
      throw ConfigError("distress: k_over_d entries must lie in (0, 1]");
    if (i > 0 && k_over_d_grid[i] <= k_over_d_grid[i - 1])
      throw ConfigError("distress: k_over_d_grid must be strictly increasing");
  }
  if (!(fixed_q > 0.0) || fixed_q > 0.5)
    throw ConfigError("distress: fixed_q must lie in (0, 0.5]");
  if (!d_axis_sizes.empty()) {
    if (index_order.empty())
      throw ConfigError(
          "distress: dimension axis requires an explicit index ordering");
    if (static_cast<int>(index_order.size()) != d)
      throw ConfigError("distress: index_order must list every column once");
    std::vector<bool> seen(static_cast<std::size_t>(d), false);
    for (const int j : index_order) {
      if (j < 0 || j >= d || seen[static_cast<std::size_t>(j)])
        throw ConfigError("distress: index_order must be a permutation");
      seen[static_cast<std::size_t>(j)] = true;
    }
    for (std::size_t i = 0; i < d_axis_sizes.size(); ++i) {
      if (d_axis_sizes[i] < 1 || d_axis_sizes[i] > d)
        throw ConfigError("distress: subset sizes must lie in [1, d]");
      if (i > 0 && d_axis_sizes[i] <= d_axis_sizes[i - 1])
        throw ConfigError("distress: subset sizes must be strictly increasing");
    }
  }
  if (n_sim < 1000) throw ConfigError("distress: n_sim must be at least 1000");
  if (n_boot < 2) throw ConfigError("distress: n_boot must be at least 2");
}

DistressConfig default_config(int d) {
  if (d < 1) throw ConfigError("distress: dimension must be positive");
  DistressConfig cfg;
  cfg.index_order.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) cfg.index_order[static_cast<std::size_t>(j)] = j;
  std::vector<int> sizes{std::max(2, d / 4), std::max(2, d / 2),
                         std::max(2, 3 * d / 4), d};
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  if (d >= 2) cfg.d_axis_sizes = sizes;
  return cfg;
}

double mdr(const Eigen::VectorXd& u_row, double q) {
  if (u_row.size() < 1) throw ParameterError("mdr: empty row");
  if (!u_row.allFinite() || u_row.minCoeff() <= 0.0 || u_row.maxCoeff() >= 1.0)
    throw ParameterError("mdr: entries must lie in (0,1)");
  const auto below = (u_row.array() <= q).count();
  return static_cast<double>(below) / static_cast<double>(u_row.size());
}

double mdf(const Eigen::MatrixXd& u, double q, int k,
           const std::vector<int>& subset) {
  require_unit_open(u, "mdf");
  if (subset.empty()) throw ParameterError("mdf: empty subset");
  if (k < 0 || k > static_cast<int>(subset.size()))
    throw ParameterError("mdf: k must lie in [0, |subset|]");
  for (const int j : subset) {
    if (j < 0 || j >= u.cols())
      throw ParameterError("mdf: subset index out of range");
  }
  return static_cast<double>(count_cell(u, q, k, subset)) /
         static_cast<double>(u.rows());
}

double binomial_distress_test(long long count, long long n, double p_model) {
  if (n < 1 || count < 0 || count > n)
    throw ParameterError("binomial test: need 0 <= count <= n");
  if (!(p_model >= 0.0) || !(p_model <= 1.0))
    throw ParameterError("binomial test: p_model must lie in [0, 1]");
  if (count == 0) return 1.0;
  if (p_model == 0.0) return 0.0;
  if (p_model == 1.0) return 1.0;

  // Tail sum over j = count..n of C(n,j) p^j (1-p)^(n-j): find the largest
  // log term, then accumulate scaled terms so the sum never underflows.
  const double lp = std::log(p_model);
  const double lq = std::log1p(-p_model);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  std::vector<double> logterms;
  logterms.reserve(static_cast<std::size_t>(n - count + 1));
  double lmax = -std::numeric_limits<double>::infinity();
  for (long long j = count; j <= n; ++j) {
    const double lt = lgn - std::lgamma(static_cast<double>(j) + 1.0) -
                      std::lgamma(static_cast<double>(n - j) + 1.0) +
                      static_cast<double>(j) * lp +
                      static_cast<double>(n - j) * lq;
    logterms.push_back(lt);
    lmax = std::max(lmax, lt);
  }
  double s = 0.0;
  for (const double lt : logterms) s += std::exp(lt - lmax);
  return std::min(1.0, std::exp(lmax) * s);
}

ModelEntry model_entry(std::string label, const model::PccModel& m) {
  auto holder = std::make_shared<model::PccModel>(m);
  return {std::move(label), [holder](int n, std::uint64_t seed) {
            return holder->simulate(n, seed).u;
          }};
}

DistressReport distress_cube(const Eigen::MatrixXd& u_hist,
                             const std::vector<ModelEntry>& models,
                             const DistressConfig& cfg, std::uint64_t seed) {
  require_unit_open(u_hist, "distress_cube");
  const int d = static_cast<int>(u_hist.cols());
  const auto n = u_hist.rows();
  cfg.validate(d);

  const std::vector<Cell> cells = build_cells(d, cfg);
  const std::size_t nc = cells.size();

  DistressReport report;
  report.n_obs = static_cast<int>(n);
  report.n_sim = cfg.n_sim;
  report.n_boot = cfg.n_boot;
  for (const auto& m : models) report.model_labels.push_back(m.label);

  report.cells.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    CellResult& out = report.cells[c];
    out.axis = cells[c].axis;
    out.q = cells[c].q;
    out.k = cells[c].k;
    out.d_size = static_cast<int>(cells[c].subset.size());
    out.count = count_cell(u_hist, cells[c].q, cells[c].k, cells[c].subset);
    out.mdf_emp = static_cast<double>(out.count) / static_cast<double>(n);
  }

  // Bootstrap bands: resampled rows, per-column re-ranking, percentile 5/95.
  {
    const int B = cfg.n_boot;
    Eigen::MatrixXd boot(B, static_cast<Eigen::Index>(nc));
    math::parallel_for_blocks(
        static_cast<std::size_t>(B), 16,
        [&](std::size_t, std::size_t begin, std::size_t end) {
          for (std::size_t b = begin; b < end; ++b) {
            math::Rng rng(seed, 1000000 + b);
            const Eigen::MatrixXd ub = resample_and_rerank(u_hist, rng);
            for (std::size_t c = 0; c < nc; ++c) {
              boot(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(c)) =
                  static_cast<double>(count_cell(ub, cells[c].q, cells[c].k,
                                                 cells[c].subset)) /
                  static_cast<double>(n);
            }
          }
        });
    for (std::size_t c = 0; c < nc; ++c) {
      std::vector<double> v(static_cast<std::size_t>(B));
      for (int b = 0; b < B; ++b)
        v[static_cast<std::size_t>(b)] = boot(b, static_cast<Eigen::Index>(c));
      std::sort(v.begin(), v.end());
      const auto lo_idx = static_cast<std::size_t>(
          std::floor(0.05 * static_cast<double>(B - 1)));
      const auto hi_idx = static_cast<std::size_t>(
          std::ceil(0.95 * static_cast<double>(B - 1)));
      report.cells[c].band_lo = v[lo_idx];
      report.cells[c].band_hi = v[hi_idx];
    }
  }

  // Model MDF from chunked simulation, then one-sided binomial p-values
  // against the empirical counts.
  for (std::size_t m = 0; m < models.size(); ++m) {
    std::vector<long long> hits(nc, 0);
    long long done = 0;
    std::uint64_t chunk_id = 0;
    const std::uint64_t model_seed =
        seed + (static_cast<std::uint64_t>(m) + 1) * 0x9E3779B97F4A7C15ULL;
    while (done < cfg.n_sim) {
      const int take =
          static_cast<int>(std::min<long long>(kSimChunk, cfg.n_sim - done));
      const Eigen::MatrixXd us = models[m].simulate_u(take, model_seed + chunk_id);
      if (us.cols() != d)
        throw DataError("distress_cube: model dimension mismatch");
      require_unit_open(us, "distress_cube model sample");
      for (std::size_t c = 0; c < nc; ++c)
        hits[c] += count_cell(us, cells[c].q, cells[c].k, cells[c].subset);
      done += take;
      ++chunk_id;
    }
    for (std::size_t c = 0; c < nc; ++c) {
      const double p_model =
          static_cast<double>(hits[c]) / static_cast<double>(cfg.n_sim);
      report.cells[c].mdf_model.push_back(p_model);
      report.cells[c].p_value.push_back(
          binomial_distress_test(report.cells[c].count, n, p_model));
    }
  }
  return report;
}

std::string distress_csv(const DistressReport& report) {
  std::ostringstream out;
  out << "model,axis,q,k,d,mdf,count,p_value,band_lo,band_hi\n";
  const auto row_tail = [&](const CellResult& c) {
    out << ',' << io::format_double(c.q) << ',' << c.k << ',' << c.d_size;
  };
  for (const auto& c : report.cells) {
    out << "empirical," << c.axis;
    row_tail(c);
    out << ',' << io::format_double(c.mdf_emp) << ',' << c.count << ",,"
        << io::format_double(c.band_lo) << ','
        << io::format_double(c.band_hi) << '\n';
    for (std::size_t m = 0; m < report.model_labels.size(); ++m) {
      out << report.model_labels[m] << ',' << c.axis;
      row_tail(c);
      out << ',' << io::format_double(c.mdf_model[m]) << ',' << c.count << ','
          << io::format_double(c.p_value[m]) << ','
          << io::format_double(c.band_lo) << ','
          << io::format_double(c.band_hi) << '\n';
    }
  }
  return out.str();
}

std::string distress_json(const DistressReport& report) {
  nlohmann::ordered_json j;
  j["n_obs"] = report.n_obs;
  j["n_sim"] = report.n_sim;
  j["n_boot"] = report.n_boot;
  j["models"] = report.model_labels;
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : report.cells) {
    nlohmann::ordered_json cell;
    cell["axis"] = c.axis;
    cell["q"] = c.q;
    cell["k"] = c.k;
    cell["d"] = c.d_size;
    cell["count"] = c.count;
    cell["mdf"] = c.mdf_emp;
    cell["band_lo"] = c.band_lo;
    cell["band_hi"] = c.band_hi;
    cell["models"] = nlohmann::ordered_json::array();
    for (std::size_t m = 0; m < report.model_labels.size(); ++m) {
      cell["models"].push_back({{"label", report.model_labels[m]},
                                {"mdf", c.mdf_model[m]},
                                {"p_value", c.p_value[m]}});
    }
    j["cells"].push_back(std::move(cell));
  }
  return j.dump(2);
}

}  // namespace pcc::risk
