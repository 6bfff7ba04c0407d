#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pcc/model.hpp"

namespace pcc::risk {

// Axes of the market distress cube. The q axis runs at full dimension with
// k/d = 1, the k/d axis at fixed_q and full dimension, and the dimension axis
// at fixed_q with k equal to the subset size. Dimension subsets are nested
// prefixes of index_order.
struct DistressConfig {
  std::vector<double> q_grid{0.05, 0.10, 0.15, 0.20};
  std::vector<double> k_over_d_grid{0.25, 0.50, 0.75, 1.00};
  std::vector<int> d_axis_sizes;   // empty disables the dimension axis
  std::vector<int> index_order;    // required when d_axis_sizes is nonempty
  double fixed_q = 0.20;
  int n_sim = 200000;
  int n_boot = 1000;

  void validate(int d) const;
};

// All three axes populated for a d-dimensional sample: quartile subset sizes
// in natural index order, Table-style q grid.
DistressConfig default_config(int d);

// Market distress ratio of one observation: fraction of entries at or below q.
double mdr(const Eigen::VectorXd& u_row, double q);

// Relative market distress frequency: share of rows whose subset MDR reaches
// k / |subset|. `subset` holds zero-based column indices.
double mdf(const Eigen::MatrixXd& u, double q, int k,
           const std::vector<int>& subset);

// One-sided exact binomial p-value P[Bin(n, p_model) >= count], accumulated
// in log space.
double binomial_distress_test(long long count, long long n, double p_model);

// A label plus a way to draw n copula rows; adapts PCC models and any
// benchmark simulator to the cube.
struct ModelEntry {
  std::string label;
  std::function<Eigen::MatrixXd(int n, std::uint64_t seed)> simulate_u;
};

ModelEntry model_entry(std::string label, const model::PccModel& m);

struct CellResult {
  std::string axis;  // "q", "k" or "d"
  double q = 0.0;
  int k = 0;
  int d_size = 0;
  long long count = 0;  // empirical MDI count
  double mdf_emp = 0.0;
  double band_lo = 0.0;  // bootstrap percentile band for the empirical MDF
  double band_hi = 0.0;
  std::vector<double> mdf_model;  // aligned with DistressReport::model_labels
  std::vector<double> p_value;
};

struct DistressReport {
  std::vector<std::string> model_labels;
  std::vector<CellResult> cells;
  int n_obs = 0;
  int n_sim = 0;
  int n_boot = 0;
};

// Empirical cube + per-model simulated MDF and binomial p-values + bootstrap
// bands (row resample with per-column re-ranking, percentile 5%/95%).
DistressReport distress_cube(const Eigen::MatrixXd& u_hist,
                             const std::vector<ModelEntry>& models,
                             const DistressConfig& cfg, std::uint64_t seed);

// One CSV row per cube cell per model (plus an "empirical" row per cell):
// model, axis, q, k, d, mdf, count, p_value, band_lo, band_hi.
std::string distress_csv(const DistressReport& report);
std::string distress_json(const DistressReport& report);

}  // namespace pcc::risk
