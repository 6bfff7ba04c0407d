#include "pcc_cli/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcc/dist.hpp"
#include "pcc/errors.hpp"
#include "pcc/estimate.hpp"
#include "pcc/garch.hpp"
#include "pcc/io.hpp"
#include "pcc/math/parallel.hpp"
#include "pcc/model.hpp"
#include "pcc/risk.hpp"
#include "pcc/taildep.hpp"

namespace pcc_cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// config file support: TOML through CLI11's own parser, JSON translated to
// the same item stream, dispatched on the first non-space character.
// ---------------------------------------------------------------------------

void json_items(const nlohmann::json& node, std::vector<std::string> parents,
                std::vector<CLI::ConfigItem>& out) {
  for (const auto& [key, val] : node.items()) {
    if (val.is_object()) {
      auto deeper = parents;
      deeper.push_back(key);
      json_items(val, std::move(deeper), out);
      continue;
    }
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = key;
    const auto to_str = [](const nlohmann::json& v) {
      return v.is_string() ? v.get<std::string>() : v.dump();
    };
    if (val.is_array()) {
      for (const auto& elem : val) item.inputs.push_back(to_str(elem));
    } else {
      item.inputs.push_back(to_str(val));
    }
    out.push_back(std::move(item));
  }
}

class SniffingConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also,
                        bool write_description, std::string prefix) const override {
    return CLI::ConfigTOML{}.to_config(app, default_also, write_description,
                                       prefix);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::stringstream buffer;
    buffer << input.rdbuf();
    const std::string text = buffer.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::exception& e) {
        throw CLI::FileError(std::string("config JSON parse failure: ") +
                             e.what());
      }
      std::vector<CLI::ConfigItem> items;
      json_items(j, {}, items);
      return items;
    }
    std::istringstream again(text);
    return CLI::ConfigTOML{}.from_config(again);
  }
};

// ---------------------------------------------------------------------------
// small shared helpers
// ---------------------------------------------------------------------------

std::string load_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pcc::DataError("cannot open file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw pcc::DataError("cannot write file: " + path.string());
  out << text;
  if (!out) throw pcc::DataError("write failed: " + path.string());
}

fs::path prepare_out_dir(const std::string& out_dir) {
  fs::path p = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec)
    throw pcc::ConfigError("cannot create output directory " + p.string() +
                           ": " + ec.message());
  return p;
}

void require_uniform(const Eigen::MatrixXd& u, const char* what) {
  if (!u.allFinite() || u.minCoeff() <= 0.0 || u.maxCoeff() >= 1.0)
    throw pcc::DataError(std::string(what) +
                         ": entries must lie strictly inside (0,1)");
}

std::vector<std::pair<int, int>> parse_pairs(
    const std::vector<std::string>& specs, int d) {
  std::vector<std::pair<int, int>> pairs;
  if (specs.empty()) {
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
    return pairs;
  }
  for (const auto& s : specs) {
    const auto dash = s.find('-');
    if (dash == std::string::npos)
      throw pcc::ConfigError("pair must look like i-j, got: " + s);
    int i = 0, j = 0;
    try {
      i = std::stoi(s.substr(0, dash));
      j = std::stoi(s.substr(dash + 1));
    } catch (const std::exception&) {
      throw pcc::ConfigError("pair must look like i-j, got: " + s);
    }
    if (i < 0 || j < 0 || i >= d || j >= d || i == j)
      throw pcc::ConfigError("pair out of range for dimension " +
                             std::to_string(d) + ": " + s);
    if (i > j) std::swap(i, j);
    pairs.emplace_back(i, j);
  }
  return pairs;
}

pcc::dist::CommonTail parse_common_tail(const std::string& name) {
  if (name == "none") return pcc::dist::CommonTail::None;
  if (name == "equal-dof") return pcc::dist::CommonTail::EqualDof;
  if (name == "equal-tail") return pcc::dist::CommonTail::EqualTail;
  throw pcc::ConfigError("unknown common-tail linkage: " + name);
}

struct ShapeStart {
  double nu = 10.0;
  double gamma = -1.0;
  double alpha = 1.5;
  double beta = -0.25;
  double nu_higher = 10.0;
  int hb_groups = 1;
  std::string common_tail = "none";
};

pcc::dist::GroupSpec make_spec(const std::string& name, int d,
                               const ShapeStart& s) {
  using pcc::dist::GroupSpec;
  const pcc::dist::CommonTail link = parse_common_tail(s.common_tail);
  if (name == "gauss") return GroupSpec::gauss(d);
  if (name == "t") return GroupSpec::student_t(d, s.nu);
  if (name == "skew-t") return GroupSpec::skew_t_market(d, s.nu, s.gamma);
  if (name == "hb-n") {
    if (s.hb_groups < 1 || s.hb_groups >= d)
      throw pcc::ConfigError("hb-groups must lie in [1, d-1]");
    std::vector<std::pair<double, double>> ab(
        static_cast<std::size_t>(s.hb_groups), {s.alpha, s.beta});
    return GroupSpec::hyperbolic_normal(d, ab);
  }
  if (name == "skew-t1-t1" || name == "skew-t1-td-1") {
    double nu1 = s.nu;
    double nuh = s.nu_higher;
    if (link != pcc::dist::CommonTail::None) {
      const auto linked = pcc::dist::linked_dofs(link, s.nu_higher);
      nu1 = linked.first;
      nuh = linked.second;
    }
    GroupSpec spec = (name == "skew-t1-t1")
                         ? GroupSpec::skew_t1_t1(d, nu1, s.gamma, nuh)
                         : GroupSpec::skew_t1_t_rest(d, nu1, s.gamma, nuh);
    spec.common_tail = link;
    return spec;
  }
  throw pcc::ConfigError(
      "unknown spec name: " + name +
      " (expected gauss, t, skew-t, hb-n, skew-t1-t1, skew-t1-td-1)");
}

ordered_json garch_fit_json(const std::string& name,
                            const pcc::garch::GarchFit& f, double lb_p) {
  ordered_json j;
  j["name"] = name;
  j["delta"] = f.delta;
  j["phi"] = f.phi;
  j["omega"] = f.omega;
  j["alpha_g"] = f.alpha_g;
  j["beta_g"] = f.beta_g;
  j["loglik"] = f.loglik;
  j["converged"] = f.converged;
  ordered_json se;
  const char* names[5] = {"delta", "phi", "omega", "alpha_g", "beta_g"};
  for (int i = 0; i < 5; ++i)
    se[names[i]] = std::isfinite(f.std_err[i]) ? ordered_json(f.std_err[i])
                                               : ordered_json(nullptr);
  j["std_err"] = std::move(se);
  j["ljung_box_p_squared_lag10"] = lb_p;
  return j;
}

// ---------------------------------------------------------------------------
// verbs
// ---------------------------------------------------------------------------

struct CommonOpts {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out_dir = ".";
};

int cmd_filter(const CommonOpts& common, const std::string& input) {
  const fs::path out = prepare_out_dir(common.out_dir);
  const pcc::io::CsvTable t = pcc::io::read_csv(input);
  if (t.labels.empty())
    throw pcc::DataError(
        "filter: input needs a leading date/label column before the numeric "
        "series");
  if (t.rows() < 200)
    throw pcc::DataError("filter: at least 200 rows required");
  for (int j = 0; j < t.cols(); ++j) {
    const double lo = t.values.col(j).minCoeff();
    const double hi = t.values.col(j).maxCoeff();
    if (lo == hi)
      throw pcc::DataError("filter: column " + t.column_names[static_cast<std::size_t>(j)] +
                           " is constant: degenerate margin");
  }

  const std::vector<pcc::garch::GarchFit> fits =
      pcc::garch::fit_ar_garch_panel(t.values);
  const Eigen::MatrixXd x = pcc::garch::filter_panel(t.values, fits);

  pcc::io::CsvTable res;
  res.column_names = t.column_names;
  res.label_header = t.label_header;
  res.labels.assign(t.labels.begin() + 1, t.labels.end());
  res.values = x;
  pcc::io::write_csv(out / "residuals.csv", res, 0);

  ordered_json report;
  report["n_input_rows"] = t.rows();
  report["n_residual_rows"] = static_cast<int>(x.rows());
  report["series"] = ordered_json::array();
  for (int j = 0; j < t.cols(); ++j) {
    const double lb =
        pcc::garch::ljung_box_pvalue(x.col(j).array().square(), 10);
    report["series"].push_back(
        garch_fit_json(t.column_names[static_cast<std::size_t>(j)],
                       fits[static_cast<std::size_t>(j)], lb));
  }
  write_text(out / "garch_params.json", report.dump(2) + "\n");

  std::cout << "filter: " << t.cols() << " series, " << t.rows()
            << " rows -> " << x.rows() << " residual rows; outputs "
            << (out / "residuals.csv").string() << ", "
            << (out / "garch_params.json").string() << "\n";
  return 0;
}

struct FitOpts {
  std::string input;
  std::string spec = "gauss";
  std::string method = "gmm";
  std::string corr = "two-factor";
  ShapeStart shape;
  pcc::estimate::FitConfig fc;
  int bootstrap = 0;
  bool allow_nonconverged = false;
};

int cmd_fit(const CommonOpts& common, const FitOpts& opt) {
  const fs::path out = prepare_out_dir(common.out_dir);
  const pcc::io::CsvTable t = pcc::io::read_csv(opt.input);
  const int d = t.cols();
  if (d < 2) throw pcc::DataError("fit: at least two columns required");
  const pcc::model::CopulaSample u =
      pcc::estimate::ranks_to_pseudo_obs(t.values);
  const pcc::dist::GroupSpec spec = make_spec(opt.spec, d, opt.shape);

  pcc::estimate::FitConfig fc = opt.fc;
  fc.validate();

  pcc::estimate::CorrelationModel corr =
      pcc::estimate::CorrelationModel::fixed(Eigen::MatrixXd::Identity(d, d));
  pcc::estimate::FitMethod method = pcc::estimate::FitMethod::GmmHybrid;
  pcc::estimate::FitResult result;
  if (opt.method == "gmm") {
    result = pcc::estimate::fit_gmm_hybrid(u, spec, fc);
  } else if (opt.method == "mle") {
    method = pcc::estimate::FitMethod::Mle;
    if (opt.corr == "fixed") {
      corr = pcc::estimate::CorrelationModel::fixed(
          pcc::estimate::init_normal_scores(u).rho);
    } else if (opt.corr == "equi") {
      corr = pcc::estimate::CorrelationModel::equicorrelation(d);
    } else if (opt.corr == "two-factor") {
      corr = pcc::estimate::CorrelationModel::two_factor(d);
    } else if (opt.corr == "free") {
      corr = pcc::estimate::CorrelationModel::free_lower_triangle(d);
    } else {
      throw pcc::ConfigError("unknown corr model: " + opt.corr +
                             " (expected fixed, equi, two-factor, free)");
    }
    result = pcc::estimate::fit_mle(u, spec, corr, fc);
  } else {
    throw pcc::ConfigError("unknown method: " + opt.method +
                           " (expected gmm or mle)");
  }

  write_text(out / "model.json", pcc::model::to_json(result.fitted) + "\n");
  write_text(out / "fit_report.json",
             pcc::estimate::fit_report_json(result, opt.spec) + "\n");

  if (opt.bootstrap > 0) {
    const pcc::estimate::BootstrapResult bs = pcc::estimate::bootstrap_se(
        t.values, spec, method, corr, opt.bootstrap, common.seed, fc);
    ordered_json j;
    j["n_boot"] = opt.bootstrap;
    j["n_ok"] = static_cast<int>(bs.replicates.rows());
    j["failures"] = bs.failures;
    j["names"] = bs.names;
    j["sd"] = bs.sd;
    write_text(out / "bootstrap.json", j.dump(2) + "\n");
  }

  std::cout << "fit: spec=" << opt.spec << " method=" << opt.method
            << " loglik=" << pcc::io::format_double(result.loglik)
            << " aic=" << pcc::io::format_double(result.aic)
            << " iterations=" << result.iterations
            << " converged=" << (result.converged ? "yes" : "no") << "\n";

  if (!result.converged && !opt.allow_nonconverged) {
    std::cerr << "fit did not converge within the configured budget; outputs "
                 "were written (pass --allow-nonconverged to exit 0)\n";
    return 4;
  }
  return 0;
}

int cmd_simulate(const CommonOpts& common, const std::string& model_path,
                 int n) {
  if (n < 1) throw pcc::ConfigError("simulate: n must be positive");
  const fs::path out = prepare_out_dir(common.out_dir);
  const pcc::model::PccModel m =
      pcc::model::model_from_json(load_text(model_path));
  const int d = m.dim();

  const fs::path target = out / "sample.csv";
  std::ofstream file(target, std::ios::binary);
  if (!file) throw pcc::DataError("cannot write file: " + target.string());
  for (int j = 0; j < d; ++j) file << (j ? "," : "") << "u_" << (j + 1);
  file << "\n";

  constexpr int kChunk = 65536;
  std::uint64_t chunk_id = 0;
  int done = 0;
  while (done < n) {
    const int take = std::min(kChunk, n - done);
    const pcc::model::CopulaSample s =
        m.simulate(take, common.seed + chunk_id);
    for (int r = 0; r < take; ++r) {
      for (int j = 0; j < d; ++j) {
        if (j) file << ',';
        file << pcc::io::format_double_17(s.u(r, j));
      }
      file << '\n';
    }
    done += take;
    ++chunk_id;
  }
  file.flush();
  if (!file) throw pcc::DataError("write failed: " + target.string());
  std::cout << "simulate: " << n << " rows, " << d << " columns -> "
            << target.string() << "\n";
  return 0;
}

struct TailOpts {
  std::string model_path;
  std::vector<std::string> pairs;
  std::vector<double> q_seq;
  int n_sim = 200000;
};

int cmd_tail(const CommonOpts& common, const TailOpts& opt) {
  const fs::path out = prepare_out_dir(common.out_dir);
  const pcc::model::PccModel m =
      pcc::model::model_from_json(load_text(opt.model_path));
  const int d = m.dim();
  const auto pairs = parse_pairs(opt.pairs, d);

  std::vector<double> qs =
      opt.q_seq.empty() ? pcc::taildep::default_q_sequence() : opt.q_seq;
  std::sort(qs.begin(), qs.end(), std::greater<double>());
  qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
  for (const double q : qs)
    if (!(q > 0.0) || q > 0.5)
      throw pcc::ConfigError("tail: quantiles must lie in (0, 0.5]");

  std::ostringstream csv;
  csv << "i,j,side,q,eta_q\n";
  ordered_json jpairs = ordered_json::array();

  if (d == 2) {
    for (const auto& [i, j] : pairs) {
      const auto lower = pcc::taildep::numeric_tail_limit(m, i, j, qs, false);
      const auto upper = pcc::taildep::numeric_tail_limit(m, i, j, qs, true);
      for (std::size_t k = 0; k < lower.q.size(); ++k)
        csv << i << ',' << j << ",lower," << pcc::io::format_double(lower.q[k])
            << ',' << pcc::io::format_double(lower.eta_q[k]) << '\n';
      for (std::size_t k = 0; k < upper.q.size(); ++k)
        csv << i << ',' << j << ",upper," << pcc::io::format_double(upper.q[k])
            << ',' << pcc::io::format_double(upper.eta_q[k]) << '\n';
      ordered_json p;
      p["i"] = i;
      p["j"] = j;
      p["eta_lower"] = lower.eta;
      p["eta_upper"] = upper.eta;
      p["method"] = "numeric-limit";
      p["truncated"] = lower.truncated || upper.truncated;
      jpairs.push_back(std::move(p));
    }
  } else {
    pcc::model::CopulaSample sim = m.simulate(opt.n_sim, common.seed);
    pcc::model::CopulaSample flipped;
    flipped.u = (1.0 - sim.u.array()).matrix();
    std::vector<Eigen::MatrixXd> low, up;
    for (const double q : qs) {
      low.push_back(pcc::taildep::mc_cpjqe(sim, q).eta);
      up.push_back(pcc::taildep::mc_cpjqe(flipped, q).eta);
    }
    for (const auto& [i, j] : pairs) {
      std::vector<double> lo_curve, up_curve;
      for (std::size_t k = 0; k < qs.size(); ++k) {
        lo_curve.push_back(low[k](i, j));
        up_curve.push_back(up[k](i, j));
        csv << i << ',' << j << ",lower," << pcc::io::format_double(qs[k])
            << ',' << pcc::io::format_double(low[k](i, j)) << '\n';
        csv << i << ',' << j << ",upper," << pcc::io::format_double(qs[k])
            << ',' << pcc::io::format_double(up[k](i, j)) << '\n';
      }
      ordered_json p;
      p["i"] = i;
      p["j"] = j;
      p["eta_lower"] = pcc::taildep::extrapolate_eta(qs, lo_curve);
      p["eta_upper"] = pcc::taildep::extrapolate_eta(qs, up_curve);
      p["method"] = "monte-carlo";
      p["truncated"] = false;
      jpairs.push_back(std::move(p));
    }
  }

  ordered_json report;
  report["model"] = opt.model_path;
  report["q_sequence"] = qs;
  report["n_sim"] = (d == 2) ? 0 : opt.n_sim;
  report["pairs"] = std::move(jpairs);
  // The closed form applies to the two-dimensional hyperbolic-normal case.
  const auto& groups = m.spec().groups;
  if (d == 2 && groups.size() == 2 &&
      groups[0].family == pcc::dist::GeneratorFamily::Hyperbolic &&
      groups[1].family == pcc::dist::GeneratorFamily::Normal) {
    const auto analytic = pcc::taildep::hb_n_tail_coeffs(
        groups[0].alpha, groups[0].beta, m.lambda()[1]);
    report["analytic"] = {{"eta_lower", analytic.eta_lower},
                          {"eta_upper", analytic.eta_upper}};
  }

  write_text(out / "tail.csv", csv.str());
  write_text(out / "tail.json", report.dump(2) + "\n");
  std::cout << "tail: " << pairs.size() << " pairs, " << qs.size()
            << " quantiles -> " << (out / "tail.csv").string() << ", "
            << (out / "tail.json").string() << "\n";
  return 0;
}

struct RiskOpts {
  std::string input;
  std::string input_kind = "ranks";
  std::vector<std::string> model_paths;
  std::vector<double> q_grid;
  std::vector<double> kd_grid;
  std::vector<int> d_sizes;
  double fixed_q = 0.0;  // 0 = keep default
  int n_sim = 0;         // 0 = keep default
  int n_boot = 0;        // 0 = keep default
  int cpjqe_n_sim = 200000;
  std::vector<std::string> pairs;
};

int cmd_risk(const CommonOpts& common, const RiskOpts& opt) {
  const fs::path out = prepare_out_dir(common.out_dir);
  const pcc::io::CsvTable t = pcc::io::read_csv(opt.input);
  const int d = t.cols();
  if (d < 2) throw pcc::DataError("risk: at least two columns required");

  Eigen::MatrixXd u;
  if (opt.input_kind == "ranks") {
    u = pcc::estimate::ranks_to_pseudo_obs(t.values).u;
  } else if (opt.input_kind == "uniform") {
    require_uniform(t.values, "risk");
    u = t.values;
  } else {
    throw pcc::ConfigError("unknown input-kind: " + opt.input_kind +
                           " (expected ranks or uniform)");
  }

  std::vector<pcc::model::PccModel> models;
  std::vector<pcc::risk::ModelEntry> entries;
  std::vector<std::string> labels;
  for (const auto& path : opt.model_paths) {
    pcc::model::PccModel m = pcc::model::model_from_json(load_text(path));
    if (m.dim() != d)
      throw pcc::DataError("risk: model dimension " +
                           std::to_string(m.dim()) + " does not match data " +
                           std::to_string(d) + " (" + path + ")");
    // A generic file name like model.json takes its parent directory as the
    // label; duplicates get a numeric suffix.
    fs::path p(path);
    std::string label = p.stem().string();
    if (label == "model" && p.has_parent_path() &&
        !p.parent_path().filename().string().empty())
      label = p.parent_path().filename().string();
    std::string unique = label;
    for (int k = 2; std::find(labels.begin(), labels.end(), unique) !=
                    labels.end();
         ++k)
      unique = label + "_" + std::to_string(k);
    labels.push_back(unique);
    entries.push_back(pcc::risk::model_entry(unique, m));
    models.push_back(std::move(m));
  }

  pcc::risk::DistressConfig cfg = pcc::risk::default_config(d);
  if (!opt.q_grid.empty()) cfg.q_grid = opt.q_grid;
  if (!opt.kd_grid.empty()) cfg.k_over_d_grid = opt.kd_grid;
  if (!opt.d_sizes.empty()) cfg.d_axis_sizes = opt.d_sizes;
  if (opt.fixed_q > 0.0) cfg.fixed_q = opt.fixed_q;
  if (opt.n_sim > 0) cfg.n_sim = opt.n_sim;
  if (opt.n_boot > 0) cfg.n_boot = opt.n_boot;

  const pcc::risk::DistressReport report =
      pcc::risk::distress_cube(u, entries, cfg, common.seed);
  write_text(out / "distress_report.csv", pcc::risk::distress_csv(report));
  write_text(out / "distress_report.json",
             pcc::risk::distress_json(report) + "\n");

  // Pairwise CPJQE curves, long format, empirical and per model.
  const auto pairs = parse_pairs(opt.pairs, d);
  std::ostringstream csv;
  csv << "source,i,j,q,eta,n_used,reliable\n";
  const auto emit = [&](const std::string& source, double q,
                        const pcc::taildep::CpjqeEstimate& est) {
    for (const auto& [i, j] : pairs)
      csv << source << ',' << i << ',' << j << ','
          << pcc::io::format_double(q) << ','
          << pcc::io::format_double(est.eta(i, j)) << ',' << est.n_used << ','
          << (est.reliable ? 1 : 0) << '\n';
  };
  pcc::model::CopulaSample hist;
  hist.u = u;
  for (const double q : cfg.q_grid)
    emit("empirical", q, pcc::taildep::mc_cpjqe(hist, q));
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const pcc::model::CopulaSample sim = models[mi].simulate(
        opt.cpjqe_n_sim, common.seed + 7919 * (static_cast<std::uint64_t>(mi) + 1));
    for (const double q : cfg.q_grid)
      emit(report.model_labels[mi], q, pcc::taildep::mc_cpjqe(sim, q));
  }
  write_text(out / "cpjqe.csv", csv.str());

  std::cout << "risk: " << report.cells.size() << " cube cells, "
            << entries.size() << " models, n=" << report.n_obs
            << " -> distress_report.csv, distress_report.json, cpjqe.csv in "
            << out.string() << "\n";
  return 0;
}

int cmd_report(const CommonOpts& common,
               const std::vector<std::string>& report_paths) {
  if (report_paths.empty())
    throw pcc::ConfigError("report: at least one fit report required");
  const fs::path out = prepare_out_dir(common.out_dir);

  struct Row {
    std::string label;
    double loglik = 0, aic = 0, bic = 0;
    int n_obs = 0, n_shape = 0;
  };
  std::vector<Row> rows;
  for (const auto& path : report_paths) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(load_text(path));
    } catch (const nlohmann::json::exception& e) {
      throw pcc::DataError("report: cannot parse " + path + ": " + e.what());
    }
    for (const char* key : {"label", "loglik", "aic", "bic", "n_obs",
                            "n_shape_params"}) {
      if (!j.contains(key))
        throw pcc::DataError("report: " + path + " is missing field " + key);
    }
    rows.push_back({j["label"].get<std::string>(), j["loglik"].get<double>(),
                    j["aic"].get<double>(), j["bic"].get<double>(),
                    j["n_obs"].get<int>(), j["n_shape_params"].get<int>()});
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].n_obs != rows[0].n_obs)
      throw pcc::DataError(
          "report: fits were computed on different sample sizes");
  }

  std::ostringstream csv;
  csv << "label,loglik,n_shape_params,aic,bic,delta_aic,delta_bic\n";
  ordered_json jrows = ordered_json::array();
  for (const auto& r : rows) {
    const double da = r.aic - rows[0].aic;
    const double db = r.bic - rows[0].bic;
    csv << r.label << ',' << pcc::io::format_double(r.loglik) << ','
        << r.n_shape << ',' << pcc::io::format_double(r.aic) << ','
        << pcc::io::format_double(r.bic) << ','
        << pcc::io::format_double(da) << ',' << pcc::io::format_double(db)
        << '\n';
    jrows.push_back({{"label", r.label},
                     {"loglik", r.loglik},
                     {"n_shape_params", r.n_shape},
                     {"aic", r.aic},
                     {"bic", r.bic},
                     {"delta_aic", da},
                     {"delta_bic", db}});
  }
  ordered_json j;
  j["baseline"] = rows[0].label;
  j["n_obs"] = rows[0].n_obs;
  j["models"] = std::move(jrows);
  write_text(out / "report.csv", csv.str());
  write_text(out / "report.json", j.dump(2) + "\n");
  std::cout << "report: " << rows.size() << " fits, baseline " << rows[0].label
            << " -> report.csv, report.json in " << out.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"principal component copulas: filtering, estimation, "
               "simulation, tail dependence and distress-cube backtesting"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.set_config("--config")->description(
      "TOML or JSON config file mirroring the command options");
  app.config_formatter(std::make_shared<SniffingConfig>());

  CommonOpts common;
  app.add_option("--seed", common.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", common.threads,
                 "worker thread cap (0 = hardware)")
      ->capture_default_str();
  app.add_option("--out-dir", common.out_dir, "output directory")
      ->capture_default_str();

  // filter
  std::string filter_input;
  CLI::App* filter =
      app.add_subcommand("filter", "AR(1)-GARCH(1,1) filter returns into "
                                   "devolatized residuals");
  filter->configurable(true);
  filter->add_option("--input", filter_input,
                     "return CSV: date column plus one numeric column per "
                     "index")
      ->required();

  // fit
  FitOpts fit_opts;
  CLI::App* fit = app.add_subcommand(
      "fit", "estimate a PCC on rank pseudo-observations of the input");
  fit->configurable(true);
  fit->add_option("--input", fit_opts.input, "residual or return CSV")
      ->required();
  fit->add_option("--spec", fit_opts.spec,
                  "gauss, t, skew-t, hb-n, skew-t1-t1, skew-t1-td-1")
      ->capture_default_str();
  fit->add_option("--method", fit_opts.method, "gmm or mle")
      ->capture_default_str();
  fit->add_option("--corr", fit_opts.corr,
                  "mle correlation model: fixed, equi, two-factor, free")
      ->capture_default_str();
  fit->add_option("--nu", fit_opts.shape.nu, "start dof (first generator)")
      ->capture_default_str();
  fit->add_option("--gamma", fit_opts.shape.gamma, "start skewness")
      ->capture_default_str();
  fit->add_option("--alpha", fit_opts.shape.alpha, "start hyperbolic alpha")
      ->capture_default_str();
  fit->add_option("--beta", fit_opts.shape.beta, "start hyperbolic beta")
      ->capture_default_str();
  fit->add_option("--nu-higher", fit_opts.shape.nu_higher,
                  "start dof of the higher t generators")
      ->capture_default_str();
  fit->add_option("--hb-groups", fit_opts.shape.hb_groups,
                  "number of leading hyperbolic generators for hb-n")
      ->capture_default_str();
  fit->add_option("--common-tail", fit_opts.shape.common_tail,
                  "dof linkage: none, equal-dof, equal-tail")
      ->capture_default_str();
  fit->add_option("--max-iterations", fit_opts.fc.max_iterations,
                  "hybrid sweeps")
      ->capture_default_str();
  fit->add_option("--corr-tol", fit_opts.fc.corr_tol,
                  "Frobenius tolerance on rho")
      ->capture_default_str();
  fit->add_option("--shape-tol", fit_opts.fc.shape_tol,
                  "max-abs tolerance on the shape vector")
      ->capture_default_str();
  fit->add_option("--max-evals", fit_opts.fc.max_evals,
                  "inner optimizer budget")
      ->capture_default_str();
  fit->add_option("--table-grid", fit_opts.fc.table_grid,
                  "marginal grid during optimization")
      ->capture_default_str();
  fit->add_option("--final-table-grid", fit_opts.fc.final_table_grid,
                  "marginal grid of the returned model")
      ->capture_default_str();
  fit->add_option("--bootstrap", fit_opts.bootstrap,
                  "bootstrap replicates for standard errors (0 = off)")
      ->capture_default_str();
  fit->add_flag("--allow-nonconverged", fit_opts.allow_nonconverged,
                "exit 0 even when the fit did not converge");

  // simulate
  std::string sim_model;
  int sim_n = 0;
  CLI::App* sim =
      app.add_subcommand("simulate", "draw copula observations from a model");
  sim->configurable(true);
  sim->add_option("--model", sim_model, "model.json path")->required();
  sim->add_option("--n", sim_n, "number of rows")->required();

  // tail
  TailOpts tail_opts;
  CLI::App* tail = app.add_subcommand(
      "tail", "pairwise tail dependence curves and q -> 0 limits");
  tail->configurable(true);
  tail->add_option("--model", tail_opts.model_path, "model.json path")
      ->required();
  tail->add_option("--pairs", tail_opts.pairs,
                   "pairs as i-j (default: all pairs)")
      ->delimiter(',');
  tail->add_option("--q-seq", tail_opts.q_seq,
                   "quantile sequence (default 0.02,0.01,0.005,0.0025)")
      ->delimiter(',');
  tail->add_option("--n-sim", tail_opts.n_sim,
                   "simulation size for d > 2 models")
      ->capture_default_str();

  // risk
  RiskOpts risk_opts;
  CLI::App* risk = app.add_subcommand(
      "risk", "market distress cube, binomial backtests, CPJQE curves");
  risk->configurable(true);
  risk->add_option("--input", risk_opts.input,
                   "historical CSV (residuals or uniform sample)")
      ->required();
  risk->add_option("--input-kind", risk_opts.input_kind,
                   "ranks (rank-transform the input) or uniform")
      ->capture_default_str();
  risk->add_option("--model", risk_opts.model_paths,
                   "model.json paths (repeatable)");
  risk->add_option("--q-grid", risk_opts.q_grid, "quantile axis")
      ->delimiter(',');
  risk->add_option("--kd-grid", risk_opts.kd_grid, "k/d axis")->delimiter(',');
  risk->add_option("--d-sizes", risk_opts.d_sizes,
                   "dimension axis subset sizes")
      ->delimiter(',');
  risk->add_option("--fixed-q", risk_opts.fixed_q,
                   "q used by the k/d and dimension axes");
  risk->add_option("--n-sim", risk_opts.n_sim, "model simulation size");
  risk->add_option("--n-boot", risk_opts.n_boot, "bootstrap replicates");
  risk->add_option("--cpjqe-n-sim", risk_opts.cpjqe_n_sim,
                   "simulation size for model CPJQE curves")
      ->capture_default_str();
  risk->add_option("--pairs", risk_opts.pairs,
                   "CPJQE pairs as i-j (default: all pairs)")
      ->delimiter(',');

  // report
  std::vector<std::string> report_paths;
  CLI::App* report = app.add_subcommand(
      "report", "model comparison table from fit reports");
  report->configurable(true);
  report->add_option("--fit-report", report_paths,
                     "fit_report.json paths in comparison order (first is "
                     "the baseline)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  pcc::math::thread_limit() = common.threads;

  try {
    if (filter->parsed()) return cmd_filter(common, filter_input);
    if (fit->parsed()) return cmd_fit(common, fit_opts);
    if (sim->parsed()) return cmd_simulate(common, sim_model, sim_n);
    if (tail->parsed()) return cmd_tail(common, tail_opts);
    if (risk->parsed()) return cmd_risk(common, risk_opts);
    if (report->parsed()) return cmd_report(common, report_paths);
    std::cerr << app.help();
    return 2;
  } catch (const pcc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pcc::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pcc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const pcc::NonConvergenceError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const pcc::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pcc_cli
