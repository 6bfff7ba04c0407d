// End-to-end exercise of the pcc command-line tool. Takes the binary path as
// argv[1], synthesizes a return panel, then drives filter -> fit -> simulate
// -> tail -> risk -> report, checking exit codes, output shape, determinism,
// and the config-file routes.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"
#include "pcc/dist.hpp"
#include "pcc/io.hpp"
#include "pcc/math/normal.hpp"
#include "pcc/model.hpp"

namespace fs = std::filesystem;

static int checks = 0, fails = 0;
static void check(bool ok, const std::string& what) {
  ++checks;
  if (!ok) {
    ++fails;
    std::printf("FAIL %s\n", what.c_str());
  }
}

static int run(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

static std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::printf("usage: pcc_cli_tests <path-to-pcc>\n");
    return 2;
  }
  const std::string pcc = argv[1];
  const fs::path root =
      fs::temp_directory_path() / ("pcc_cli_test_" + std::to_string(getpid()));
  fs::create_directories(root);

  // --- synthetic AR(1)-GARCH(1,1) panel driven by a hyperbolic-normal PCC ---
  const int d = 4, n = 900;
  Eigen::MatrixXd rho = Eigen::MatrixXd::Constant(d, d, 0.45);
  rho.diagonal().setOnes();
  const auto m_true = pcc::model::PccModel::build(
      rho, pcc::dist::GroupSpec::hyperbolic_normal(d, {{1.3, -0.35}}));
  const auto sim = m_true.simulate(n, 2024);
  pcc::io::CsvTable panel;
  panel.label_header = "date";
  panel.values.resize(n, d);
  for (int j = 0; j < d; ++j)
    panel.column_names.push_back("idx_" + std::to_string(j + 1));
  const double delta = 0.0004, phi = -0.04, omega = 0.02, ag = 0.08,
               bg = 0.85;
  std::vector<double> s2(d, omega / (1.0 - ag - bg)), e_prev(d, 0.0),
      r_prev(d, 0.0);
  for (int t = 0; t < n; ++t) {
    panel.labels.push_back("t" + std::to_string(t));
    for (int j = 0; j < d; ++j) {
      if (t > 0) s2[j] = omega + ag * e_prev[j] * e_prev[j] + bg * s2[j];
      const double eps =
          std::sqrt(s2[j]) * pcc::math::norm_quantile(sim.u(t, j));
      const double r = delta + phi * r_prev[j] + eps;
      e_prev[j] = eps;
      r_prev[j] = r;
      panel.values(t, j) = r;
    }
  }
  const fs::path returns = root / "returns.csv";
  pcc::io::write_csv(returns, panel);

  // --- filter ---
  const fs::path flt = root / "flt";
  check(run(pcc + " filter --input " + returns.string() + " --out-dir " +
            flt.string()) == 0,
        "filter exits 0");
  check(fs::exists(flt / "residuals.csv"), "residuals.csv written");
  const auto resid = pcc::io::read_csv(flt / "residuals.csv");
  check(resid.rows() == n - 1 && resid.cols() == d,
        "residuals are (n-1) x d");
  {
    const auto gj = nlohmann::json::parse(slurp(flt / "garch_params.json"));
    check(gj["series"].size() == (std::size_t)d, "one garch entry per column");
    bool conv = true;
    for (const auto& s : gj["series"]) conv = conv && s["converged"];
    check(conv, "all garch fits converged");
  }

  // --- fit: gauss and hb-n ---
  const fs::path fit_g = root / "fit_gauss", fit_h = root / "fit_hbn";
  check(run(pcc + " fit --input " + (flt / "residuals.csv").string() +
            " --spec gauss --out-dir " + fit_g.string()) == 0,
        "fit gauss exits 0");
  check(run(pcc + " fit --input " + (flt / "residuals.csv").string() +
            " --spec hb-n --out-dir " + fit_h.string()) == 0,
        "fit hb-n exits 0");
  double ll_g = 0.0, ll_h = 0.0;
  {
    const auto rg = nlohmann::json::parse(slurp(fit_g / "fit_report.json"));
    const auto rh = nlohmann::json::parse(slurp(fit_h / "fit_report.json"));
    ll_g = rg["loglik"];
    ll_h = rh["loglik"];
    check(rg["converged"] && rh["converged"], "both fits converged");
    check(ll_h > ll_g, "hb-n beats gauss on heavy-tailed data");
    check(rh["shape"].contains("alpha1") && rh["shape"].contains("beta1"),
          "hb-n report carries shape parameters");
  }
  // refit into a second directory: outputs byte-identical
  const fs::path fit_h2 = root / "fit_hbn2";
  run(pcc + " fit --input " + (flt / "residuals.csv").string() +
      " --spec hb-n --out-dir " + fit_h2.string());
  check(slurp(fit_h / "model.json") == slurp(fit_h2 / "model.json"),
        "fit deterministic: model.json byte-identical");

  // --- simulate: shape, range, determinism ---
  const fs::path sim1 = root / "sim1", sim2 = root / "sim2";
  check(run(pcc + " simulate --model " + (fit_h / "model.json").string() +
            " --n 20000 --seed 7 --out-dir " + sim1.string()) == 0,
        "simulate exits 0");
  run(pcc + " simulate --model " + (fit_h / "model.json").string() +
      " --n 20000 --seed 7 --out-dir " + sim2.string());
  check(slurp(sim1 / "sample.csv") == slurp(sim2 / "sample.csv"),
        "simulate deterministic for a fixed seed");
  {
    const auto s = pcc::io::read_csv(sim1 / "sample.csv");
    check(s.rows() == 20000 && s.cols() == d, "sample is n x d");
    check(s.values.minCoeff() > 0.0 && s.values.maxCoeff() < 1.0,
          "sample inside the open unit cube");
  }

  // --- tail ---
  const fs::path tl = root / "tail";
  check(run(pcc + " tail --model " + (fit_h / "model.json").string() +
            " --n-sim 50000 --seed 3 --out-dir " + tl.string()) == 0,
        "tail exits 0");
  {
    const auto tj = nlohmann::json::parse(slurp(tl / "tail.json"));
    check(tj["pairs"].size() == (std::size_t)(d * (d - 1) / 2),
          "tail covers all pairs");
    bool in_range = true;
    for (const auto& p : tj["pairs"]) {
      const double lo = p["eta_lower"], up = p["eta_upper"];
      in_range = in_range && lo >= 0.0 && lo <= 1.0 && up >= 0.0 && up <= 1.0;
    }
    check(in_range, "tail coefficients inside [0, 1]");
    const std::string tc = slurp(tl / "tail.csv");
    const long lines = std::count(tc.begin(), tc.end(), '\n');
    check(lines == 1 + (long)tj["q_sequence"].size() * d * (d - 1),
          "tail curve rows = pairs x quantiles x 2 sides");
  }

  // --- risk ---
  const fs::path rk = root / "risk";
  check(run(pcc + " risk --input " + (flt / "residuals.csv").string() +
            " --model " + (fit_h / "model.json").string() + " --model " +
            (fit_g / "model.json").string() +
            " --n-sim 20000 --n-boot 50 --cpjqe-n-sim 20000 --out-dir " +
            rk.string()) == 0,
        "risk exits 0");
  {
    const std::string csv = slurp(rk / "distress_report.csv");
    check(csv.rfind("model,axis,q,k,d,mdf,count,p_value,band_lo,band_hi",
                    0) == 0,
          "distress csv header");
    check(csv.find("fit_hbn") != std::string::npos &&
              csv.find("fit_gauss") != std::string::npos,
          "model labels derive from fit directories");
    const auto rj = nlohmann::json::parse(slurp(rk / "distress_report.json"));
    bool p_ok = true;
    for (const auto& cell : rj["cells"])
      for (const auto& mm : cell["models"]) {
        const double pv = mm["p_value"];
        p_ok = p_ok && pv >= 0.0 && pv <= 1.0;
      }
    check(p_ok, "p-values inside [0, 1]");
    check(fs::exists(rk / "cpjqe.csv"), "cpjqe.csv written");
  }

  // --- report ---
  const fs::path rp = root / "rep";
  check(run(pcc + " report --fit-report " +
            (fit_g / "fit_report.json").string() + " --fit-report " +
            (fit_h / "fit_report.json").string() + " --out-dir " +
            rp.string()) == 0,
        "report exits 0");
  {
    const auto rj = nlohmann::json::parse(slurp(rp / "report.json"));
    check(rj["baseline"] == "gauss", "first report is the baseline");
    const double d_aic = rj["models"][1]["delta_aic"];
    check(d_aic < 0.0, "hb-n improves aic");
    // CSV parses back through the reader
    const auto rc = pcc::io::read_csv(rp / "report.csv");
    check(rc.rows() == 2 && rc.labels.size() == 2, "report csv round trips");
  }

  // --- config file routes: TOML and JSON produce identical output ---
  {
    const fs::path ct = root / "cfg_toml", cj = root / "cfg_json";
    std::ofstream(root / "sim.toml")
        << "seed = 7\nout-dir = \"" << ct.string()
        << "\"\n\n[simulate]\nmodel = \"" << (fit_h / "model.json").string()
        << "\"\nn = 500\n";
    std::ofstream(root / "sim.json")
        << "{\n \"seed\": 7,\n \"out-dir\": \"" << cj.string()
        << "\",\n \"simulate\": {\"model\": \""
        << (fit_h / "model.json").string() << "\", \"n\": 500}\n}\n";
    check(run(pcc + " --config " + (root / "sim.toml").string() +
              " simulate") == 0,
          "toml config route works");
    check(run(pcc + " --config " + (root / "sim.json").string() +
              " simulate") == 0,
          "json config route works");
    check(slurp(ct / "sample.csv") == slurp(cj / "sample.csv"),
          "toml and json configs agree byte for byte");
  }

  // --- exit codes ---
  check(run(pcc + " fit --input " + (root / "absent.csv").string() +
            " --out-dir " + (root / "x").string()) == 3,
        "missing input file exits 3");
  check(run(pcc + " tail --model " + (fit_h / "model.json").string() +
            " --q-seq 0.7 --out-dir " + (root / "x").string()) == 2,
        "invalid quantile exits 2");
  check(run(pcc + " fit --input " + (flt / "residuals.csv").string() +
            " --spec zebra --out-dir " + (root / "x").string()) == 2,
        "unknown spec exits 2");
  check(run(pcc + " simulate --model " + (rp / "report.json").string() +
            " --n 5 --out-dir " + (root / "x").string()) == 3,
        "malformed model json exits 3");
  check(run(pcc) == 2, "no subcommand exits 2");
  check(run(pcc + " --help") == 0, "help exits 0");

  fs::remove_all(root);
  std::printf("%d checks, %d failures\n", checks, fails);
  return fails == 0 ? 0 : 1;
}
