#include "pcc/dist.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pcc/errors.hpp"
#include "pcc/math/bessel.hpp"
#include "pcc/math/normal.hpp"
#include "pcc/math/parallel.hpp"
#include "pcc/math/rng.hpp"

namespace pcc::dist {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};
constexpr double kLog2 = 0.6931471805599453094;
constexpr double kLogPi = 1.1447298858494001741;

std::string family_name(GeneratorFamily f) {
  switch (f) {
    case GeneratorFamily::Normal: return "normal";
    case GeneratorFamily::Hyperbolic: return "hyperbolic";
    case GeneratorFamily::SkewT: return "skew_t";
    case GeneratorFamily::StudentT: return "t";
  }
  return "?";
}

}  // namespace

// ---------------------------------------------------------------------------
// Hyperbolic
// ---------------------------------------------------------------------------

HyperbolicParams::HyperbolicParams(double alpha_in, double beta_in,
                                   double chi_in, double mu_in)
    : alpha(alpha_in), beta(beta_in), chi(chi_in), mu(mu_in) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ParameterError("hyperbolic: alpha must be positive");
  if (!(std::abs(beta) < alpha))
    throw ParameterError("hyperbolic: |beta| must be < alpha");
  if (!(chi > 0.0) || !std::isfinite(chi))
    throw ParameterError("hyperbolic: chi must be positive");
  if (!std::isfinite(mu)) throw ParameterError("hyperbolic: mu must be finite");
}

double hyperbolic_log_pdf(double x, const HyperbolicParams& p) {
  const double psi = p.psi();
  const double zeta = std::sqrt(p.chi * psi);
  const double dx = x - p.mu;
  return 0.5 * (std::log(psi) - std::log(p.chi)) - kLog2 - std::log(p.alpha) -
         math::log_bessel_k(1.0, zeta) -
         p.alpha * std::sqrt(p.chi + dx * dx) + p.beta * dx;
}

double hyperbolic_pdf(double x, const HyperbolicParams& p) {
  return std::exp(hyperbolic_log_pdf(x, p));
}

namespace {

// Mean and variance of the GIG(1, chi, psi) mixing variable via scaled
// Bessel ratios; the e^zeta factors cancel so no overflow at large zeta.
void gig_mixing_moments(double chi, double psi, double* mean, double* var) {
  const double zeta = std::sqrt(chi * psi);
  const double k1 = math::bessel_k_scaled(1.0, zeta);
  const double k2 = math::bessel_k_scaled(2.0, zeta);
  const double k3 = math::bessel_k_scaled(3.0, zeta);
  const double r = std::sqrt(chi / psi);
  const double m1 = r * (k2 / k1);
  const double m2 = (chi / psi) * (k3 / k1);
  *mean = m1;
  *var = m2 - m1 * m1;
}

}  // namespace

Moments hyperbolic_moments(const HyperbolicParams& p) {
  double ev = 0.0, vv = 0.0;
  gig_mixing_moments(p.chi, p.psi(), &ev, &vv);
  Moments m;
  m.mean = p.mu + p.beta * ev;
  m.variance = ev + p.beta * p.beta * vv;
  return m;
}

HyperbolicParams hyperbolic_match_moments(double alpha, double beta,
                                          double target_var) {
  if (!(alpha > 0.0) || !(std::abs(beta) < alpha))
    throw ParameterError("hyperbolic_match_moments: need alpha > |beta| >= 0");
  if (!(target_var > 0.0) || !std::isfinite(target_var))
    throw ParameterError("hyperbolic_match_moments: target variance must be positive");
  const double psi = alpha * alpha - beta * beta;
  const auto variance_at = [&](double chi) {
    double ev = 0.0, vv = 0.0;
    gig_mixing_moments(chi, psi, &ev, &vv);
    return ev + beta * beta * vv;
  };
  double lo = std::log(1e-8), hi = std::log(1e8);
  const double v_lo = variance_at(std::exp(lo));
  const double v_hi = variance_at(std::exp(hi));
  if (!(v_lo <= target_var && target_var <= v_hi)) {
    std::ostringstream msg;
    msg << "hyperbolic_match_moments: variance " << target_var
        << " is not attainable for alpha=" << alpha << ", beta=" << beta
        << "; the root find cannot bracket (attainable range is ["
        << v_lo << ", " << v_hi << "], with infimum 2/psi + 4 beta^2/psi^2 = "
        << 2.0 / psi + 4.0 * beta * beta / (psi * psi) << " as chi -> 0)";
    throw NumericError(msg.str());
  }
  // variance is strictly increasing in chi, so bisection on log chi is safe.
  for (int it = 0; it < 200 && (hi - lo) > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (variance_at(std::exp(mid)) < target_var)
      lo = mid;
    else
      hi = mid;
  }
  const double chi = std::exp(0.5 * (lo + hi));
  double ev = 0.0, vv = 0.0;
  gig_mixing_moments(chi, psi, &ev, &vv);
  return HyperbolicParams(alpha, beta, chi, -beta * ev);
}

std::complex<double> hyperbolic_cf(double t, const HyperbolicParams& p) {
  if (t == 0.0) return 1.0;
  const double psi = p.psi();
  const double zeta = std::sqrt(p.chi * psi);
  const cplx w = cplx(psi + t * t, -2.0 * t * p.beta);
  const cplx log_phi = kI * (t * p.mu) + 0.5 * (std::log(psi) - std::log(w)) +
                       math::log_bessel_k(1.0, std::sqrt(p.chi * w)) -
                       math::log_bessel_k(1.0, zeta);
  return std::exp(log_phi);
}

// ---------------------------------------------------------------------------
// Generalized hyperbolic CF
// ---------------------------------------------------------------------------

void GhParams::validate() const {
  const auto d = sigma.rows();
  if (d == 0 || sigma.cols() != d)
    throw ParameterError("gh: sigma must be square and non-empty");
  if (mu.size() != d || gamma.size() != d)
    throw ParameterError("gh: mu and gamma must match sigma's dimension");
  if (!(chi > 0.0) || !(psi > 0.0))
    throw ParameterError("gh: chi and psi must be positive");
  if (!std::isfinite(lambda)) throw ParameterError("gh: lambda must be finite");
}

std::complex<double> gh_cf(const Eigen::VectorXd& t, const GhParams& p) {
  p.validate();
  if (t.size() != p.sigma.rows())
    throw ParameterError("gh_cf: argument dimension mismatch");
  if (t.isZero(0.0)) return 1.0;
  const double quad = t.dot(p.sigma * t);
  const cplx w = cplx(p.psi + quad, -2.0 * t.dot(p.gamma));
  const double zeta = std::sqrt(p.chi * p.psi);
  const cplx log_phi = kI * t.dot(p.mu) +
                       0.5 * p.lambda * (std::log(p.psi) - std::log(w)) +
                       math::log_bessel_k(p.lambda, std::sqrt(p.chi * w)) -
                       math::log_bessel_k(p.lambda, zeta);
  return std::exp(log_phi);
}

// ---------------------------------------------------------------------------
// Skew-t (GH limit lambda = -nu/2, chi = nu, psi -> 0)
// ---------------------------------------------------------------------------

void SkewTParams::validate() const {
  const auto d = sigma_diag.size();
  if (d == 0) throw ParameterError("skew_t: empty dimension");
  if (mu.size() != d || gamma.size() != d)
    throw ParameterError("skew_t: mu and gamma must match sigma_diag's size");
  const bool skewed = gamma.cwiseAbs().maxCoeff() > 0.0;
  if (!(nu > 2.0) || (skewed && !(nu > 4.0)))
    throw ParameterError(
        "skew_t: nu must exceed 2 (4 when skewness is present) for the "
        "moment-matched construction");
  if ((sigma_diag.array() <= 0.0).any())
    throw ParameterError("skew_t: sigma_diag entries must be positive");
}

std::complex<double> skew_t_cf(const Eigen::VectorXd& t, const SkewTParams& p) {
  if (t.size() != p.sigma_diag.size())
    throw ParameterError("skew_t_cf: argument dimension mismatch");
  const double quad = (p.sigma_diag.array() * t.array().square()).sum();
  const cplx w = cplx(quad, -2.0 * t.dot(p.gamma));
  const cplx shift = kI * t.dot(p.mu);
  if (std::abs(w) < 1e-300) return std::exp(shift);
  const cplx nw = p.nu * w;
  const cplx log_phi = shift + (1.0 - 0.5 * p.nu) * kLog2 -
                       std::lgamma(0.5 * p.nu) + 0.25 * p.nu * std::log(nw) +
                       math::log_bessel_k(0.5 * p.nu, std::sqrt(nw));
  return std::exp(log_phi);
}

double skew_t_log_pdf(const Eigen::VectorXd& x, const SkewTParams& p) {
  const auto d = x.size();
  if (d != p.sigma_diag.size())
    throw ParameterError("skew_t_log_pdf: argument dimension mismatch");
  const double dg = static_cast<double>(d);
  const Eigen::ArrayXd dx = (x - p.mu).array();
  const Eigen::ArrayXd inv_sigma = p.sigma_diag.array().inverse();
  const double quad = (dx.square() * inv_sigma).sum();
  const double log_det = p.sigma_diag.array().log().sum();
  const double gsg = (p.gamma.array().square() * inv_sigma).sum();
  const double a = 0.5 * (p.nu + dg);
  const double common = -std::lgamma(0.5 * p.nu) -
                        0.5 * dg * (kLogPi + std::log(p.nu)) - 0.5 * log_det -
                        a * std::log1p(quad / p.nu);
  if (gsg < 1e-300) {
    // symmetric Student t
    return std::lgamma(a) + common;
  }
  const double z = std::sqrt((p.nu + quad) * gsg);
  const double shift = (dx * p.gamma.array() * inv_sigma).sum();
  return (1.0 - a) * kLog2 + common + shift + math::log_bessel_k(a, z) +
         a * std::log(z);
}

SkewT1Params skew_t1_match_moments(double nu, double gamma1,
                                   double lambda_var) {
  if (!(lambda_var > 0.0))
    throw ParameterError("skew_t1_match_moments: lambda_var must be positive");
  if (gamma1 != 0.0 && !(nu > 4.0))
    throw ParameterError(
        "skew_t1_match_moments: nu must exceed 4 when gamma1 != 0");
  if (!(nu > 2.0))
    throw ParameterError("skew_t1_match_moments: nu must exceed 2");
  SkewT1Params r;
  r.nu = nu;
  r.lambda_var = lambda_var;
  r.gamma1 = gamma1;
  r.mu1 = -nu * gamma1 / (nu - 2.0);
  r.sigma11 = (nu - 2.0) * lambda_var / nu;
  if (gamma1 != 0.0)
    r.sigma11 -= 2.0 * nu * gamma1 * gamma1 / ((nu - 2.0) * (nu - 4.0));
  if (!(r.sigma11 > 0.0)) {
    const double gmax =
        (nu - 2.0) * std::sqrt(0.5 * (nu - 4.0) * lambda_var) / nu;
    std::ostringstream msg;
    msg << "skew_t1_match_moments: gamma1=" << gamma1
        << " leaves no dispersion for variance " << lambda_var << " at nu="
        << nu << " (need |gamma1| < " << gmax << ")";
    throw FeasibilityError(msg.str());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Group specs
// ---------------------------------------------------------------------------

void GroupSpec::validate(int d) const {
  if (d <= 0) throw ParameterError("group spec: dimension must be positive");
  if (groups.empty()) throw ParameterError("group spec: no groups");
  std::vector<char> seen(static_cast<std::size_t>(d), 0);
  for (const auto& g : groups) {
    if (g.indices.empty())
      throw ParameterError("group spec: group with no indices");
    for (int idx : g.indices) {
      if (idx < 0 || idx >= d)
        throw ParameterError("group spec: index out of range");
      if (seen[static_cast<std::size_t>(idx)])
        throw ParameterError("group spec: index assigned to two groups");
      seen[static_cast<std::size_t>(idx)] = 1;
    }
    switch (g.family) {
      case GeneratorFamily::Normal:
        break;
      case GeneratorFamily::Hyperbolic:
        if (g.indices.size() != 1)
          throw ParameterError("group spec: hyperbolic groups are scalar");
        if (!(g.alpha > 0.0) || !(std::abs(g.beta) < g.alpha))
          throw ParameterError("group spec: hyperbolic needs alpha > |beta|");
        break;
      case GeneratorFamily::SkewT:
        if (g.gamma1 != 0.0 ? !(g.nu > 4.0) : !(g.nu > 2.0))
          throw ParameterError(
              "group spec: skew_t needs nu > 2 (4 with skewness)");
        break;
      case GeneratorFamily::StudentT:
        if (!(g.nu > 2.0))
          throw ParameterError("group spec: t needs nu > 2");
        if (g.gamma1 != 0.0)
          throw ParameterError("group spec: t groups cannot carry skewness");
        break;
    }
  }
  for (int i = 0; i < d; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw ParameterError("group spec: groups must cover every component");
}

namespace {

std::vector<int> index_range(int lo, int hi) {
  std::vector<int> v;
  v.reserve(static_cast<std::size_t>(hi - lo));
  for (int i = lo; i < hi; ++i) v.push_back(i);
  return v;
}

}  // namespace

GroupSpec GroupSpec::gauss(int d) {
  GroupSpec s;
  GeneratorGroup g;
  g.family = GeneratorFamily::Normal;
  g.indices = index_range(0, d);
  s.groups.push_back(std::move(g));
  s.validate(d);
  return s;
}

GroupSpec GroupSpec::student_t(int d, double nu) {
  GroupSpec s;
  GeneratorGroup g;
  g.family = GeneratorFamily::StudentT;
  g.indices = index_range(0, d);
  g.nu = nu;
  s.groups.push_back(std::move(g));
  s.validate(d);
  return s;
}

GroupSpec GroupSpec::skew_t_market(int d, double nu, double gamma1) {
  GroupSpec s;
  GeneratorGroup g;
  g.family = GeneratorFamily::SkewT;
  g.indices = index_range(0, d);
  g.nu = nu;
  g.gamma1 = gamma1;
  s.groups.push_back(std::move(g));
  s.validate(d);
  return s;
}

GroupSpec GroupSpec::hyperbolic_normal(
    int d, const std::vector<std::pair<double, double>>& alpha_beta) {
  const int k = static_cast<int>(alpha_beta.size());
  if (k < 1 || k > d)
    throw ParameterError("hyperbolic_normal: need 1..d leading generators");
  GroupSpec s;
  for (int i = 0; i < k; ++i) {
    GeneratorGroup g;
    g.family = GeneratorFamily::Hyperbolic;
    g.indices = {i};
    g.alpha = alpha_beta[static_cast<std::size_t>(i)].first;
    g.beta = alpha_beta[static_cast<std::size_t>(i)].second;
    s.groups.push_back(std::move(g));
  }
  if (k < d) {
    GeneratorGroup g;
    g.family = GeneratorFamily::Normal;
    g.indices = index_range(k, d);
    s.groups.push_back(std::move(g));
  }
  s.validate(d);
  return s;
}

GroupSpec GroupSpec::skew_t1_t1(int d, double nu1, double gamma1,
                                double nu_higher) {
  GroupSpec s;
  GeneratorGroup g0;
  g0.family = GeneratorFamily::SkewT;
  g0.indices = {0};
  g0.nu = nu1;
  g0.gamma1 = gamma1;
  s.groups.push_back(std::move(g0));
  for (int i = 1; i < d; ++i) {
    GeneratorGroup g;
    g.family = GeneratorFamily::StudentT;
    g.indices = {i};
    g.nu = nu_higher;
    s.groups.push_back(std::move(g));
  }
  s.validate(d);
  return s;
}

GroupSpec GroupSpec::skew_t1_t_rest(int d, double nu1, double gamma1,
                                    double nu_higher) {
  if (d < 2)
    throw ParameterError("skew_t1_t_rest: needs at least two components");
  GroupSpec s;
  GeneratorGroup g0;
  g0.family = GeneratorFamily::SkewT;
  g0.indices = {0};
  g0.nu = nu1;
  g0.gamma1 = gamma1;
  s.groups.push_back(std::move(g0));
  GeneratorGroup g1;
  g1.family = GeneratorFamily::StudentT;
  g1.indices = index_range(1, d);
  g1.nu = nu_higher;
  s.groups.push_back(std::move(g1));
  s.validate(d);
  return s;
}

std::pair<double, double> linked_dofs(CommonTail link, double nu) {
  switch (link) {
    case CommonTail::EqualTail: return {2.0 * nu, nu};
    case CommonTail::EqualDof:
    case CommonTail::None: return {nu, nu};
  }
  return {nu, nu};
}

// ---------------------------------------------------------------------------
// Prepared groups
// ---------------------------------------------------------------------------

PreparedGroup prepare_group(const GeneratorGroup& g,
                            const Eigen::VectorXd& lambda) {
  PreparedGroup pg;
  pg.family = g.family;
  pg.indices = g.indices;
  const auto m = static_cast<Eigen::Index>(g.indices.size());
  for (int idx : g.indices) {
    if (idx < 0 || idx >= lambda.size() || !(lambda[idx] > 0.0))
      throw ParameterError("prepare_group: invalid eigenvalue for index " +
                           std::to_string(idx) + " (" + family_name(g.family) +
                           " group)");
  }
  switch (g.family) {
    case GeneratorFamily::Normal: {
      pg.sd.resize(m);
      for (Eigen::Index k = 0; k < m; ++k)
        pg.sd[k] = std::sqrt(lambda[g.indices[static_cast<std::size_t>(k)]]);
      break;
    }
    case GeneratorFamily::Hyperbolic: {
      pg.hb = hyperbolic_match_moments(g.alpha, g.beta, lambda[g.indices[0]]);
      break;
    }
    case GeneratorFamily::SkewT:
    case GeneratorFamily::StudentT: {
      const double gamma1 =
          (g.family == GeneratorFamily::SkewT) ? g.gamma1 : 0.0;
      pg.st.nu = g.nu;
      pg.st.mu = Eigen::VectorXd::Zero(m);
      pg.st.gamma = Eigen::VectorXd::Zero(m);
      pg.st.sigma_diag.resize(m);
      const auto first = skew_t1_match_moments(g.nu, gamma1, lambda[g.indices[0]]);
      pg.st.mu[0] = first.mu1;
      pg.st.gamma[0] = first.gamma1;
      pg.st.sigma_diag[0] = first.sigma11;
      for (Eigen::Index k = 1; k < m; ++k)
        pg.st.sigma_diag[k] =
            (g.nu - 2.0) * lambda[g.indices[static_cast<std::size_t>(k)]] / g.nu;
      pg.st.validate();
      break;
    }
  }
  return pg;
}

std::vector<PreparedGroup> prepare_groups(const GroupSpec& spec,
                                          const Eigen::VectorXd& lambda) {
  spec.validate(static_cast<int>(lambda.size()));
  std::vector<PreparedGroup> out;
  out.reserve(spec.groups.size());
  for (const auto& g : spec.groups) out.push_back(prepare_group(g, lambda));
  return out;
}

std::complex<double> group_cf(const PreparedGroup& pg,
                              const Eigen::VectorXd& s) {
  if (s.size() != static_cast<Eigen::Index>(pg.indices.size()))
    throw ParameterError("group_cf: argument dimension mismatch");
  switch (pg.family) {
    case GeneratorFamily::Normal:
      return std::exp(-0.5 * (pg.sd.array().square() * s.array().square()).sum());
    case GeneratorFamily::Hyperbolic:
      return hyperbolic_cf(s[0], pg.hb);
    case GeneratorFamily::SkewT:
    case GeneratorFamily::StudentT:
      return skew_t_cf(s, pg.st);
  }
  return 0.0;
}

double group_log_pdf(const PreparedGroup& pg, const Eigen::VectorXd& p) {
  if (p.size() != static_cast<Eigen::Index>(pg.indices.size()))
    throw ParameterError("group_log_pdf: argument dimension mismatch");
  switch (pg.family) {
    case GeneratorFamily::Normal: {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < p.size(); ++k)
        acc += math::norm_log_pdf(p[k] / pg.sd[k]) - std::log(pg.sd[k]);
      return acc;
    }
    case GeneratorFamily::Hyperbolic:
      return hyperbolic_log_pdf(p[0], pg.hb);
    case GeneratorFamily::SkewT:
    case GeneratorFamily::StudentT:
      return skew_t_log_pdf(p, pg.st);
  }
  return -std::numeric_limits<double>::infinity();
}

int group_shape_param_count(const GeneratorGroup& g) {
  switch (g.family) {
    case GeneratorFamily::Normal: return 0;
    case GeneratorFamily::Hyperbolic: return 2;  // alpha, beta
    case GeneratorFamily::SkewT: return 2;       // nu, gamma1
    case GeneratorFamily::StudentT: return 1;    // nu
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

Eigen::MatrixXd sample_generators(const GroupSpec& spec,
                                  const Eigen::VectorXd& lambda, int n,
                                  std::uint64_t seed) {
  const int d = static_cast<int>(lambda.size());
  spec.validate(d);
  if (n < 0) throw ParameterError("sample_generators: n must be >= 0");
  const auto prepared = prepare_groups(spec, lambda);
  Eigen::MatrixXd out(n, d);
  constexpr std::size_t kBlock = 2048;
  math::parallel_for_blocks(
      static_cast<std::size_t>(n), kBlock,
      [&](std::size_t block, std::size_t begin, std::size_t end) {
        math::Rng rng(seed, block);
        for (std::size_t row = begin; row < end; ++row) {
          const auto r = static_cast<Eigen::Index>(row);
          for (const auto& pg : prepared) {
            switch (pg.family) {
              case GeneratorFamily::Normal: {
                for (std::size_t k = 0; k < pg.indices.size(); ++k)
                  out(r, pg.indices[k]) =
                      pg.sd[static_cast<Eigen::Index>(k)] * rng.normal();
                break;
              }
              case GeneratorFamily::Hyperbolic: {
                const double v = rng.gig(1.0, pg.hb.psi(), pg.hb.chi);
                out(r, pg.indices[0]) =
                    pg.hb.mu + pg.hb.beta * v + std::sqrt(v) * rng.normal();
                break;
              }
              case GeneratorFamily::SkewT:
              case GeneratorFamily::StudentT: {
                const double v =
                    rng.inverse_gamma(0.5 * pg.st.nu, 0.5 * pg.st.nu);
                const double sv = std::sqrt(v);
                for (std::size_t k = 0; k < pg.indices.size(); ++k) {
                  const auto kk = static_cast<Eigen::Index>(k);
                  out(r, pg.indices[k]) =
                      pg.st.mu[kk] + pg.st.gamma[kk] * v +
                      sv * std::sqrt(pg.st.sigma_diag[kk]) * rng.normal();
                }
                break;
              }
            }
          }
        }
      });
  return out;
}

}  // namespace pcc::dist
