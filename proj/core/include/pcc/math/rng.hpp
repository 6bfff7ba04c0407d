#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pcc/errors.hpp"
#include "pcc/math/normal.hpp"

namespace pcc::math {

// Deterministic RNG with samplers implemented in-repo so that a fixed
// (seed, stream) pair yields bitwise-identical draws on any platform.
// Streams partition the seed space for independent parallel blocks.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(mix(seed, stream)) {}

  // Uniform on (0,1), never returns an endpoint.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return norm_quantile(uniform()); }

  // Gamma(shape, scale 1), Marsaglia-Tsang squeeze.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw ParameterError("gamma sampler requires shape > 0");
    if (shape < 1.0)
      return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Inverse gamma with density rate^shape / Gamma(shape) x^{-shape-1} e^{-rate/x}.
  double inverse_gamma(double shape, double rate) {
    if (!(rate > 0.0)) throw ParameterError("inverse_gamma requires rate > 0");
    return rate / gamma(shape);
  }

  // GIG(p, a, b) with density proportional to x^{p-1} e^{-(a x + b / x)/2};
  // Devroye (2014) rejection from a log-concave envelope.
  double gig(double p, double a, double b) {
    const bool valid = (p > 0.0 && a > 0.0 && b >= 0.0) ||
                       (p == 0.0 && a > 0.0 && b > 0.0) ||
                       (p < 0.0 && a >= 0.0 && b > 0.0);
    if (!valid) throw ParameterError("gig: invalid (p, a, b)");
    if (b == 0.0) return gamma(p) * 2.0 / a;        // Gamma(p, rate a/2) limit
    if (a == 0.0) return b / (2.0 * gamma(-p));     // inverse-gamma limit
    const double abs_p = std::abs(p);
    const double omega = std::sqrt(a * b);
    const double alpha = std::sqrt(omega * omega + abs_p * abs_p) - abs_p;
    const auto psi = [&](double x) {
      return -alpha * (std::cosh(x) - 1.0) - abs_p * (std::exp(x) - x - 1.0);
    };
    const auto dpsi = [&](double x) {
      return -alpha * std::sinh(x) - abs_p * (std::exp(x) - 1.0);
    };
    double t = 1.0, s = 1.0;
    double lc = -psi(1.0);
    if (lc > 2.0)
      t = std::sqrt(2.0 / (alpha + abs_p));
    else if (lc < 0.5)
      t = std::log(4.0 / (alpha + 2.0 * abs_p));
    lc = -psi(-1.0);
    if (lc > 2.0)
      s = std::sqrt(4.0 / (alpha * std::cosh(1.0) + abs_p));
    else if (lc < 0.5)
      s = std::min(1.0 / abs_p,
                   std::log(1.0 + 1.0 / alpha +
                            std::sqrt(1.0 / (alpha * alpha) + 2.0 / alpha)));
    const double eta = -psi(t);
    const double zeta = -dpsi(t);
    const double theta = -psi(-s);
    const double xi = dpsi(-s);
    const double pp = 1.0 / xi;
    const double rr = 1.0 / zeta;
    const double td = t - rr * eta;
    const double sd = s - pp * theta;
    const double q = td + sd;
    double x;
    for (;;) {
      const double u = uniform();
      const double v = uniform();
      const double w = uniform();
      if (u < q / (pp + q + rr))
        x = -sd + q * v;
      else if (u < (q + rr) / (pp + q + rr))
        x = td - rr * std::log(v);
      else
        x = -sd + pp * std::log(v);
      double envelope;
      if (x >= -sd && x <= td)
        envelope = 1.0;
      else if (x > td)
        envelope = std::exp(-eta - zeta * (x - t));
      else
        envelope = std::exp(-theta + xi * (x + s));
      if (w * envelope <= std::exp(psi(x))) break;
    }
    const double ratio = abs_p / omega;
    const double std_draw =
        (ratio + std::sqrt(1.0 + ratio * ratio)) * std::exp(x);
    const double scaled = std_draw * std::sqrt(b / a);
    return p >= 0.0 ? scaled : (b / a) / scaled;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    // SplitMix64 over the pair; decorrelates nearby (seed, stream) values.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace pcc::math
