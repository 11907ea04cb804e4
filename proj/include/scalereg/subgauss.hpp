#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "scalereg/matrix.hpp"

namespace scalereg {

enum class NoiseKind { gaussian, rademacher, uniform };

inline NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "rademacher") return NoiseKind::rademacher;
  if (name == "uniform") return NoiseKind::uniform;
  throw std::invalid_argument("unknown noise kind: " + name);
}

namespace detail {

// integral_0^1 exp(t^2) dt by series, sum 1/(m! (2m+1)); converges fast.
inline double exp_square_integral_01() {
  double term = 1.0, sum = 0.0;
  for (int m = 0; m < 30; ++m) {
    sum += term / (2.0 * m + 1.0);
    term /= (m + 1.0);
  }
  return sum;
}

}  // namespace detail

/// Centered noise with uniformly bounded exponential squared moments:
/// K^2 (E exp(u^2/K^2) - 1) <= gamma^2. The moment is available in closed
/// form for all three supported samplers and is checked at construction.
struct SubGaussianSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double param = 1.0;  // sigma / spike size / half-width
  double K = 2.0;
  double gamma = 1.0;

  SubGaussianSpec() = default;
  SubGaussianSpec(NoiseKind kind_, double param_, double K_, double gamma_)
      : kind(kind_), param(param_), K(K_), gamma(gamma_) {
    if (param < 0.0 || K <= 0.0 || gamma <= 0.0)
      throw std::invalid_argument("sub-Gaussian parameters must be positive");
    const double lhs = K * K * (exp_square_moment() - 1.0);
    if (!(lhs <= gamma * gamma * (1.0 + 1e-12)))
      throw std::invalid_argument("declared (K, gamma) do not dominate the sampler");
  }

  // E exp(u^2 / K^2), closed form per sampler.
  double exp_square_moment() const {
    switch (kind) {
      case NoiseKind::gaussian: {
        const double ratio = 2.0 * param * param / (K * K);
        if (ratio >= 1.0) throw std::invalid_argument("gaussian moment requires K^2 > 2 sigma^2");
        return 1.0 / std::sqrt(1.0 - ratio);
      }
      case NoiseKind::rademacher:
        return std::exp(param * param / (K * K));
      case NoiseKind::uniform: {
        if (param == 0.0) return 1.0;
        // (1/2a) int_{-a}^{a} exp(x^2/K^2) dx = (K/a) int_0^{a/K} exp(t^2) dt
        const double b = param / K;
        double term = 1.0, sum = 0.0;
        for (int m = 0; m < 40; ++m) {
          sum += term * std::pow(b, 2 * m) / (2.0 * m + 1.0);
          term /= (m + 1.0);
        }
        return sum;
      }
    }
    return 1.0;
  }

  double variance() const {
    switch (kind) {
      case NoiseKind::gaussian: return param * param;
      case NoiseKind::rademacher: return param * param;
      case NoiseKind::uniform: return param * param / 3.0;
    }
    return 0.0;
  }

  void sample(std::mt19937_64& rng, Vector& out, std::size_t n) const {
    out.resize(n);
    switch (kind) {
      case NoiseKind::gaussian: {
        std::normal_distribution<double> normal(0.0, param);
        for (double& u : out) u = normal(rng);
        break;
      }
      case NoiseKind::rademacher: {
        std::bernoulli_distribution coin(0.5);
        for (double& u : out) u = coin(rng) ? param : -param;
        break;
      }
      case NoiseKind::uniform: {
        std::uniform_real_distribution<double> unif(-param, param);
        for (double& u : out) u = unif(rng);
        break;
      }
    }
  }
};

/// Gaussian wrapper with K = 2 sigma, which gives the clean closed form
/// gamma^2 = K^2 (sqrt(2) - 1).
inline SubGaussianSpec gaussian_subgauss_params(double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  const double K = 2.0 * sigma;
  const double gamma_sq = K * K * (std::sqrt(2.0) - 1.0);
  return SubGaussianSpec(NoiseKind::gaussian, sigma, K, std::sqrt(gamma_sq));
}

inline SubGaussianSpec rademacher_subgauss_params(double scale) {
  if (scale <= 0.0) throw std::invalid_argument("scale must be positive");
  // E exp(u^2/K^2) = exp(scale^2/K^2) exactly; take K = scale
  const double gamma_sq = scale * scale * (std::exp(1.0) - 1.0);
  return SubGaussianSpec(NoiseKind::rademacher, scale, scale, std::sqrt(gamma_sq));
}

inline SubGaussianSpec uniform_subgauss_params(double half_width) {
  if (half_width <= 0.0) throw std::invalid_argument("half width must be positive");
  const double moment = detail::exp_square_integral_01();  // K = a
  const double gamma_sq = half_width * half_width * (moment - 1.0);
  return SubGaussianSpec(NoiseKind::uniform, half_width, half_width, std::sqrt(gamma_sq));
}

inline SubGaussianSpec make_subgauss(NoiseKind kind, double param) {
  switch (kind) {
    case NoiseKind::gaussian: return gaussian_subgauss_params(param);
    case NoiseKind::rademacher: return rademacher_subgauss_params(param);
    case NoiseKind::uniform: return uniform_subgauss_params(param);
  }
  throw std::invalid_argument("unknown noise kind");
}

}  // namespace scalereg
