#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "scalereg/dataset.hpp"
#include "scalereg/network.hpp"
#include "scalereg/parallel.hpp"
#include "scalereg/regularizer.hpp"
#include "scalereg/rng.hpp"
#include "scalereg/subgauss.hpp"

namespace scalereg {

struct NoiseOptimOptions {
  int restarts = 32;
  int max_iters = 200;
  double step_init = 1.0;
  double backtrack = 0.5;
  double tol = 1e-12;      // absolute improvement threshold
  bool warm_start = false; // reuse each replicate's argmax as an extra start
  int threads = 1;

  void validate() const {
    if (restarts <= 0 || max_iters <= 0) throw std::invalid_argument("counts must be positive");
    if (step_init <= 0.0) throw std::invalid_argument("step must be positive");
    if (backtrack <= 0.0 || backtrack >= 1.0)
      throw std::invalid_argument("backtracking factor must lie in (0,1)");
  }
};

struct InnerProductMax {
  NetworkParams omega;
  double value = 0.0;
};

namespace detail {

// s(Omega) = (2/n) sum g_Omega(x_i) u_i
inline double inner_product_value(const NetworkParams& omega, const ActivationSpec& act,
                                  const Dataset& data, const Vector& noise, Workspace& ws) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    s += forward(omega, act, data.inputs[i], ws) * noise[i];
  return 2.0 * s / static_cast<double>(data.size());
}

inline double ascend_from(NetworkParams& omega, const ActivationSpec& act, const Dataset& data,
                          const Vector& noise, RegularizerKind h, const NoiseOptimOptions& opts,
                          Workspace& ws) {
  const std::size_t n = data.size();
  NetworkParams grad = NetworkParams::zeros(omega.arch);
  Vector weights(n), g_vals;
  double step = opts.step_init;
  double best = std::abs(inner_product_value(omega, act, data, noise, ws));

  for (int it = 0; it < opts.max_iters; ++it) {
    for (auto& m : grad.layers) std::fill(m.data().begin(), m.data().end(), 0.0);
    forward_all(omega, act, data.inputs, g_vals, ws);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += g_vals[i] * noise[i];
    s *= 2.0 / static_cast<double>(n);
    const double sign = s >= 0.0 ? 1.0 : -1.0;
    // gradient of f = |s|: sign(s) * (2/n) sum u_i grad g(x_i)
    for (std::size_t i = 0; i < n; ++i)
      weights[i] = sign * 2.0 * noise[i] / static_cast<double>(n);
    Vector unused;
    weighted_gradient(omega, act, data.inputs, weights, grad, unused, ws);

    bool moved = false;
    double moved_f = 0.0;
    step = std::min(step * 2.0, 1e6);
    const double f = std::abs(s);
    for (int bt = 0; bt < 80; ++bt) {
      NetworkParams cand = omega;
      axpy(cand, step, grad);
      cand = project_unit_ball(h, cand);
      const double cand_f = std::abs(inner_product_value(cand, act, data, noise, ws));
      NetworkParams diff = cand;
      axpy(diff, -1.0, omega);
      const double lin = param_dot(grad, diff);
      const double quad = param_dot(diff, diff) / (2.0 * step);
      if (cand_f >= f + lin - quad - 1e-15) {
        if (cand_f > f) {
          omega = std::move(cand);
          moved = true;
          moved_f = cand_f;
        }
        break;
      }
      step *= opts.backtrack;
      if (step < 1e-18) break;
    }
    if (!moved) break;
    const double gain = moved_f - best;
    best = std::max(best, moved_f);
    if (gain < opts.tol && it > 0) break;
  }
  return best;
}

}  // namespace detail

/// Multistart projected gradient ascent on |(2/n) sum g_Omega(x_i) u_i| over
/// the regularizer unit ball. The returned value is a feasible-point lower
/// bound on the supremum z_h; the returned direction attains it.
inline InnerProductMax maximize_inner_product(const Dataset& data, const Vector& noise,
                                              const ActivationSpec& act, const Architecture& arch,
                                              RegularizerKind h, const NoiseOptimOptions& opts,
                                              std::uint64_t seed,
                                              const NetworkParams* warm = nullptr) {
  data.validate();
  opts.validate();
  if (noise.size() != data.size())
    throw std::invalid_argument("noise length does not match dataset");

  Workspace ws;
  InnerProductMax best;
  best.omega = NetworkParams::zeros(arch);
  best.value = 0.0;

  const int extra = warm != nullptr ? 1 : 0;
  for (int r = 0; r < opts.restarts + extra; ++r) {
    NetworkParams omega = best.omega;
    if (warm != nullptr && r == 0) {
      omega = *warm;
    } else {
      std::mt19937_64 rng = make_rng(seed, 0x0e15, r);
      omega = random_unit_sphere_direction(arch, h, rng);
    }
    const double val = detail::ascend_from(omega, act, data, noise, h, opts, ws);
    if (val > best.value) {
      best.value = val;
      best.omega = std::move(omega);
    }
  }
  return best;
}

/// Dense grid search oracle for the same supremum; only feasible for
/// networks with at most three parameters. Grid nodes are integer multiples
/// of the resolution, so refining by halving never loses points.
inline double brute_force_sup_tiny(const Dataset& data, const Vector& noise,
                                   const ActivationSpec& act, const Architecture& arch,
                                   RegularizerKind h, double grid_resolution) {
  data.validate();
  const std::size_t P = param_count(arch);
  if (P > 3) throw std::invalid_argument("grid oracle supports at most 3 parameters");
  if (grid_resolution <= 0.0 || grid_resolution > 1.0)
    throw std::invalid_argument("grid resolution must lie in (0,1]");
  if (noise.size() != data.size())
    throw std::invalid_argument("noise length does not match dataset");

  const long steps = static_cast<long>(std::floor(1.0 / grid_resolution + 1e-9));
  NetworkParams omega = NetworkParams::zeros(arch);
  Vector flat(P, 0.0);
  Workspace ws;
  double best = 0.0;

  std::vector<long> idx(P, -steps);
  while (true) {
    for (std::size_t j = 0; j < P; ++j) flat[j] = static_cast<double>(idx[j]) * grid_resolution;
    double l1 = 0.0;
    for (double v : flat) l1 += std::abs(v);
    bool feasible = l1 <= 1.0 + 1e-12;
    if (feasible && h == RegularizerKind::max_layer_l1) {
      unflatten(flat, omega);
      feasible = in_unit_ball(h, omega, 1e-12);
    }
    if (feasible) {
      if (h == RegularizerKind::sum_l1) unflatten(flat, omega);
      best = std::max(best, std::abs(detail::inner_product_value(omega, act, data, noise, ws)));
    }
    std::size_t k = 0;
    while (k < P && ++idx[k] > steps) idx[k++] = -steps;
    if (k == P) break;
  }
  return best;
}

/// Per-replicate effective-noise suprema and the empirical quantile used as
/// a data-driven tuning parameter.
struct NoiseQuantileReport {
  double t = 0.05;
  int reps = 0;
  std::vector<double> z_values;  // replicate order
  double lambda_hat = 0.0;
  // order-statistic 95% interval for the (1-t) quantile
  int order_lo = 0, order_hi = 0;
  double z_lo = 0.0, z_hi = 0.0;
  NoiseOptimOptions opts;
};

namespace detail {

// Binomial(reps, q) CDF by direct pmf accumulation in log space.
inline double binomial_cdf(int k, int n, double q) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  double cdf = 0.0;
  for (int j = 0; j <= k; ++j) {
    const double logpmf = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                          j * std::log(q) + (n - j) * std::log1p(-q);
    cdf += std::exp(logpmf);
  }
  return std::min(cdf, 1.0);
}

}  // namespace detail

/// Draws `reps` noise vectors, maximizes the inner product for each, and
/// returns the ceil((1-t) reps)-th order statistic of the suprema.
/// Deterministic given the seed; replicates are independent work items unless
/// warm starts chain them.
inline NoiseQuantileReport estimate_quantile(const Dataset& data, const SubGaussianSpec& noise_model,
                                             const ActivationSpec& act, const Architecture& arch,
                                             RegularizerKind h, double t, int reps,
                                             const NoiseOptimOptions& opts, std::uint64_t seed) {
  data.validate();
  opts.validate();
  if (t <= 0.0 || t >= 1.0) throw std::invalid_argument("level t must lie in (0,1)");
  if (reps < 1 || static_cast<double>(reps) < 1.0 / t)
    throw std::invalid_argument("need at least 1/t replicates");

  NoiseQuantileReport report;
  report.t = t;
  report.reps = reps;
  report.opts = opts;
  report.z_values.assign(reps, 0.0);

  auto run_replicate = [&](std::size_t r, const NetworkParams* warm) -> NetworkParams {
    std::mt19937_64 rng = make_rng(seed, 0x401e, r);
    Vector noise;
    noise_model.sample(rng, noise, data.size());
    InnerProductMax m =
        maximize_inner_product(data, noise, act, arch, h, opts, derive_seed(seed, 0x9a, r), warm);
    report.z_values[r] = m.value;
    return std::move(m.omega);
  };

  if (opts.warm_start) {
    NetworkParams prev;
    for (int r = 0; r < reps; ++r) prev = run_replicate(r, r == 0 ? nullptr : &prev);
  } else {
    parallel_for(reps, opts.threads, [&](std::size_t r) { run_replicate(r, nullptr); });
  }

  Vector sorted = report.z_values;
  std::sort(sorted.begin(), sorted.end());
  const double q = 1.0 - t;
  int index = static_cast<int>(std::ceil(q * reps));  // 1-based order statistic
  index = std::clamp(index, 1, reps);
  report.lambda_hat = sorted[index - 1];

  // binomial order-statistic interval at 95%
  int lo = 1;
  while (lo < reps && detail::binomial_cdf(lo - 1, reps, q) <= 0.025) ++lo;
  int hi = lo;
  while (hi < reps && detail::binomial_cdf(hi - 1, reps, q) < 0.975) ++hi;
  report.order_lo = lo;
  report.order_hi = hi;
  report.z_lo = sorted[lo - 1];
  report.z_hi = sorted[hi - 1];
  return report;
}

}  // namespace scalereg
