#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "scalereg/dataset.hpp"
#include "scalereg/network.hpp"
#include "scalereg/parallel.hpp"
#include "scalereg/regularizer.hpp"
#include "scalereg/rng.hpp"

namespace scalereg {

struct FitOptions {
  int max_outer_iters = 200;
  int max_inner_iters = 8;
  double step_init = 1.0;
  double backtrack = 0.5;        // step shrink factor, in (0,1)
  double objective_tol = 1e-10;  // absolute improvement threshold
  double relative_tol = 1e-8;
  int restarts = 8;
  double init_scale = 1.0;  // radius of the random initial direction
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const {
    if (max_outer_iters <= 0 || max_inner_iters <= 0 || restarts <= 0)
      throw std::invalid_argument("iteration counts must be positive");
    if (step_init <= 0.0 || init_scale <= 0.0) throw std::invalid_argument("steps must be positive");
    if (backtrack <= 0.0 || backtrack >= 1.0)
      throw std::invalid_argument("backtracking factor must lie in (0,1)");
    if (objective_tol <= 0.0 || relative_tol <= 0.0)
      throw std::invalid_argument("tolerances must be positive");
  }
};

struct FitResult {
  ScaledNetwork net;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> trace;  // objective after each outer iteration (winning restart)
  int restart_index = -1;
  int iterations = 0;
  int failed_restarts = 0;  // restarts aborted on a non-finite objective
};

inline double objective(const ScaledNetwork& net, const ActivationSpec& act, const Dataset& data,
                        double lambda) {
  data.validate();
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  Workspace ws;
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data.responses[i] - forward_scaled(net, act, data.inputs[i], ws);
    s += r * r;
  }
  return s / static_cast<double>(data.size()) + lambda * net.kappa;
}

// Exact minimizer over kappa >= 0 of the objective with the direction fixed:
// kappa = max(0, ((2/n) sum y_i g_i - lambda) / ((2/n) sum g_i^2)).
inline double optimal_scale(const NetworkParams& omega, const ActivationSpec& act,
                            const Dataset& data, double lambda) {
  data.validate();
  Workspace ws;
  double sy = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double g = forward(omega, act, data.inputs[i], ws);
    sy += data.responses[i] * g;
    sg += g * g;
  }
  const double n = static_cast<double>(data.size());
  if (sg == 0.0) return 0.0;
  return std::max(0.0, (2.0 * sy / n - lambda) / (2.0 * sg / n));
}

namespace detail {

struct RestartOutcome {
  ScaledNetwork net;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  int iterations = 0;
  bool failed = false;
};

// Objective restricted to the direction for fixed kappa (the lambda*kappa
// offset is constant there and carried separately).
inline double direction_loss(const NetworkParams& omega, double kappa, const ActivationSpec& act,
                             const Dataset& data, Workspace& ws) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data.responses[i] - kappa * forward(omega, act, data.inputs[i], ws);
    s += r * r;
  }
  return s / static_cast<double>(data.size());
}

// Projected gradient ascent on |(2/n) sum y_i g_Omega(x_i)| over the unit
// ball. The scale step clips kappa to zero whenever this correlation is
// below lambda, and at kappa = 0 the direction gradient of the objective
// vanishes; seeding each restart at a high-correlation direction is what
// lets the alternating scheme leave that saddle at all.
inline void correlation_ascent(NetworkParams& omega, const ActivationSpec& act, const Dataset& data,
                               RegularizerKind h, const FitOptions& opts, Workspace& ws) {
  const std::size_t n = data.size();
  NetworkParams grad = NetworkParams::zeros(omega.arch);
  Vector weights(n), g_vals, unused;
  double step = opts.step_init;
  double best = 0.0;
  for (int it = 0; it < opts.max_outer_iters; ++it) {
    for (auto& m : grad.layers) std::fill(m.data().begin(), m.data().end(), 0.0);
    forward_all(omega, act, data.inputs, g_vals, ws);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data.responses[i] * g_vals[i];
    s *= 2.0 / static_cast<double>(n);
    const double sign = s >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i)
      weights[i] = sign * 2.0 * data.responses[i] / static_cast<double>(n);
    weighted_gradient(omega, act, data.inputs, weights, grad, unused, ws);

    bool moved = false;
    double moved_f = 0.0;
    step = std::min(step * 2.0, 1e6);
    const double f = std::abs(s);
    for (int bt = 0; bt < 80; ++bt) {
      NetworkParams cand = omega;
      axpy(cand, step, grad);
      cand = project_unit_ball(h, cand);
      double cs = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        cs += data.responses[i] * forward(cand, act, data.inputs[i], ws);
      const double cand_f = std::abs(2.0 * cs / static_cast<double>(n));
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
    if (gain < opts.objective_tol && it > 0) break;
  }
}

inline RestartOutcome run_restart(const Dataset& data, const Architecture& arch,
                                  const ActivationSpec& act, RegularizerKind h, double lambda,
                                  const FitOptions& opts, std::uint64_t stream_seed) {
  std::mt19937_64 rng(stream_seed);
  Workspace ws;
  RestartOutcome out;

  NetworkParams omega = random_unit_sphere_direction(arch, h, rng);
  if (opts.init_scale != 1.0) {
    omega.scale_entries(opts.init_scale);
    omega = project_unit_ball(h, omega);
  }
  correlation_ascent(omega, act, data, h, opts, ws);
  // the ascent tracks |correlation|; flip to the sign the scale step wants
  {
    NetworkParams flipped = omega;
    flipped.scale_entries(-1.0);
    const double k_plus = optimal_scale(omega, act, data, 0.0);
    const double k_minus = optimal_scale(flipped, act, data, 0.0);
    if (direction_loss(flipped, k_minus, act, data, ws) <
        direction_loss(omega, k_plus, act, data, ws))
      omega = std::move(flipped);
  }

  double kappa = optimal_scale(omega, act, data, lambda);
  double obj = direction_loss(omega, kappa, act, data, ws) + lambda * kappa;
  out.trace.push_back(obj);

  const std::size_t n = data.size();
  NetworkParams grad = NetworkParams::zeros(arch);
  Vector weights(n), g_vals;
  double step = opts.step_init;

  for (int outer = 0; outer < opts.max_outer_iters; ++outer) {
    // direction steps: projected gradient with Armijo backtracking
    for (int inner = 0; inner < opts.max_inner_iters; ++inner) {
      if (kappa == 0.0) break;
      for (auto& m : grad.layers) std::fill(m.data().begin(), m.data().end(), 0.0);
      forward_all(omega, act, data.inputs, g_vals, ws);
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = data.responses[i] - kappa * g_vals[i];
        loss += r * r;
        weights[i] = -(2.0 * kappa / static_cast<double>(n)) * r;
      }
      loss /= static_cast<double>(n);
      Vector unused;
      weighted_gradient(omega, act, data.inputs, weights, grad, unused, ws);

      bool accepted = false;
      step = std::min(step * 2.0, 1e6);
      for (int bt = 0; bt < 80; ++bt) {
        NetworkParams cand = omega;
        axpy(cand, -step, grad);
        cand = project_unit_ball(h, cand);
        const double cand_loss = direction_loss(cand, kappa, act, data, ws);
        // Armijo sufficient decrease along the projected step; <grad, d> is
        // negative by the projection inequality, so acceptance means descent
        NetworkParams diff = cand;
        axpy(diff, -1.0, omega);
        const double lin = param_dot(grad, diff);
        if (cand_loss <= loss + 1e-4 * lin && lin < 0.0) {
          omega = std::move(cand);
          accepted = true;
          break;
        }
        step *= opts.backtrack;
        if (step < 1e-18) break;
      }
      if (!accepted) break;
    }

    kappa = optimal_scale(omega, act, data, lambda);
    const double new_obj = direction_loss(omega, kappa, act, data, ws) + lambda * kappa;
    if (!std::isfinite(new_obj)) {
      out.failed = true;
      return out;
    }
    out.trace.push_back(std::min(new_obj, obj));
    out.iterations = outer + 1;
    if (obj - new_obj < std::max(opts.objective_tol, opts.relative_tol * std::abs(obj))) {
      obj = std::min(obj, new_obj);
      break;
    }
    obj = new_obj;
  }

  out.net.kappa = kappa;
  out.net.omega = std::move(omega);
  out.objective = obj;
  return out;
}

}  // namespace detail

/// Alternating fit of the scale-regularized least-squares problem: projected
/// gradient steps on the direction inside the unit ball, then the exact
/// closed-form scale update, repeated to tolerance over multiple random
/// restarts. The best restart by (objective, index) wins.
inline FitResult fit(const Dataset& data, const Architecture& arch, const ActivationSpec& act,
                     RegularizerKind h, double lambda, const FitOptions& opts) {
  data.validate();
  arch.validate();
  opts.validate();
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (arch.input_dim() != data.dim())
    throw std::invalid_argument("architecture input dimension does not match dataset");

  std::vector<detail::RestartOutcome> outcomes(opts.restarts);
  parallel_for(opts.restarts, opts.threads, [&](std::size_t r) {
    outcomes[r] =
        detail::run_restart(data, arch, act, h, lambda, opts, derive_seed(opts.seed, 0x5e7a, r));
  });

  FitResult result;
  for (int r = 0; r < opts.restarts; ++r) {
    if (outcomes[r].failed) {
      ++result.failed_restarts;
      continue;
    }
    if (outcomes[r].objective < result.objective) {
      result.objective = outcomes[r].objective;
      result.restart_index = r;
    }
  }
  if (result.restart_index < 0) throw std::runtime_error("all fit restarts diverged");
  auto& best = outcomes[result.restart_index];
  result.net = std::move(best.net);
  result.trace = std::move(best.trace);
  result.iterations = best.iterations;
  return result;
}

/// In-sample prediction error against the true regression function.
inline double prediction_error(const ScaledNetwork& net, const ActivationSpec& act,
                               const Dataset& data) {
  data.validate();
  if (!data.truth) throw std::invalid_argument("dataset carries no truth values");
  Workspace ws;
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = forward_scaled(net, act, data.inputs[i], ws) - (*data.truth)[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(data.size()));
}

/// min over candidates of err^2 + 2 lambda kappa.
inline double oracle_bound(const std::vector<ScaledNetwork>& candidates, const ActivationSpec& act,
                           const Dataset& data, double lambda) {
  if (candidates.empty()) throw std::invalid_argument("empty candidate list");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    const double e = prediction_error(c, act, data);
    best = std::min(best, e * e + 2.0 * lambda * c.kappa);
  }
  return best;
}

/// Mean squared holdout residual (out-of-sample risk estimate).
inline double risk_estimate(const ScaledNetwork& net, const ActivationSpec& act,
                            const Dataset& holdout) {
  holdout.validate();
  Workspace ws;
  double s = 0.0;
  for (std::size_t j = 0; j < holdout.size(); ++j) {
    const double d = forward_scaled(net, act, holdout.inputs[j], ws) - holdout.responses[j];
    s += d * d;
  }
  return s / static_cast<double>(holdout.size());
}

}  // namespace scalereg
