#pragma once

#include <cmath>
#include <stdexcept>

#include "scalereg/network.hpp"
#include "scalereg/regularizer.hpp"

namespace scalereg {

struct Decomposition {
  ScaledNetwork net;
  bool degenerate = false;  // some layer was all-zero; direction left as given
};

inline bool has_zero_layer(const NetworkParams& theta) {
  for (const auto& w : theta.layers) {
    bool zero = true;
    for (double v : w.data())
      if (v != 0.0) {
        zero = false;
        break;
      }
    if (zero) return true;
  }
  return false;
}

/// Split Theta into scale and direction: kappa = h(Theta)^{(L+1)/k} and
/// Omega = Theta / kappa^{1/(L+1)}, so that h(Omega) = 1. A parameter with an
/// all-zero layer represents the zero function; it maps to kappa = 0 with the
/// direction returned unchanged and flagged.
inline Decomposition decompose(const NetworkParams& theta, RegularizerKind h) {
  theta.check_shapes();
  Decomposition out;
  if (has_zero_layer(theta)) {
    out.net.kappa = 0.0;
    out.net.omega = theta;
    out.degenerate = true;
    return out;
  }
  const double hval = value(h, theta);
  if (!std::isfinite(hval)) throw std::runtime_error("regularizer value is not finite");
  const double k = regularizer_homogeneity(h).degree;
  const double num_factors = static_cast<double>(theta.depth() + 1);
  // kappa^{1/(L+1)} = h(Theta)^{1/k}
  const double root = std::exp(std::log(hval) / k);
  out.net.kappa = std::exp(num_factors / k * std::log(hval));
  out.net.omega = theta;
  out.net.omega.scale_entries(1.0 / root);
  return out;
}

/// Inverse direction: Theta = kappa^{1/(L+1)} Omega.
inline NetworkParams compose(const ScaledNetwork& net) {
  NetworkParams out = net.omega;
  if (net.kappa == 0.0) {
    out.scale_entries(0.0);
    return out;
  }
  const double num_factors = static_cast<double>(net.omega.depth() + 1);
  out.scale_entries(std::exp(std::log(net.kappa) / num_factors));
  return out;
}

/// Max deviation |g_Theta(x) - kappa g_Omega(x)| over the probe inputs, with
/// (kappa, Omega) = decompose(Theta). Only meaningful for nonnegative
/// homogeneous activations, hence the hard precondition.
inline double check_equivalence(const NetworkParams& theta, const ActivationSpec& act,
                                RegularizerKind h, const std::vector<Vector>& probes) {
  if (!act.homogeneous)
    throw std::invalid_argument("equivalence requires homogeneous activation");
  const Decomposition dec = decompose(theta, h);
  Workspace ws;
  double worst = 0.0;
  for (const auto& x : probes) {
    const double lhs = forward(theta, act, x, ws);
    const double rhs = forward_scaled(dec.net, act, x, ws);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace scalereg
