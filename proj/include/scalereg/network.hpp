#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "scalereg/activation.hpp"
#include "scalereg/dataset.hpp"
#include "scalereg/matrix.hpp"

namespace scalereg {

/// Layer widths p_0..p_{L+1} of a feedforward network with L hidden layers.
/// The output layer is scalar (p_{L+1} = 1).
struct Architecture {
  std::vector<std::size_t> widths;

  Architecture() = default;
  explicit Architecture(std::vector<std::size_t> w) : widths(std::move(w)) { validate(); }

  std::size_t depth() const { return widths.size() - 2; }  // L
  std::size_t input_dim() const { return widths.front(); }

  void validate() const {
    if (widths.size() < 3) throw std::invalid_argument("architecture needs at least one hidden layer");
    if (widths.back() != 1) throw std::invalid_argument("output width must be 1");
    for (std::size_t w : widths)
      if (w == 0) throw std::invalid_argument("layer widths must be positive");
  }

  bool operator==(const Architecture& other) const { return widths == other.widths; }
};

// P = sum over layers of p_{l+1} * p_l
inline std::size_t param_count(const Architecture& arch) {
  std::size_t p = 0;
  for (std::size_t l = 0; l + 1 < arch.widths.size(); ++l)
    p += arch.widths[l + 1] * arch.widths[l];
  return p;
}

/// Weight matrices W^0..W^L; layers[l] maps width p_l to p_{l+1}.
struct NetworkParams {
  Architecture arch;
  std::vector<Matrix> layers;

  static NetworkParams zeros(const Architecture& arch) {
    NetworkParams p;
    p.arch = arch;
    p.layers.reserve(arch.widths.size() - 1);
    for (std::size_t l = 0; l + 1 < arch.widths.size(); ++l)
      p.layers.emplace_back(arch.widths[l + 1], arch.widths[l]);
    return p;
  }

  std::size_t depth() const { return arch.depth(); }

  void check_shapes() const {
    if (layers.size() != arch.widths.size() - 1)
      throw std::invalid_argument("layer count does not match architecture");
    for (std::size_t l = 0; l < layers.size(); ++l)
      if (layers[l].rows() != arch.widths[l + 1] || layers[l].cols() != arch.widths[l])
        throw std::invalid_argument("layer shape does not match architecture");
  }

  bool all_finite() const {
    for (const auto& w : layers)
      if (!w.all_finite()) return false;
    return true;
  }

  void scale_entries(double a) {
    for (auto& w : layers)
      for (double& v : w.data()) v *= a;
  }

  template <typename F>
  void for_each_entry(F&& f) const {
    for (const auto& w : layers)
      for (double v : w.data()) f(v);
  }
};

inline Vector flatten(const NetworkParams& p) {
  Vector out;
  out.reserve(param_count(p.arch));
  for (const auto& w : p.layers) out.insert(out.end(), w.data().begin(), w.data().end());
  return out;
}

inline void unflatten(const Vector& flat, NetworkParams& p) {
  std::size_t k = 0;
  for (auto& w : p.layers)
    for (double& v : w.data()) v = flat[k++];
  if (k != flat.size()) throw std::invalid_argument("flat vector length mismatch");
}

// In-place linear algebra over the layer list, used by the optimizers.
inline void axpy(NetworkParams& y, double a, const NetworkParams& x) {
  for (std::size_t l = 0; l < y.layers.size(); ++l) {
    auto& yd = y.layers[l].data();
    const auto& xd = x.layers[l].data();
    for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += a * xd[i];
  }
}

inline double param_dot(const NetworkParams& a, const NetworkParams& b) {
  double s = 0.0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) s += dot(a.layers[l].data(), b.layers[l].data());
  return s;
}

inline double frobenius_distance(const NetworkParams& a, const NetworkParams& b) {
  double s = 0.0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    const auto& ad = a.layers[l].data();
    const auto& bd = b.layers[l].data();
    for (std::size_t i = 0; i < ad.size(); ++i) {
      const double d = ad[i] - bd[i];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

/// Reusable per-evaluation buffers so the optimizer's hot loop does not
/// allocate. pre[l] holds W^l a_l, act[l] holds the layer activations.
struct Workspace {
  std::vector<Vector> pre;
  std::vector<Vector> act;
  Vector delta, delta_next;
};

inline double forward(const NetworkParams& theta, const ActivationSpec& act, const Vector& x,
                      Workspace& ws) {
  const std::size_t num_layers = theta.layers.size();  // L+1
  if (x.size() != theta.arch.input_dim())
    throw std::invalid_argument("input dimension does not match network");
  ws.pre.resize(num_layers);
  const Vector* h = &x;
  for (std::size_t l = 0; l + 1 < num_layers; ++l) {
    theta.layers[l].multiply(*h, ws.pre[l]);
    act.apply_inplace(ws.pre[l]);
    h = &ws.pre[l];
  }
  theta.layers[num_layers - 1].multiply(*h, ws.pre[num_layers - 1]);
  return ws.pre[num_layers - 1][0];
}

inline double forward(const NetworkParams& theta, const ActivationSpec& act, const Vector& x) {
  Workspace ws;
  return forward(theta, act, x, ws);
}

inline void forward_all(const NetworkParams& theta, const ActivationSpec& act,
                        const std::vector<Vector>& inputs, Vector& out, Workspace& ws) {
  out.resize(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) out[i] = forward(theta, act, inputs[i], ws);
}

/// Scale/direction pair (kappa, Omega); the represented function is
/// x -> kappa * g_Omega(x).
struct ScaledNetwork {
  double kappa = 0.0;
  NetworkParams omega;
};

inline double forward_scaled(const ScaledNetwork& net, const ActivationSpec& act, const Vector& x) {
  return net.kappa * forward(net.omega, act, x);
}

inline double forward_scaled(const ScaledNetwork& net, const ActivationSpec& act, const Vector& x,
                             Workspace& ws) {
  return net.kappa * forward(net.omega, act, x, ws);
}

// Inner subnetwork: the value entering layer l. l = 0 returns x itself,
// l in 1..L returns phi^l(W^{l-1} ... phi^1(W^0 x)).
inline Vector inner_subnetwork(const NetworkParams& theta, const ActivationSpec& act,
                               std::size_t l, const Vector& x) {
  const std::size_t L = theta.depth();
  if (l > L) throw std::out_of_range("inner subnetwork index out of range");
  if (x.size() != theta.arch.input_dim())
    throw std::invalid_argument("input dimension does not match network");
  Vector h = x, tmp;
  for (std::size_t j = 0; j < l; ++j) {
    theta.layers[j].multiply(h, tmp);
    act.apply_inplace(tmp);
    h = tmp;
  }
  return h;
}

// Outer subnetwork: the map applied on top of the inner value. For
// l in 1..L it is W^L phi^L(... W^l phi^l(W^{l-1} z)); l = L+1 is z -> W^L z.
inline double outer_subnetwork(const NetworkParams& theta, const ActivationSpec& act,
                               std::size_t l, const Vector& z) {
  const std::size_t L = theta.depth();
  if (l < 1 || l > L + 1) throw std::out_of_range("outer subnetwork index out of range");
  if (z.size() != theta.arch.widths[l - 1])
    throw std::invalid_argument("input dimension does not match subnetwork");
  Vector h = z, tmp;
  if (l <= L) {
    theta.layers[l - 1].multiply(h, tmp);
    act.apply_inplace(tmp);
    h = tmp;
    for (std::size_t j = l; j + 1 <= L; ++j) {
      theta.layers[j].multiply(h, tmp);
      act.apply_inplace(tmp);
      h = tmp;
    }
  }
  theta.layers[L].multiply(h, tmp);
  return tmp[0];
}

struct NetworkNorms {
  double l1 = 0.0;
  double frobenius = 0.0;
  std::vector<double> layer_spectral;  // sigma_max(W^l), l = 0..L
  double param_op = 0.0;               // sqrt(sum of squared spectral norms)
};

inline NetworkNorms norms(const NetworkParams& theta) {
  NetworkNorms out;
  double sq = 0.0, op_sq = 0.0;
  out.layer_spectral.reserve(theta.layers.size());
  for (const auto& w : theta.layers) {
    for (double v : w.data()) {
      out.l1 += std::abs(v);
      sq += v * v;
    }
    const double s = spectral_norm(w);
    out.layer_spectral.push_back(s);
    op_sq += s * s;
  }
  out.frobenius = std::sqrt(sq);
  out.param_op = std::sqrt(op_sq);
  return out;
}

/// grad += sum_i weights[i] * d g_theta(x_i) / d theta via reverse
/// accumulation. Returns the forward values as a byproduct in `values`.
inline void weighted_gradient(const NetworkParams& theta, const ActivationSpec& act,
                              const std::vector<Vector>& inputs, const Vector& weights,
                              NetworkParams& grad, Vector& values, Workspace& ws) {
  const std::size_t num_layers = theta.layers.size();  // L+1
  ws.pre.resize(num_layers);
  ws.act.resize(num_layers);  // act[l] = input vector of layer l
  values.resize(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    // forward, keeping pre-activations
    const Vector* h = &inputs[i];
    for (std::size_t l = 0; l + 1 < num_layers; ++l) {
      theta.layers[l].multiply(*h, ws.pre[l]);
      ws.act[l + 1] = ws.pre[l];
      act.apply_inplace(ws.act[l + 1]);
      h = &ws.act[l + 1];
    }
    theta.layers[num_layers - 1].multiply(*h, ws.pre[num_layers - 1]);
    values[i] = ws.pre[num_layers - 1][0];

    const double w = weights[i];
    if (w == 0.0) continue;

    // backward
    ws.delta.assign(1, 1.0);
    for (std::size_t l = num_layers; l-- > 0;) {
      const Vector& layer_in = (l == 0) ? inputs[i] : ws.act[l];
      add_scaled_outer(grad.layers[l], ws.delta, layer_in, w);
      if (l == 0) break;
      theta.layers[l].multiply_transpose(ws.delta, ws.delta_next);
      for (std::size_t j = 0; j < ws.delta_next.size(); ++j)
        ws.delta_next[j] *= act.derivative(ws.pre[l - 1][j]);
      std::swap(ws.delta, ws.delta_next);
    }
  }
}

struct ObjectiveGradient {
  double dkappa = 0.0;
  NetworkParams domega;
};

/// Gradient of (1/n) sum (y_i - kappa g_Omega(x_i))^2 + lambda kappa with
/// respect to (kappa, Omega). Matches central finite differences wherever the
/// activation is differentiable.
inline ObjectiveGradient gradient(const ScaledNetwork& net, const ActivationSpec& act,
                                  const Dataset& data, double lambda) {
  data.validate();
  net.omega.check_shapes();
  const std::size_t n = data.size();
  Workspace ws;
  Vector g_vals;
  ObjectiveGradient out;
  out.domega = NetworkParams::zeros(net.omega.arch);

  // residual weights: d obj / d g_i = -(2 kappa / n) (y_i - kappa g_i)
  Vector weights(n, 0.0);
  forward_all(net.omega, act, data.inputs, g_vals, ws);
  double dkappa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = data.responses[i] - net.kappa * g_vals[i];
    weights[i] = -(2.0 * net.kappa / static_cast<double>(n)) * r;
    dkappa += -(2.0 / static_cast<double>(n)) * r * g_vals[i];
  }
  out.dkappa = dkappa + lambda;
  Vector unused;
  weighted_gradient(net.omega, act, data.inputs, weights, out.domega, unused, ws);
  return out;
}

// Prediction distance sqrt((1/n) sum (g_a(x_i) - g_b(x_i))^2).
inline double pred_distance(const NetworkParams& a, const NetworkParams& b,
                            const ActivationSpec& act, const Dataset& data) {
  if (a.arch.input_dim() != b.arch.input_dim())
    throw std::invalid_argument("input dimensions differ");
  Workspace ws;
  double s = 0.0;
  for (const auto& x : data.inputs) {
    const double d = forward(a, act, x, ws) - forward(b, act, x, ws);
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(data.size()));
}

inline double pred_distance(const ScaledNetwork& a, const ScaledNetwork& b,
                            const ActivationSpec& act, const Dataset& data) {
  if (a.omega.arch.input_dim() != b.omega.arch.input_dim())
    throw std::invalid_argument("input dimensions differ");
  Workspace ws;
  double s = 0.0;
  for (const auto& x : data.inputs) {
    const double d = forward_scaled(a, act, x, ws) - forward_scaled(b, act, x, ws);
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(data.size()));
}

}  // namespace scalereg
