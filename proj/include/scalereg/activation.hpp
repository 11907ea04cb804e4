#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "scalereg/matrix.hpp"

namespace scalereg {

enum class ActivationKind { relu, leaky_relu, elu, tanh, silu };

/// Coordinatewise activation with its Lipschitz constant and homogeneity tag.
/// All kinds satisfy phi(0) = 0. At kinks the derivative takes the value of
/// the negative branch (relu'(0) = 0), so gradients are deterministic.
struct ActivationSpec {
  ActivationKind kind = ActivationKind::relu;
  double a_lip = 1.0;
  bool homogeneous = true;
  double shape = 0.0;  // c for leaky_relu / elu, unused otherwise

  double apply(double z) const {
    switch (kind) {
      case ActivationKind::relu:
        return z > 0.0 ? z : 0.0;
      case ActivationKind::leaky_relu:
        return z > 0.0 ? z : shape * z;
      case ActivationKind::elu:
        return z > 0.0 ? z : shape * (std::exp(z) - 1.0);
      case ActivationKind::tanh:
        return std::tanh(z);
      case ActivationKind::silu:
        return z / (1.0 + std::exp(-z));
    }
    return 0.0;
  }

  double derivative(double z) const {
    switch (kind) {
      case ActivationKind::relu:
        return z > 0.0 ? 1.0 : 0.0;
      case ActivationKind::leaky_relu:
        return z > 0.0 ? 1.0 : shape;
      case ActivationKind::elu:
        return z > 0.0 ? 1.0 : shape * std::exp(z);
      case ActivationKind::tanh: {
        const double t = std::tanh(z);
        return 1.0 - t * t;
      }
      case ActivationKind::silu: {
        const double s = 1.0 / (1.0 + std::exp(-z));
        return s * (1.0 + z * (1.0 - s));
      }
    }
    return 0.0;
  }

  void apply_inplace(Vector& v) const {
    for (double& z : v) z = apply(z);
  }
};

inline ActivationSpec make_activation(ActivationKind kind, double shape = -1.0) {
  ActivationSpec act;
  act.kind = kind;
  switch (kind) {
    case ActivationKind::relu:
      act.a_lip = 1.0;
      act.homogeneous = true;
      break;
    case ActivationKind::leaky_relu:
      act.a_lip = 1.0;
      act.homogeneous = true;
      act.shape = shape < 0.0 ? 0.01 : shape;
      if (act.shape <= 0.0 || act.shape >= 1.0)
        throw std::invalid_argument("leaky_relu slope must lie in (0,1)");
      break;
    case ActivationKind::elu:
      act.a_lip = 1.0;
      act.homogeneous = false;
      act.shape = shape < 0.0 ? 1.0 : shape;
      if (act.shape <= 0.0 || act.shape > 1.0)
        throw std::invalid_argument("elu shape must lie in (0,1]");
      break;
    case ActivationKind::tanh:
      act.a_lip = 1.0;
      act.homogeneous = false;
      break;
    case ActivationKind::silu:
      act.a_lip = 1.1;
      act.homogeneous = false;
      break;
  }
  return act;
}

inline ActivationSpec make_activation(const std::string& name, double shape = -1.0) {
  if (name == "relu") return make_activation(ActivationKind::relu);
  if (name == "leaky_relu") return make_activation(ActivationKind::leaky_relu, shape);
  if (name == "elu") return make_activation(ActivationKind::elu, shape);
  if (name == "tanh") return make_activation(ActivationKind::tanh);
  if (name == "silu") return make_activation(ActivationKind::silu);
  throw std::invalid_argument("unknown activation: " + name);
}

}  // namespace scalereg
