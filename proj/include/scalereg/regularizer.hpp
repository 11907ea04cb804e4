#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "scalereg/network.hpp"

namespace scalereg {

/// Direction regularizers: the total entrywise l1 norm, or the maximum of the
/// per-layer l1 norms. Both are positive definite and homogeneous of degree 1.
enum class RegularizerKind { sum_l1, max_layer_l1 };

struct HomogeneitySpec {
  double degree = 1.0;
};

inline HomogeneitySpec regularizer_homogeneity(RegularizerKind) { return {1.0}; }

inline RegularizerKind parse_regularizer(const std::string& name) {
  if (name == "sum_l1") return RegularizerKind::sum_l1;
  if (name == "max_layer_l1") return RegularizerKind::max_layer_l1;
  throw std::invalid_argument("unknown regularizer: " + name);
}

inline double layer_l1(const Matrix& w) {
  double s = 0.0;
  for (double v : w.data()) s += std::abs(v);
  return s;
}

inline double value(RegularizerKind kind, const NetworkParams& theta) {
  if (kind == RegularizerKind::sum_l1) {
    double s = 0.0;
    for (const auto& w : theta.layers) s += layer_l1(w);
    return s;
  }
  double m = 0.0;
  for (const auto& w : theta.layers) m = std::max(m, layer_l1(w));
  return m;
}

inline bool in_unit_ball(RegularizerKind kind, const NetworkParams& theta, double tol = 0.0) {
  return value(kind, theta) <= 1.0 + tol;
}

/// Exact Euclidean projection of v onto the l1 ball of the given radius.
/// Sort-based thresholding; ties resolved by stable order over the original
/// entry positions.
inline Vector project_l1_ball(const Vector& v, double radius = 1.0) {
  double l1 = 0.0;
  for (double x : v) l1 += std::abs(x);
  if (l1 <= radius) return v;

  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(v[a]) > std::abs(v[b]);
  });

  double running = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const double u = std::abs(v[order[j]]);
    running += u;
    const double cand = (running - radius) / static_cast<double>(j + 1);
    if (u - cand > 0.0) tau = cand;
  }
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - tau;
    out[i] = mag > 0.0 ? (v[i] > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

inline NetworkParams project_unit_ball(RegularizerKind kind, const NetworkParams& theta) {
  NetworkParams out = theta;
  if (kind == RegularizerKind::sum_l1) {
    out = NetworkParams::zeros(theta.arch);
    unflatten(project_l1_ball(flatten(theta)), out);
  } else {
    for (auto& w : out.layers) {
      Vector proj = project_l1_ball(w.data());
      w.data() = std::move(proj);
    }
  }
  return out;
}

/// Uniform draw from the regularizer's unit sphere: random signs with
/// Dirichlet(1,..,1) magnitudes, taken per layer for the max-layer norm.
inline NetworkParams random_unit_sphere_direction(const Architecture& arch, RegularizerKind kind,
                                                  std::mt19937_64& rng) {
  NetworkParams omega = NetworkParams::zeros(arch);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);
  auto fill_block = [&](std::vector<Matrix*>& mats) {
    double total = 0.0;
    for (Matrix* m : mats)
      for (double& v : m->data()) {
        v = expo(rng);
        total += v;
      }
    for (Matrix* m : mats)
      for (double& v : m->data()) v = (coin(rng) ? v : -v) / total;
  };
  if (kind == RegularizerKind::sum_l1) {
    std::vector<Matrix*> all;
    for (auto& m : omega.layers) all.push_back(&m);
    fill_block(all);
  } else {
    for (auto& m : omega.layers) {
      std::vector<Matrix*> one{&m};
      fill_block(one);
    }
  }
  return omega;
}

}  // namespace scalereg
