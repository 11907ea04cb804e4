#pragma once

#include <random>
#include <vector>

#include "scalereg/network.hpp"

namespace scalereg::testing {

inline NetworkParams random_params(const Architecture& arch, std::mt19937_64& rng,
                                   double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  NetworkParams p = NetworkParams::zeros(arch);
  for (auto& w : p.layers)
    for (double& v : w.data()) v = normal(rng);
  return p;
}

inline Vector random_vector(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector x(d);
  for (double& v : x) v = normal(rng);
  return x;
}

inline Architecture random_arch(std::mt19937_64& rng, std::size_t max_depth = 3,
                                std::size_t max_width = 6) {
  std::uniform_int_distribution<std::size_t> depth_dist(1, max_depth);
  std::uniform_int_distribution<std::size_t> width_dist(1, max_width);
  const std::size_t L = depth_dist(rng);
  std::vector<std::size_t> widths(L + 2);
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) widths[i] = width_dist(rng);
  widths.back() = 1;
  return Architecture(widths);
}

// one-sample dataset helper for scalar networks
inline Dataset scalar_dataset(std::vector<double> xs, std::vector<double> ys) {
  Dataset data;
  for (double x : xs) data.inputs.push_back({x});
  data.responses = std::move(ys);
  return data;
}

}  // namespace scalereg::testing
