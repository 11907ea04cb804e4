#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "scalereg/matrix.hpp"

namespace scalereg {

/// Fixed-design regression sample: inputs x_1..x_n, responses y_i, and
/// optionally the true regression values g*(x_i) when data are synthetic.
struct Dataset {
  std::vector<Vector> inputs;
  Vector responses;
  std::optional<Vector> truth;

  std::size_t size() const { return inputs.size(); }
  std::size_t dim() const { return inputs.empty() ? 0 : inputs.front().size(); }

  void validate() const {
    if (inputs.empty()) throw std::invalid_argument("dataset is empty");
    if (responses.size() != inputs.size())
      throw std::invalid_argument("responses length does not match inputs");
    if (truth && truth->size() != inputs.size())
      throw std::invalid_argument("truth length does not match inputs");
    const std::size_t d = inputs.front().size();
    for (const auto& x : inputs)
      if (x.size() != d) throw std::invalid_argument("inconsistent input dimension");
  }
};

// ||x||_n = sqrt(mean of squared Euclidean input norms)
inline double input_norm_n(const Dataset& data) {
  double s = 0.0;
  for (const auto& x : data.inputs) s += dot(x, x);
  return std::sqrt(s / static_cast<double>(data.size()));
}

}  // namespace scalereg
