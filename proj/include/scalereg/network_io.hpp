#pragma once

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "scalereg/network.hpp"

namespace scalereg {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Text format: a version line, the depth and widths, then the matrices
/// W^0..W^L row-major with 17 significant digits. An optional `meta` block of
/// key/value lines follows (kappa, lambda, objective, iterations).
inline void save_network(std::ostream& os, const NetworkParams& params,
                         const std::map<std::string, double>& meta = {}) {
  params.check_shapes();
  os << "scalereg-network 1\n";
  os << "L " << params.depth() << "\n";
  os << "widths";
  for (std::size_t w : params.arch.widths) os << ' ' << w;
  os << "\n";
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const Matrix& w = params.layers[l];
    os << "W" << l << "\n";
    for (std::size_t i = 0; i < w.rows(); ++i) {
      for (std::size_t j = 0; j < w.cols(); ++j) {
        if (j) os << ' ';
        os << format_double(w(i, j));
      }
      os << "\n";
    }
  }
  if (!meta.empty()) {
    os << "meta\n";
    for (const auto& [key, value] : meta) os << key << ' ' << format_double(value) << "\n";
  }
}

struct LoadedNetwork {
  NetworkParams params;
  std::map<std::string, double> meta;
};

inline LoadedNetwork load_network(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "scalereg-network 1")
    throw std::runtime_error("not a scalereg network file");
  std::size_t depth = 0;
  {
    std::getline(is, line);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag >> depth) || tag != "L") throw std::runtime_error("bad depth line");
  }
  Architecture arch;
  {
    std::getline(is, line);
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag != "widths") throw std::runtime_error("bad widths line");
    std::size_t w;
    while (ls >> w) arch.widths.push_back(w);
    arch.validate();
    if (arch.depth() != depth) throw std::runtime_error("depth does not match widths");
  }
  LoadedNetwork out;
  out.params = NetworkParams::zeros(arch);
  for (std::size_t l = 0; l < out.params.layers.size(); ++l) {
    std::getline(is, line);
    if (line != "W" + std::to_string(l)) throw std::runtime_error("expected layer W" + std::to_string(l));
    Matrix& w = out.params.layers[l];
    for (std::size_t i = 0; i < w.rows(); ++i) {
      std::getline(is, line);
      std::istringstream ls(line);
      for (std::size_t j = 0; j < w.cols(); ++j)
        if (!(ls >> w(i, j))) throw std::runtime_error("short matrix row");
    }
  }
  if (std::getline(is, line) && line == "meta") {
    std::string key;
    double value;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      if (ls >> key >> value) out.meta[key] = value;
    }
  }
  return out;
}

inline void save_scaled_network(std::ostream& os, const ScaledNetwork& net,
                                std::map<std::string, double> extra_meta = {}) {
  extra_meta["kappa"] = net.kappa;
  save_network(os, net.omega, extra_meta);
}

inline ScaledNetwork load_scaled_network(std::istream& is) {
  LoadedNetwork loaded = load_network(is);
  ScaledNetwork net;
  net.omega = std::move(loaded.params);
  auto it = loaded.meta.find("kappa");
  net.kappa = it == loaded.meta.end() ? 1.0 : it->second;
  return net;
}

}  // namespace scalereg
