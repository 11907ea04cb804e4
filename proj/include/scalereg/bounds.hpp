#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scalereg/dataset.hpp"
#include "scalereg/network.hpp"

namespace scalereg {

namespace detail {

// max over excluded layers l of prod_{j != l} max(sigma(W^j), sigma(V^j))
inline double max_excluded_product(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t m = a.size();
  std::vector<double> s(m);
  for (std::size_t j = 0; j < m; ++j) s[j] = std::max(a[j], b[j]);
  double best = 0.0;
  for (std::size_t l = 0; l < m; ++l) {
    double prod = 1.0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != l) prod *= s[j];
    best = std::max(best, prod);
  }
  return best;
}

}  // namespace detail

/// c_Lip(x) = 2 a_Lip^L sqrt(L) |x| max_l prod_{j != l} (|W^j| v |V^j|),
/// with operator norms; bounds |g_Theta(x) - g_Gamma(x)| / |Theta - Gamma|_F.
inline double lipschitz_pointwise(const NetworkParams& theta, const NetworkParams& gamma,
                                  const ActivationSpec& act, const Vector& x) {
  if (!(theta.arch == gamma.arch)) throw std::invalid_argument("architecture mismatch");
  const double L = static_cast<double>(theta.depth());
  const auto nt = norms(theta), ng = norms(gamma);
  const double prod = detail::max_excluded_product(nt.layer_spectral, ng.layer_spectral);
  return 2.0 * std::pow(act.a_lip, L) * std::sqrt(L) * euclidean_norm(x) * prod;
}

/// Same constant with |x| replaced by the empirical norm |x|_n.
inline double lipschitz_empirical(const NetworkParams& theta, const NetworkParams& gamma,
                                  const ActivationSpec& act, const Dataset& data) {
  if (!(theta.arch == gamma.arch)) throw std::invalid_argument("architecture mismatch");
  const double L = static_cast<double>(theta.depth());
  const auto nt = norms(theta), ng = norms(gamma);
  const double prod = detail::max_excluded_product(nt.layer_spectral, ng.layer_spectral);
  return 2.0 * std::pow(act.a_lip, L) * std::sqrt(L) * input_norm_n(data) * prod;
}

/// c_Lip1 = 2 (2 a_Lip / L)^L sqrt(L) |x|_n: Lipschitz constant and uniform
/// bound of the network class over the l1 unit ball.
inline double lipschitz_unit_ball(const ActivationSpec& act, std::size_t L, const Dataset& data) {
  if (L < 1) throw std::invalid_argument("depth must be at least 1");
  const double Ld = static_cast<double>(L);
  return 2.0 * std::pow(2.0 * act.a_lip / Ld, Ld) * std::sqrt(Ld) * input_norm_n(data);
}

/// Metric entropy bound 6 c^2 / r^2 * log(e P r^2 / c^2 v 2e) of the
/// unit-ball class at radius r; zero for the constant class (c = 0).
inline double entropy_bound(double r, double c_lip1, std::size_t P) {
  if (r <= 0.0) throw std::invalid_argument("radius must be positive");
  if (c_lip1 < 0.0) throw std::invalid_argument("c_lip1 must be nonnegative");
  if (c_lip1 == 0.0) return 0.0;
  const double ratio = r * r / (c_lip1 * c_lip1);
  const double arg = std::max(std::numbers::e * static_cast<double>(P) * ratio,
                              2.0 * std::numbers::e);
  return 6.0 / ratio * std::log(arg);
}

/// Dudley integral bound (5c/2) sqrt(log(eP v 2e)) log(8 sigma c / delta),
/// valid for 0 < delta <= 8 sigma c.
inline double dudley_bound(double delta, double sigma, double c_lip1, std::size_t P) {
  if (c_lip1 < 0.0) throw std::invalid_argument("c_lip1 must be nonnegative");
  if (c_lip1 == 0.0) return 0.0;
  if (delta <= 0.0 || sigma <= 0.0) throw std::invalid_argument("delta and sigma must be positive");
  if (delta > 8.0 * sigma * c_lip1 * (1.0 + 1e-12))
    throw std::invalid_argument("delta exceeds 8 sigma c_lip1");
  const double log_factor =
      std::sqrt(std::log(std::max(std::numbers::e * static_cast<double>(P), 2.0 * std::numbers::e)));
  return 2.5 * c_lip1 * log_factor * std::log(8.0 * sigma * c_lip1 / delta);
}

/// Tuning-parameter formula
/// lambda = a (2 a_Lip / L)^L |x|_n sqrt(L log(2P)) log(2n) / sqrt(n).
inline double tuning_lambda(std::size_t n, std::size_t P, std::size_t L, double a_lip,
                            double x_norm_n, double a) {
  if (n == 0 || P == 0 || L == 0) throw std::invalid_argument("n, P, L must be positive");
  if (a_lip <= 0.0 || x_norm_n < 0.0 || a <= 0.0)
    throw std::invalid_argument("constants must be positive");
  const double Ld = static_cast<double>(L);
  const double nd = static_cast<double>(n);
  return a * std::pow(2.0 * a_lip / Ld, Ld) * x_norm_n *
         std::sqrt(Ld * std::log(2.0 * static_cast<double>(P))) * std::log(2.0 * nd) /
         std::sqrt(nd);
}

/// Tail bound P((1/n) sum u_i^2 >= v) <= exp(-n v / (12 K^2)), valid for
/// v >= 2 gamma^2.
inline double subgaussian_tail(double v, std::size_t n, double K, double gamma) {
  if (K <= 0.0 || gamma <= 0.0) throw std::invalid_argument("K and gamma must be positive");
  if (v < 2.0 * gamma * gamma * (1.0 - 1e-12))
    throw std::invalid_argument("tail bound requires v >= 2 gamma^2");
  return std::exp(-static_cast<double>(n) * v / (12.0 * K * K));
}

/// Snapshot of every closed-form quantity for one experiment configuration.
struct BoundReport {
  std::size_t n = 0, P = 0, L = 0;
  double a_lip = 1.0;
  double inputs_norm = 0.0;  // |x|_n
  double constant_a = 1.0;
  double c_lip1 = 0.0;
  double lambda_theoretical = 0.0;
  std::vector<std::pair<double, double>> entropy_at;  // (r, bound)
  double dudley = 0.0;
  double dudley_delta = 0.0, dudley_sigma = 0.0;
};

inline BoundReport make_bound_report(const ActivationSpec& act, const Architecture& arch,
                                     const Dataset& data, double a, double dudley_sigma,
                                     double dudley_delta, const std::vector<double>& r_grid) {
  BoundReport rep;
  rep.n = data.size();
  rep.P = param_count(arch);
  rep.L = arch.depth();
  rep.a_lip = act.a_lip;
  rep.inputs_norm = input_norm_n(data);
  rep.constant_a = a;
  rep.c_lip1 = lipschitz_unit_ball(act, rep.L, data);
  rep.lambda_theoretical = tuning_lambda(rep.n, rep.P, rep.L, rep.a_lip, rep.inputs_norm, a);
  for (double r : r_grid) rep.entropy_at.emplace_back(r, entropy_bound(r, rep.c_lip1, rep.P));
  rep.dudley_sigma = dudley_sigma;
  rep.dudley_delta = dudley_delta;
  rep.dudley = dudley_bound(dudley_delta, dudley_sigma, rep.c_lip1, rep.P);
  return rep;
}

}  // namespace scalereg
