#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scalereg/bounds.hpp"
#include "scalereg/csv.hpp"
#include "scalereg/dataset.hpp"
#include "scalereg/effective_noise.hpp"
#include "scalereg/estimator.hpp"
#include "scalereg/network.hpp"
#include "scalereg/parallel.hpp"
#include "scalereg/regularizer.hpp"
#include "scalereg/reparam.hpp"
#include "scalereg/rng.hpp"
#include "scalereg/subgauss.hpp"

namespace scalereg {

enum class InputDist { gaussian_sphere, uniform_cube };

inline InputDist parse_input_dist(const std::string& name) {
  if (name == "gaussian_sphere") return InputDist::gaussian_sphere;
  if (name == "uniform_cube") return InputDist::uniform_cube;
  throw std::invalid_argument("unknown input distribution: " + name);
}

struct LambdaRule {
  enum class Kind { theoretical, monte_carlo_quantile };
  Kind kind = Kind::monte_carlo_quantile;
  double a = 1.0;       // theoretical rule constant
  int reps = 200;       // quantile replicates
  double safety = 1.2;  // multiplier on the empirical quantile
};

struct ExperimentConfig {
  Architecture arch;
  ActivationSpec activation = make_activation(ActivationKind::relu);
  RegularizerKind regularizer = RegularizerKind::sum_l1;
  double kappa_star = 1.0;
  InputDist input_dist = InputDist::gaussian_sphere;
  SubGaussianSpec noise = gaussian_subgauss_params(1.0);
  std::vector<std::size_t> n_grid = {256};
  int replicates = 1;  // M
  double level_t = 0.05;
  LambdaRule lambda_rule;
  std::uint64_t seed = 0;
  std::string output = "out.csv";
  FitOptions fit_opts;
  NoiseOptimOptions noise_opts;
  int threads = 1;
  // packing experiment extras
  double packing_resolution = 0.01;
  std::vector<double> r_grid;
  // bounds report extras (zero means "derive a default")
  double dudley_delta = 0.0, dudley_sigma = 0.0;

  void validate() const {
    arch.validate();
    if (n_grid.empty()) throw std::invalid_argument("sample-size grid is empty");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
      if (n_grid[i] <= n_grid[i - 1])
        throw std::invalid_argument("sample-size grid must be strictly increasing");
    if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
    if (level_t <= 0.0 || level_t >= 1.0) throw std::invalid_argument("level t must lie in (0,1)");
    if (kappa_star < 0.0) throw std::invalid_argument("teacher scale must be nonnegative");
    if (packing_resolution <= 0.0 || packing_resolution > 1.0)
      throw std::invalid_argument("packing resolution must lie in (0,1]");
  }
};

/// Random teacher (kappa*, Omega*): a randomly drawn direction rescaled so
/// that h(Omega*) = 1 exactly. The draw places most of its mass on a random
/// active path through the layers (positive inner weights, so the relu path
/// stays live) plus a dense standard-normal background. A chain of positive
/// weights is what keeps |g_Omega*| away from numerical zero at depth;
/// an i.i.d. dense draw cancels itself down to a function that is orders of
/// magnitude below any noise level.
inline ScaledNetwork gen_teacher(const Architecture& arch, RegularizerKind h, double kappa_star,
                                 std::uint64_t seed) {
  if (kappa_star < 0.0) throw std::invalid_argument("teacher scale must be nonnegative");
  std::mt19937_64 rng = make_rng(seed, 0x7e4c);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  ScaledNetwork teacher;
  teacher.kappa = kappa_star;
  teacher.omega = NetworkParams::zeros(arch);
  auto& layers = teacher.omega.layers;

  std::size_t prev = std::uniform_int_distribution<std::size_t>(0, arch.widths[0] - 1)(rng);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::size_t unit =
        std::uniform_int_distribution<std::size_t>(0, arch.widths[l + 1] - 1)(rng);
    // equal magnitudes balance the per-layer masses, which maximizes the
    // path's product under the total-mass constraint; only the output weight
    // may flip sign without deadening the relu chain
    layers[l](unit, prev) = (l + 1 == layers.size() && coin(rng)) ? -1.0 : 1.0;
    prev = unit;
  }

  const double path_mass = value(h, teacher.omega);
  NetworkParams background = NetworkParams::zeros(arch);
  for (auto& w : background.layers)
    for (double& v : w.data()) v = normal(rng);
  const double bg_mass = value(h, background);
  if (bg_mass > 0.0) {
    background.scale_entries(0.1 * path_mass / bg_mass);
    axpy(teacher.omega, 1.0, background);
  }

  teacher.omega.scale_entries(1.0 / value(h, teacher.omega));
  return teacher;
}

inline Vector draw_input(InputDist dist, std::size_t d, std::mt19937_64& rng) {
  Vector x(d);
  if (dist == InputDist::gaussian_sphere) {
    std::normal_distribution<double> normal(0.0, 1.0);
    double norm = 0.0;
    do {
      for (double& v : x) v = normal(rng);
      norm = euclidean_norm(x);
    } while (norm == 0.0);
    const double target = std::sqrt(static_cast<double>(d));
    for (double& v : x) v *= target / norm;
  } else {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (double& v : x) v = unif(rng);
  }
  return x;
}

/// y_i = kappa* g_Omega*(x_i) + u_i with i.i.d. inputs and noise; the truth
/// values are retained for prediction-error evaluation.
inline Dataset gen_dataset(const ScaledNetwork& teacher, const ActivationSpec& act, InputDist dist,
                           const SubGaussianSpec& noise, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("dataset size must be at least 1");
  Dataset data;
  data.inputs.reserve(n);
  std::mt19937_64 input_rng = make_rng(seed, 0x11);
  const std::size_t d = teacher.omega.arch.input_dim();
  for (std::size_t i = 0; i < n; ++i) data.inputs.push_back(draw_input(dist, d, input_rng));

  Workspace ws;
  Vector truth(n);
  for (std::size_t i = 0; i < n; ++i) truth[i] = forward_scaled(teacher, act, data.inputs[i], ws);

  std::mt19937_64 noise_rng = make_rng(seed, 0x22);
  Vector u;
  noise.sample(noise_rng, u, n);
  data.responses.resize(n);
  for (std::size_t i = 0; i < n; ++i) data.responses[i] = truth[i] + u[i];
  data.truth = std::move(truth);
  return data;
}

namespace detail {

inline double lambda_for(const ExperimentConfig& cfg, const Dataset& inputs_only,
                         std::uint64_t quantile_seed) {
  if (cfg.lambda_rule.kind == LambdaRule::Kind::theoretical) {
    return tuning_lambda(inputs_only.size(), param_count(cfg.arch), cfg.arch.depth(),
                         cfg.activation.a_lip, input_norm_n(inputs_only), cfg.lambda_rule.a);
  }
  NoiseOptimOptions opts = cfg.noise_opts;
  opts.threads = cfg.threads;
  const NoiseQuantileReport rep =
      estimate_quantile(inputs_only, cfg.noise, cfg.activation, cfg.arch, cfg.regularizer,
                        cfg.level_t, cfg.lambda_rule.reps, opts, quantile_seed);
  return cfg.lambda_rule.safety * rep.lambda_hat;
}

inline double median(Vector v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace detail

struct RateRow {
  std::size_t n = 0;
  int rep = 0;
  double err = 0.0, err_sq = 0.0, lambda = 0.0, oracle = 0.0;
};

struct RateResult {
  std::vector<RateRow> rows;
  std::vector<std::pair<std::size_t, double>> median_err;  // per n
  double slope = 0.0;  // least-squares slope of log median err vs log n
};

/// Fits the estimator across the sample-size grid, M replicates each, and
/// summarizes the error decay. Fit failures become NaN rows, not aborts.
inline RateResult run_rate_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ScaledNetwork teacher =
      gen_teacher(cfg.arch, cfg.regularizer, cfg.kappa_star, derive_seed(cfg.seed, 1));

  RateResult result;
  const std::size_t cells = cfg.n_grid.size() * static_cast<std::size_t>(cfg.replicates);
  result.rows.assign(cells, RateRow{});

  // fixed design per n: inputs drawn once, then fresh noise per replicate
  std::vector<Dataset> designs(cfg.n_grid.size());
  std::vector<double> lambdas(cfg.n_grid.size());
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    designs[ni] = gen_dataset(teacher, cfg.activation, cfg.input_dist, cfg.noise, cfg.n_grid[ni],
                              derive_seed(cfg.seed, 2, ni));
    lambdas[ni] = detail::lambda_for(cfg, designs[ni], derive_seed(cfg.seed, 3, ni));
  }

  parallel_for(cells, cfg.threads, [&](std::size_t cell) {
    const std::size_t ni = cell / cfg.replicates;
    const int rep = static_cast<int>(cell % cfg.replicates);
    const Dataset& design = designs[ni];
    RateRow& row = result.rows[cell];
    row.n = cfg.n_grid[ni];
    row.rep = rep;
    row.lambda = lambdas[ni];
    try {
      Dataset data = design;
      std::mt19937_64 noise_rng = make_rng(cfg.seed, 4, ni, rep);
      Vector u;
      cfg.noise.sample(noise_rng, u, data.size());
      for (std::size_t i = 0; i < data.size(); ++i) data.responses[i] = (*data.truth)[i] + u[i];

      FitOptions opts = cfg.fit_opts;
      opts.seed = derive_seed(cfg.seed, 5, ni, rep);
      opts.threads = 1;  // parallelism lives at the cell level
      const FitResult fitres = fit(data, cfg.arch, cfg.activation, cfg.regularizer, row.lambda, opts);
      row.err = prediction_error(fitres.net, cfg.activation, data);
      row.err_sq = row.err * row.err;
      row.oracle = oracle_bound({teacher, fitres.net}, cfg.activation, data, row.lambda);
    } catch (const std::exception&) {
      row.err = row.err_sq = row.oracle = std::numeric_limits<double>::quiet_NaN();
    }
  });

  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    Vector errs;
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      const double e = result.rows[ni * cfg.replicates + rep].err;
      if (std::isfinite(e)) errs.push_back(e);
    }
    if (!errs.empty()) result.median_err.emplace_back(cfg.n_grid[ni], detail::median(errs));
  }

  // least-squares slope in log-log coordinates
  if (result.median_err.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [n, med] : result.median_err) {
      const double lx = std::log(static_cast<double>(n));
      const double ly = std::log(std::max(med, 1e-300));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double m = static_cast<double>(result.median_err.size());
    result.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return result;
}

inline void write_rate_csv(std::ostream& os, const RateResult& result) {
  csv_header(os, {"n", "rep", "err", "err_sq", "lambda", "oracle_bound"});
  for (const auto& row : result.rows)
    os << row.n << ',' << row.rep << ',' << csv_double(row.err) << ',' << csv_double(row.err_sq)
       << ',' << csv_double(row.lambda) << ',' << csv_double(row.oracle) << '\n';
}

struct CoverageRow {
  int rep = 0;
  double err_sq = 0.0, bound = 0.0;
  int covered = 0;
};

struct CoverageResult {
  std::vector<CoverageRow> rows;
  double lambda = 0.0;
  double frequency = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // Wilson 95% interval
};

/// Per-replicate check of the oracle inequality at a single sample size with
/// a Monte Carlo tuning parameter. Fresh noise per replicate on a fixed
/// design, as the guarantee is stated.
inline CoverageResult run_coverage_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.n_grid.size() != 1)
    throw std::invalid_argument("coverage experiment expects a single sample size");
  if (cfg.lambda_rule.kind != LambdaRule::Kind::monte_carlo_quantile)
    throw std::invalid_argument("coverage experiment requires the monte_carlo_quantile rule");

  const ScaledNetwork teacher =
      gen_teacher(cfg.arch, cfg.regularizer, cfg.kappa_star, derive_seed(cfg.seed, 1));
  const Dataset design = gen_dataset(teacher, cfg.activation, cfg.input_dist, cfg.noise,
                                     cfg.n_grid.front(), derive_seed(cfg.seed, 2, 0));

  CoverageResult result;
  result.lambda = detail::lambda_for(cfg, design, derive_seed(cfg.seed, 3, 0));
  result.rows.assign(cfg.replicates, CoverageRow{});

  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t rep) {
    CoverageRow& row = result.rows[rep];
    row.rep = static_cast<int>(rep);
    Dataset data = design;
    std::mt19937_64 noise_rng = make_rng(cfg.seed, 4, 0, rep);
    Vector u;
    cfg.noise.sample(noise_rng, u, data.size());
    for (std::size_t i = 0; i < data.size(); ++i) data.responses[i] = (*data.truth)[i] + u[i];

    FitOptions opts = cfg.fit_opts;
    opts.seed = derive_seed(cfg.seed, 5, 0, rep);
    opts.threads = 1;
    const FitResult fitres = fit(data, cfg.arch, cfg.activation, cfg.regularizer, result.lambda, opts);
    const double err = prediction_error(fitres.net, cfg.activation, data);
    row.err_sq = err * err;
    row.bound = oracle_bound({teacher, fitres.net}, cfg.activation, data, result.lambda);
    row.covered = row.err_sq <= row.bound ? 1 : 0;
  });

  int hits = 0;
  for (const auto& row : result.rows) hits += row.covered;
  const double m = static_cast<double>(cfg.replicates);
  result.frequency = hits / m;
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double denom = 1.0 + z * z / m;
  const double center = (result.frequency + z * z / (2.0 * m)) / denom;
  const double half =
      z * std::sqrt(result.frequency * (1.0 - result.frequency) / m + z * z / (4.0 * m * m)) / denom;
  result.ci_lo = std::max(0.0, center - half);
  result.ci_hi = std::min(1.0, center + half);
  return result;
}

inline void write_coverage_csv(std::ostream& os, const CoverageResult& result) {
  csv_header(os, {"rep", "err_sq", "bound", "covered"});
  for (const auto& row : result.rows)
    os << row.rep << ',' << csv_double(row.err_sq) << ',' << csv_double(row.bound) << ','
       << row.covered << '\n';
}

struct PackingRow {
  double r = 0.0;
  std::size_t packing_2r = 0;
  double log_packing = 0.0;
  double entropy = 0.0;
};

struct PackingResult {
  std::vector<PackingRow> rows;
  bool all_within = true;
};

/// Greedy maximal 2r-packing of the unit-ball network class, built from a
/// dense parameter grid, checked against the closed-form entropy bound. A
/// maximal 2r-packing lower-bounds the r-covering number, so log(size) must
/// stay below the bound.
inline PackingResult packing_vs_entropy(const Architecture& arch, const ActivationSpec& act,
                                        RegularizerKind h, const Dataset& data, double resolution,
                                        const std::vector<double>& r_grid) {
  data.validate();
  const std::size_t P = param_count(arch);
  if (P > 3) throw std::invalid_argument("packing experiment supports at most 3 parameters");
  if (resolution <= 0.0 || resolution > 1.0)
    throw std::invalid_argument("packing resolution must lie in (0,1]");
  const std::size_t n = data.size();
  const double c1 = lipschitz_unit_ball(act, arch.depth(), data);

  // enumerate unit-ball grid points and their function values
  const long steps = static_cast<long>(std::floor(1.0 / resolution + 1e-9));
  NetworkParams omega = NetworkParams::zeros(arch);
  Vector flat(P, 0.0);
  Workspace ws;
  std::vector<Vector> values;
  std::vector<long> idx(P, -steps);
  while (true) {
    for (std::size_t j = 0; j < P; ++j) flat[j] = static_cast<double>(idx[j]) * resolution;
    unflatten(flat, omega);
    if (in_unit_ball(h, omega, 1e-12)) {
      Vector v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = forward(omega, act, data.inputs[i], ws);
      values.push_back(std::move(v));
    }
    std::size_t k = 0;
    while (k < P && ++idx[k] > steps) idx[k++] = -steps;
    if (k == P) break;
  }

  auto dist_n = [n](const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = a[i] - b[i];
      s += d * d;
    }
    return std::sqrt(s / static_cast<double>(n));
  };

  PackingResult result;
  for (double r : r_grid) {
    std::vector<const Vector*> kept;
    for (const auto& v : values) {
      bool separated = true;
      for (const Vector* w : kept)
        if (dist_n(v, *w) <= 2.0 * r) {
          separated = false;
          break;
        }
      if (separated) kept.push_back(&v);
    }
    PackingRow row;
    row.r = r;
    row.packing_2r = kept.size();
    row.log_packing = std::log(static_cast<double>(kept.size()));
    row.entropy = entropy_bound(r, c1, P);
    if (row.log_packing > row.entropy) result.all_within = false;
    result.rows.push_back(row);
  }
  return result;
}

inline PackingResult run_packing_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  // inputs only; responses are irrelevant here
  const ScaledNetwork probe_teacher =
      gen_teacher(cfg.arch, cfg.regularizer, 0.0, derive_seed(cfg.seed, 1));
  const Dataset data = gen_dataset(probe_teacher, cfg.activation, cfg.input_dist, cfg.noise,
                                   cfg.n_grid.front(), derive_seed(cfg.seed, 2, 0));
  std::vector<double> r_grid = cfg.r_grid;
  if (r_grid.empty())
    for (int k = 1; k <= 50; ++k) r_grid.push_back(0.01 * k);
  return packing_vs_entropy(cfg.arch, cfg.activation, cfg.regularizer, data,
                            cfg.packing_resolution, r_grid);
}

inline void write_packing_csv(std::ostream& os, const PackingResult& result) {
  csv_header(os, {"r", "packing_2r", "log_packing", "entropy_bound"});
  for (const auto& row : result.rows)
    os << csv_double(row.r) << ',' << row.packing_2r << ',' << csv_double(row.log_packing) << ','
       << csv_double(row.entropy) << '\n';
}

inline void write_noise_csv(std::ostream& os, const NoiseQuantileReport& report) {
  csv_header(os, {"rep", "z_value"});
  for (std::size_t r = 0; r < report.z_values.size(); ++r)
    os << r << ',' << csv_double(report.z_values[r]) << '\n';
  csv_header(os, {"t", "reps", "lambda_hat"});
  os << csv_double(report.t) << ',' << report.reps << ',' << csv_double(report.lambda_hat) << '\n';
}

inline void write_bounds_csv(std::ostream& os, const BoundReport& report) {
  csv_header(os, {"n", "P", "L", "a_lip", "x_norm_n", "a", "lambda", "c_lip1", "dudley"});
  os << report.n << ',' << report.P << ',' << report.L << ',' << csv_double(report.a_lip) << ','
     << csv_double(report.inputs_norm) << ',' << csv_double(report.constant_a) << ','
     << csv_double(report.lambda_theoretical) << ',' << csv_double(report.c_lip1) << ','
     << csv_double(report.dudley) << '\n';
}

}  // namespace scalereg
