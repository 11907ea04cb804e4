// Command-line front end: deterministic experiment drivers around the
// scale-regularized estimator. Subcommands read a JSON config and write CSV
// (see README for the schemas); the output path is printed on success.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "scalereg/bounds.hpp"
#include "scalereg/config.hpp"
#include "scalereg/effective_noise.hpp"
#include "scalereg/estimator.hpp"
#include "scalereg/experiments.hpp"
#include "scalereg/network_io.hpp"
#include "scalereg/plot.hpp"

namespace {

namespace fs = std::filesystem;
using namespace scalereg;

struct CliState {
  std::string config_path;
  std::string out_dir;
  int threads = 0;  // 0 = use config value
  bool plot = false;
};

fs::path resolve_output(const CliState& cli, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute()) return p;
  std::string dir = cli.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("SCALEREG_OUTPUT_DIR")) dir = env;
  }
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return fs::path(dir) / p;
}

ExperimentConfig load(const CliState& cli) {
  ExperimentConfig cfg = load_config(cli.config_path);
  if (cli.threads > 0) cfg.threads = cli.threads;
  return cfg;
}

template <typename F>
void write_file(const fs::path& path, F&& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  writer(out);
}

int cmd_fit(const CliState& cli) {
  ExperimentConfig cfg = load(cli);
  const ScaledNetwork teacher =
      gen_teacher(cfg.arch, cfg.regularizer, cfg.kappa_star, derive_seed(cfg.seed, 1));
  const Dataset data = gen_dataset(teacher, cfg.activation, cfg.input_dist, cfg.noise,
                                   cfg.n_grid.front(), derive_seed(cfg.seed, 2, 0));
  const double lambda = [&] {
    if (cfg.lambda_rule.kind == LambdaRule::Kind::theoretical)
      return tuning_lambda(data.size(), param_count(cfg.arch), cfg.arch.depth(),
                           cfg.activation.a_lip, input_norm_n(data), cfg.lambda_rule.a);
    NoiseOptimOptions opts = cfg.noise_opts;
    opts.threads = cfg.threads;
    return cfg.lambda_rule.safety *
           estimate_quantile(data, cfg.noise, cfg.activation, cfg.arch, cfg.regularizer,
                             cfg.level_t, cfg.lambda_rule.reps, opts, derive_seed(cfg.seed, 3, 0))
               .lambda_hat;
  }();

  FitOptions opts = cfg.fit_opts;
  opts.seed = derive_seed(cfg.seed, 5, 0, 0);
  opts.threads = cfg.threads;
  const FitResult result = fit(data, cfg.arch, cfg.activation, cfg.regularizer, lambda, opts);
  const double err = prediction_error(result.net, cfg.activation, data);

  const fs::path csv_path = resolve_output(cli, cfg.output);
  write_file(csv_path, [&](std::ostream& os) {
    csv_header(os, {"n", "lambda", "kappa", "objective", "iterations", "err"});
    os << data.size() << ',' << csv_double(lambda) << ',' << csv_double(result.net.kappa) << ','
       << csv_double(result.objective) << ',' << result.iterations << ',' << csv_double(err)
       << '\n';
  });
  fs::path net_path = csv_path;
  net_path.replace_extension(".net");
  write_file(net_path, [&](std::ostream& os) {
    save_scaled_network(os, result.net,
                        {{"lambda", lambda},
                         {"objective", result.objective},
                         {"iterations", static_cast<double>(result.iterations)}});
  });
  std::cout << "kappa " << result.net.kappa << " objective " << result.objective << " err " << err
            << "\n";
  std::cout << net_path.string() << "\n";
  std::cout << csv_path.string() << "\n";
  return 0;
}

int cmd_teacher(const CliState& cli) {
  ExperimentConfig cfg = load(cli);
  const ScaledNetwork teacher =
      gen_teacher(cfg.arch, cfg.regularizer, cfg.kappa_star, derive_seed(cfg.seed, 1));
  const fs::path path = resolve_output(cli, cfg.output);
  write_file(path, [&](std::ostream& os) { save_scaled_network(os, teacher); });
  std::cout << path.string() << "\n";
  return 0;
}

int cmd_noise_quantile(const CliState& cli) {
  ExperimentConfig cfg = load(cli);
  const ScaledNetwork teacher =
      gen_teacher(cfg.arch, cfg.regularizer, cfg.kappa_star, derive_seed(cfg.seed, 1));
  const Dataset data = gen_dataset(teacher, cfg.activation, cfg.input_dist, cfg.noise,
                                   cfg.n_grid.front(), derive_seed(cfg.seed, 2, 0));
  NoiseOptimOptions opts = cfg.noise_opts;
  opts.threads = cfg.threads;
  const NoiseQuantileReport report =
      estimate_quantile(data, cfg.noise, cfg.activation, cfg.arch, cfg.regularizer, cfg.level_t,
                        cfg.replicates, opts, derive_seed(cfg.seed, 3, 0));
  const fs::path path = resolve_output(cli, cfg.output);
  write_file(path, [&](std::ostream& os) { write_noise_csv(os, report); });
  std::cout << "lambda_hat " << report.lambda_hat << " (order-statistic 95% interval ["
            << report.z_lo << ", " << report.z_hi << "])\n";
  std::cout << path.string() << "\n";
  return 0;
}

int cmd_bounds(const CliState& cli) {
  ExperimentConfig cfg = load(cli);
  const ScaledNetwork teacher =
      gen_teacher(cfg.arch, cfg.regularizer, cfg.kappa_star, derive_seed(cfg.seed, 1));
  const Dataset data = gen_dataset(teacher, cfg.activation, cfg.input_dist, cfg.noise,
                                   cfg.n_grid.front(), derive_seed(cfg.seed, 2, 0));
  const double c1 = lipschitz_unit_ball(cfg.activation, cfg.arch.depth(), data);
  const double sigma = cfg.dudley_sigma > 0.0 ? cfg.dudley_sigma : std::sqrt(2.0) * cfg.noise.gamma;
  const double delta = cfg.dudley_delta > 0.0 ? cfg.dudley_delta : sigma * c1;
  std::vector<double> r_grid = cfg.r_grid;
  if (r_grid.empty())
    for (int k = 1; k <= 50; ++k) r_grid.push_back(0.01 * k);
  const BoundReport report =
      make_bound_report(cfg.activation, cfg.arch, data, cfg.lambda_rule.a, sigma, delta, r_grid);
  const fs::path path = resolve_output(cli, cfg.output);
  write_file(path, [&](std::ostream& os) { write_bounds_csv(os, report); });
  std::cout << "c_lip1 " << report.c_lip1 << " lambda " << report.lambda_theoretical << " dudley "
            << report.dudley << "\n";
  std::cout << path.string() << "\n";
  return 0;
}

int cmd_experiment_rate(const CliState& cli) {
  ExperimentConfig cfg = load(cli);
  const RateResult result = run_rate_experiment(cfg);
  const fs::path path = resolve_output(cli, cfg.output);
  write_file(path, [&](std::ostream& os) { write_rate_csv(os, result); });
  for (const auto& [n, med] : result.median_err)
    std::cout << "n " << n << " median err " << med << "\n";
  std::cout << "log-log slope " << result.slope << "\n";
  if (cli.plot) {
    fs::path svg = path;
    svg.replace_extension(".svg");
    write_file(svg, [&](std::ostream& os) { plot_rate_svg(os, result); });
    std::cout << svg.string() << "\n";
  }
  std::cout << path.string() << "\n";
  return 0;
}

int cmd_experiment_coverage(const CliState& cli) {
  ExperimentConfig cfg = load(cli);
  const CoverageResult result = run_coverage_experiment(cfg);
  const fs::path path = resolve_output(cli, cfg.output);
  write_file(path, [&](std::ostream& os) { write_coverage_csv(os, result); });
  std::cout << "lambda " << result.lambda << " coverage " << result.frequency << " (95% CI ["
            << result.ci_lo << ", " << result.ci_hi << "])\n";
  if (cli.plot) {
    fs::path svg = path;
    svg.replace_extension(".svg");
    write_file(svg, [&](std::ostream& os) { plot_coverage_svg(os, result); });
    std::cout << svg.string() << "\n";
  }
  std::cout << path.string() << "\n";
  return 0;
}

int cmd_experiment_packing(const CliState& cli) {
  ExperimentConfig cfg = load(cli);
  const PackingResult result = run_packing_experiment(cfg);
  const fs::path path = resolve_output(cli, cfg.output);
  write_file(path, [&](std::ostream& os) { write_packing_csv(os, result); });
  std::cout << "entropy bound " << (result.all_within ? "holds" : "VIOLATED")
            << " at every radius\n";
  std::cout << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scale-regularized neural network estimation and experiments"};
  app.require_subcommand(1);
  CliState cli;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", cli.config_path, "JSON config file")->required();
    cmd->add_option("--out-dir", cli.out_dir,
                    "output directory (overrides SCALEREG_OUTPUT_DIR; default .)");
    cmd->add_option("--threads", cli.threads, "worker threads (overrides config)");
    cmd->add_flag("--plot", cli.plot, "also write an SVG plot where supported");
  };

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit one synthetic dataset, write the network");
  CLI::App* teacher_cmd = app.add_subcommand("teacher", "generate and save a teacher network");
  CLI::App* noise_cmd =
      app.add_subcommand("noise-quantile", "Monte Carlo quantile of the effective noise");
  CLI::App* bounds_cmd = app.add_subcommand("bounds", "closed-form constants for a configuration");
  CLI::App* exp_cmd = app.add_subcommand("experiment", "statistical validation experiments");
  exp_cmd->require_subcommand(1);
  CLI::App* rate_cmd = exp_cmd->add_subcommand("rate", "error decay across sample sizes");
  CLI::App* cover_cmd = exp_cmd->add_subcommand("coverage", "oracle-inequality coverage");
  CLI::App* pack_cmd = exp_cmd->add_subcommand("packing", "packing vs entropy bound");
  for (CLI::App* cmd : {fit_cmd, teacher_cmd, noise_cmd, bounds_cmd, rate_cmd, cover_cmd, pack_cmd})
    add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::endl;
    return 1;
  }

  try {
    if (*fit_cmd) return cmd_fit(cli);
    if (*teacher_cmd) return cmd_teacher(cli);
    if (*noise_cmd) return cmd_noise_quantile(cli);
    if (*bounds_cmd) return cmd_bounds(cli);
    if (*rate_cmd) return cmd_experiment_rate(cli);
    if (*cover_cmd) return cmd_experiment_coverage(cli);
    if (*pack_cmd) return cmd_experiment_packing(cli);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return 2;
  }
  return 1;
}
