#pragma once

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "scalereg/experiments.hpp"

namespace scalereg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

}  // namespace detail

/// Parses an experiment config. Required keys: widths, seed, output.
/// Everything else falls back to documented defaults; unknown keys are
/// rejected so typos cannot silently change an experiment.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using nlohmann::json;
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  detail::reject_unknown_keys(
      j,
      {"widths", "activation", "activation_param", "regularizer", "kappa_star", "input_dist",
       "noise", "n_grid", "replicates", "level_t", "lambda_rule", "seed", "output", "fit",
       "noise_opt", "threads", "packing_resolution", "r_grid", "dudley_delta", "dudley_sigma"},
      "config");
  for (const char* key : {"widths", "seed", "output"})
    if (!j.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");

  try {
    ExperimentConfig cfg;
    cfg.arch = Architecture(j.at("widths").get<std::vector<std::size_t>>());
    const double act_param = j.value("activation_param", -1.0);
    cfg.activation = make_activation(j.value("activation", std::string("relu")), act_param);
    cfg.regularizer = parse_regularizer(j.value("regularizer", std::string("sum_l1")));
    cfg.kappa_star = j.value("kappa_star", 1.0);
    cfg.input_dist = parse_input_dist(j.value("input_dist", std::string("gaussian_sphere")));
    if (j.contains("noise")) {
      const json& jn = j.at("noise");
      detail::reject_unknown_keys(jn, {"kind", "param"}, "noise");
      cfg.noise = make_subgauss(parse_noise_kind(jn.value("kind", std::string("gaussian"))),
                                jn.value("param", 1.0));
    }
    if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    cfg.replicates = j.value("replicates", 1);
    cfg.level_t = j.value("level_t", 0.05);
    if (j.contains("lambda_rule")) {
      const json& jl = j.at("lambda_rule");
      detail::reject_unknown_keys(jl, {"rule", "a", "reps", "safety"}, "lambda_rule");
      const std::string rule = jl.value("rule", std::string("monte_carlo_quantile"));
      if (rule == "theoretical")
        cfg.lambda_rule.kind = LambdaRule::Kind::theoretical;
      else if (rule == "monte_carlo_quantile")
        cfg.lambda_rule.kind = LambdaRule::Kind::monte_carlo_quantile;
      else
        throw ConfigError("unknown lambda rule: " + rule);
      cfg.lambda_rule.a = jl.value("a", 1.0);
      cfg.lambda_rule.reps = jl.value("reps", 200);
      cfg.lambda_rule.safety = jl.value("safety", 1.2);
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.output = j.at("output").get<std::string>();
    if (j.contains("fit")) {
      const json& jf = j.at("fit");
      detail::reject_unknown_keys(jf,
                                  {"max_outer_iters", "max_inner_iters", "step_init", "backtrack",
                                   "objective_tol", "relative_tol", "restarts", "init_scale"},
                                  "fit");
      cfg.fit_opts.max_outer_iters = jf.value("max_outer_iters", cfg.fit_opts.max_outer_iters);
      cfg.fit_opts.max_inner_iters = jf.value("max_inner_iters", cfg.fit_opts.max_inner_iters);
      cfg.fit_opts.step_init = jf.value("step_init", cfg.fit_opts.step_init);
      cfg.fit_opts.backtrack = jf.value("backtrack", cfg.fit_opts.backtrack);
      cfg.fit_opts.objective_tol = jf.value("objective_tol", cfg.fit_opts.objective_tol);
      cfg.fit_opts.relative_tol = jf.value("relative_tol", cfg.fit_opts.relative_tol);
      cfg.fit_opts.restarts = jf.value("restarts", cfg.fit_opts.restarts);
      cfg.fit_opts.init_scale = jf.value("init_scale", cfg.fit_opts.init_scale);
    }
    if (j.contains("noise_opt")) {
      const json& jo = j.at("noise_opt");
      detail::reject_unknown_keys(
          jo, {"restarts", "max_iters", "step_init", "backtrack", "tol", "warm_start"}, "noise_opt");
      cfg.noise_opts.restarts = jo.value("restarts", cfg.noise_opts.restarts);
      cfg.noise_opts.max_iters = jo.value("max_iters", cfg.noise_opts.max_iters);
      cfg.noise_opts.step_init = jo.value("step_init", cfg.noise_opts.step_init);
      cfg.noise_opts.backtrack = jo.value("backtrack", cfg.noise_opts.backtrack);
      cfg.noise_opts.tol = jo.value("tol", cfg.noise_opts.tol);
      cfg.noise_opts.warm_start = jo.value("warm_start", cfg.noise_opts.warm_start);
    }
    cfg.threads = j.value("threads", 1);
    cfg.packing_resolution = j.value("packing_resolution", 0.01);
    if (j.contains("r_grid")) cfg.r_grid = j.at("r_grid").get<std::vector<double>>();
    cfg.dudley_delta = j.value("dudley_delta", 0.0);
    cfg.dudley_sigma = j.value("dudley_sigma", 0.0);
    cfg.validate();
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace scalereg
