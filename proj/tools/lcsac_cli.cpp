/*
 Copyright 2026 The lcsac Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
// lcsac: command-line driver for the Koopman/Lyapunov-constrained SAC
// pipeline. Every verb reads one config file and works inside one output
// directory:
//
//   collect     -> dataset.csv
//   fit-edmd    -> model.json, edmd_validation.json
//   solve-dare  -> certificate.json, p_spectrum.csv, contraction.json
//   train       -> runs/<algo>_seed<N>/
//   eval        -> runs/<algo>_seed<N>/eval.json, eval_trajectory.csv
//   report      -> summary.csv, summary.json
//
// Exit status: 0 success, 1 configuration or usage error, 2 runtime failure.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lcsac/clf_dare.hpp"
#include "lcsac/config.hpp"
#include "lcsac/experiment.hpp"
#include "lcsac/io.hpp"
#include "lcsac/koopman_edmd.hpp"

namespace fs = std::filesystem;
namespace ex = lcsac::experiment;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "config file")->required();
  cmd->add_option("-o,--out", c.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--set", c.overrides, "override a key: section.key=value");
}

ex::ExperimentConfig load(const Common& c) {
  auto config = ex::load_config(c.config_path, c.overrides);
  lcsac::io::write_text_file(fs::path(c.out_dir) / "config.resolved.toml",
                             ex::to_config_text(config));
  return config;
}

int cmd_collect(const Common& c) {
  const auto config = load(c);
  const auto data = ex::collect_dataset(config, config.edmd.seed);
  const auto path = fs::path(c.out_dir) / "dataset.csv";
  lcsac::koopman::save_dataset_csv(data, path);
  std::cout << "wrote " << data.size() << " transitions to " << path.string() << "\n";
  return 0;
}

int cmd_fit(const Common& c, const std::string& dataset_path) {
  const auto config = load(c);
  const fs::path out(c.out_dir);
  const auto data = lcsac::koopman::load_dataset_csv(
      dataset_path.empty() ? out / "dataset.csv" : fs::path(dataset_path));
  const auto fit = ex::fit_model(data, config);
  lcsac::koopman::save_model(fit.model, out / "model.json");
  auto report = ex::to_json(fit.validation);
  report["n_train"] = fit.n_train;
  report["n_heldout"] = fit.n_heldout;
  report["residual_norm"] = fit.model.fit_report.residual_norm;
  lcsac::io::write_json_file(out / "edmd_validation.json", report);

  std::cout << "lifted dimension " << fit.model.n_lift() << ", one-step RMSE";
  for (int i = 0; i < fit.validation.one_step_rmse.size(); ++i) {
    std::cout << ' ' << fit.validation.one_step_rmse(i);
  }
  std::cout << "\n";
  return 0;
}

int cmd_solve(const Common& c) {
  const auto config = load(c);
  const fs::path out(c.out_dir);
  const auto model = lcsac::koopman::load_model(out / "model.json");
  const auto cert = ex::certify_model(model, config);
  lcsac::clf::save_certificate(cert, out / "certificate.json");

  const auto spectrum = lcsac::clf::analyze_P(cert.P, config.dare.chi_reg);
  lcsac::io::write_text_file(out / "p_spectrum.csv", lcsac::clf::spectrum_csv(spectrum));
  lcsac::clf::ContractionOptions opts;
  opts.seed = config.edmd.seed;
  const auto contraction = lcsac::clf::verify_contraction(model, cert, opts);
  auto report = ex::to_json(contraction);
  report["eta"] = cert.eta;
  report["dare_residual"] = cert.dare_residual;
  report["closed_loop_spectral_radius"] = cert.closed_loop_spectral_radius;
  report["p_min_eigenvalue"] = spectrum.m1;
  report["p_max_eigenvalue"] = spectrum.m2;
  lcsac::io::write_json_file(out / "contraction.json", report);

  std::cout << "DARE converged in " << cert.iterations << " iterations, residual "
            << cert.dare_residual << ", closed-loop radius "
            << cert.closed_loop_spectral_radius << "\n"
            << "eta " << cert.eta << ", certified up to " << contraction.eta_star
            << " (exact " << contraction.eta_exact << "), contraction check "
            << (contraction.pass ? "passed" : "FAILED") << "\n";
  if (!contraction.pass) {
    std::cout << "warning: eta exceeds the certified decay rate; lower dare.eta\n";
  }
  return 0;
}

int cmd_train(const Common& c, const std::string& algo_name,
              const std::vector<std::uint64_t>& seed_args, bool quiet) {
  const auto config = load(c);
  const fs::path out(c.out_dir);
  const auto algo = ex::parse_algo(algo_name);

  std::optional<lcsac::koopman::LiftedModel> model;
  std::optional<lcsac::clf::CLFCertificate> cert;
  if (fs::exists(out / "model.json") && fs::exists(out / "certificate.json")) {
    model = lcsac::koopman::load_model(out / "model.json");
    cert = lcsac::clf::load_certificate(out / "certificate.json");
  } else if (algo == ex::Algo::kLcsac) {
    throw std::runtime_error("lcsac needs model.json and certificate.json in " +
                             out.string() + "; run fit-edmd and solve-dare first");
  }

  const auto seeds = seed_args.empty() ? config.run.seeds : seed_args;
  for (const auto seed : seeds) {
    const auto dir = out / "runs" / ex::run_dir_name(algo_name, seed);
    ex::TrainOptions opts;
    opts.algo = algo;
    opts.seed = seed;
    opts.model = model ? &*model : nullptr;
    opts.cert = cert ? &*cert : nullptr;
    opts.out_dir = dir;
    opts.log = quiet ? nullptr : &std::cout;
    fs::create_directories(dir);
    const auto record = ex::train(config, opts);
    ex::save_run_record(record, dir);
    std::cout << "finished " << dir.string() << " (" << record.episodes.size()
              << " episodes, " << record.wall_clock_s << " s)\n";
  }
  return 0;
}

int cmd_eval(const Common& c, std::string checkpoint, const std::string& algo,
             std::uint64_t seed, int episodes) {
  const auto config = load(c);
  const auto dir = fs::path(c.out_dir) / "runs" / ex::run_dir_name(algo, seed);
  if (checkpoint.empty()) checkpoint = (dir / "best_actor.json").string();
  const int n = episodes > 0 ? episodes : config.run.eval_episodes;
  const auto result = ex::evaluate(fs::path(checkpoint), config, n, seed);

  lcsac::io::write_json_file(dir / "eval.json", {{"checkpoint", checkpoint},
                                                 {"episodes", n},
                                                 {"seed", seed},
                                                 {"mean_reward", result.mean_reward},
                                                 {"std_reward", result.std_reward},
                                                 {"rewards", result.rewards}});
  std::string csv = "step,ref_x,ref_z,mean_x,std_x,mean_z,std_z,count\n";
  const auto& tr = result.trajectory;
  for (std::size_t t = 0; t < tr.count.size(); ++t) {
    csv += std::to_string(t);
    for (double v : {tr.ref_x[t], tr.ref_z[t], tr.mean_x[t], tr.std_x[t],
                     tr.mean_z[t], tr.std_z[t]}) {
      csv += ',' + lcsac::io::format_double(v);
    }
    csv += ',' + std::to_string(tr.count[t]) + '\n';
  }
  lcsac::io::write_text_file(dir / "eval_trajectory.csv", csv);
  std::cout << "mean reward " << result.mean_reward << " +- " << result.std_reward
            << " over " << n << " episodes\n";
  return 0;
}

int cmd_report(const Common& c) {
  load(c);
  const fs::path runs = fs::path(c.out_dir) / "runs";
  if (!fs::is_directory(runs)) {
    throw std::runtime_error("no runs found under " + runs.string());
  }
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(runs)) {
    if (fs::exists(entry.path() / "record.json")) dirs.push_back(entry.path());
  }
  if (dirs.empty()) throw std::runtime_error("no run records under " + runs.string());
  std::sort(dirs.begin(), dirs.end());

  std::vector<ex::RunRecord> records;
  for (const auto& d : dirs) records.push_back(ex::load_run_record(d));
  ex::export_metrics(records, c.out_dir);

  for (const auto& s : ex::summarize(records)) {
    std::cout << s.algo << " (" << s.seeds.size() << " seeds): final train "
              << s.mean.final_train_last10 << " +- " << s.std.final_train_last10
              << ", final eval " << s.mean.final_eval << " +- " << s.std.final_eval
              << ", best eval " << s.mean.best_eval << " +- " << s.std.best_eval
              << ", convergence episode " << s.mean.convergence_episode << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov-constrained SAC experiment driver"};
  app.require_subcommand(1);

  Common common;
  auto* collect = app.add_subcommand("collect", "collect the PID dataset");
  add_common(collect, common);

  std::string dataset_path;
  auto* fit = app.add_subcommand("fit-edmd", "fit the lifted linear model");
  add_common(fit, common);
  fit->add_option("--dataset", dataset_path, "dataset CSV (default <out>/dataset.csv)");

  auto* solve = app.add_subcommand("solve-dare", "solve the DARE and certify the model");
  add_common(solve, common);

  std::string algo = "lcsac";
  std::vector<std::uint64_t> seeds;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "train SAC or LC-SAC");
  add_common(train, common);
  train->add_option("--algo", algo, "sac or lcsac")
      ->check(CLI::IsMember({"sac", "lcsac"}))
      ->capture_default_str();
  train->add_option("--seed", seeds, "seed(s); default: run.seeds from the config");
  train->add_flag("-q,--quiet", quiet, "no progress lines");

  std::string checkpoint;
  std::uint64_t eval_seed = 0;
  int episodes = 0;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint deterministically");
  add_common(eval, common);
  eval->add_option("--algo", algo, "run to evaluate")
      ->check(CLI::IsMember({"sac", "lcsac"}))
      ->capture_default_str();
  eval->add_option("--seed", eval_seed, "run seed, also the evaluation seed");
  eval->add_option("--checkpoint", checkpoint,
                   "actor JSON (default: the run's best_actor.json)");
  eval->add_option("--episodes", episodes, "episodes (default run.eval_episodes)");

  auto* report = app.add_subcommand("report", "aggregate runs into summary tables");
  add_common(report, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*collect) return cmd_collect(common);
    if (*fit) return cmd_fit(common, dataset_path);
    if (*solve) return cmd_solve(common);
    if (*train) return cmd_train(common, algo, seeds, quiet);
    if (*eval) return cmd_eval(common, checkpoint, algo, eval_seed, episodes);
    if (*report) return cmd_report(common);
  } catch (const ex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
