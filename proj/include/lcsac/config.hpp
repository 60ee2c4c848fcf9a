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
#pragma once

// Experiment configuration: a sectioned key = value file.
//
//   [env]      trajectory, scale, period, center_z, episode_steps, dt,
//              w_p, w_u, c_alive, init_noise
//   [pid]      kp_x, kd_x, kp_z, kd_z, kp_theta, kd_theta, max_tilt
//   [edmd]     seed, dataset_size, action_noise, n_rbf, bandwidth,
//              tikhonov, train_fraction, block_size, horizon,
//              rmse_threshold
//   [dare]     state_weight, rbf_weight, control_weight, eta, tol,
//              max_iter, chi_reg
//   [agent]    lr, batch_size, gamma, buffer_size, tau, init_alpha,
//              hidden, warmup, updates_per_step, final_actor_scale
//   [lcsac]    zeta, beta_lambda, lambda_max, cvar_fraction
//   [run]      seeds, total_steps, eval_interval, eval_episodes
//
// Strings may be quoted; lists are written [a, b, c]. Unknown sections or
// keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcsac/lyapunov_constraint.hpp"
#include "lcsac/planar_quad.hpp"
#include "lcsac/sac.hpp"

namespace lcsac::experiment {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PidGains {
  double kp_x = 4.0;
  double kd_x = 3.0;
  double kp_z = 6.0;
  double kd_z = 4.0;
  double kp_theta = 225.0;
  double kd_theta = 24.0;
  double max_tilt = 0.6;
};

struct EdmdSettings {
  std::uint64_t seed = 0;
  int dataset_size = 17000;
  // Std of the Gaussian noise added to normalized PID actions (0.05 of the
  // [-1, 1] range).
  double action_noise = 0.1;
  int n_rbf = 2;
  std::optional<double> bandwidth;  // empty: median heuristic
  double tikhonov = 1e-5;
  double train_fraction = 0.9;
  int block_size = 50;
  int horizon = 10;
  double rmse_threshold = 0.05;
};

struct DareSettings {
  double state_weight = 10.0;
  double rbf_weight = 0.01;
  double control_weight = 0.1;
  double eta = 0.1;
  double tol = 1e-10;
  int max_iter = 10000;
  double chi_reg = 0.0;
};

struct AgentSettings {
  sac::SacConfig sac;
  int batch_size = 128;
  std::size_t buffer_size = 1'000'000;
  int warmup = 1000;
  int updates_per_step = 1;
};

struct RunSettings {
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  long total_steps = 100000;
  int eval_interval = 2000;
  int eval_episodes = 5;
};

struct ExperimentConfig {
  sim::EnvConfig env;
  PidGains pid;
  EdmdSettings edmd;
  DareSettings dare;
  AgentSettings agent;
  constraint::LagrangeState lcsac;
  RunSettings run;

  /// Throws ConfigError on any invalid value.
  void validate() const;

  /// Hash of the settings that determine the EDMD dataset and model (env
  /// without the reward weights, pid, edmd).
  std::string model_config_hash() const;
};

/// Parses config text. `overrides` are "section.key=value" strings applied
/// after the file.
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const ExperimentConfig& config);

}  // namespace lcsac::experiment
