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

// Pipeline stages shared by the command-line tool and the tests: PID data
// collection, model fitting and certification, SAC / LC-SAC training,
// deterministic evaluation and metrics export.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "lcsac/clf_dare.hpp"
#include "lcsac/config.hpp"
#include "lcsac/koopman_edmd.hpp"
#include "lcsac/nn.hpp"
#include "lcsac/planar_quad.hpp"

namespace lcsac::experiment {

/// Independent stream seed derived from a base seed, a stream id and an
/// index (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t index = 0);

/// Cascaded PD tracking law. Position and velocity errors give desired X/Z
/// accelerations, which fix the total thrust and a desired pitch; a pitch PD
/// loop sets the rotor thrust difference. Returns the normalized action
/// clipped to [-1, 1].
sim::ActionVector pid_control(const sim::QuadState& state,
                              const sim::ReferencePoint& ref,
                              const PidGains& gains,
                              const sim::QuadParams& params);

struct PidEpisode {
  double mean_position_error = 0.0;  // mean |(x, z) - (x_ref, z_ref)|
  int steps = 0;
  bool crashed = false;
};

/// One closed-loop PID episode with optional Gaussian action noise.
PidEpisode run_pid_episode(const sim::EnvConfig& env, const PidGains& gains,
                           std::uint64_t seed, double action_noise = 0.0);

/// Exactly config.edmd.dataset_size transitions (e, u, e') from noisy PID
/// episodes. Throws std::runtime_error when more than two episodes leave the
/// flight envelope.
koopman::EDMDDataset collect_dataset(const ExperimentConfig& config,
                                     std::uint64_t seed);

struct ModelFit {
  koopman::LiftedModel model;
  koopman::ValidationReport validation;
  std::size_t n_train = 0;
  std::size_t n_heldout = 0;
};

/// Block split, dictionary on the training part, regularized fit and
/// held-out validation. The model carries config.model_config_hash().
ModelFit fit_model(const koopman::EDMDDataset& dataset,
                   const ExperimentConfig& config);

/// DARE certificate with the configured weights and decay rate.
clf::CLFCertificate certify_model(const koopman::LiftedModel& model,
                                  const ExperimentConfig& config);

/// Throws std::runtime_error if the artifacts were not produced from this
/// configuration or do not belong together.
void check_artifacts(const ExperimentConfig& config,
                     const koopman::LiftedModel& model,
                     const clf::CLFCertificate& cert);

enum class Algo { kSac, kLcsac };
Algo parse_algo(const std::string& name);
std::string to_string(Algo algo);

// Per-timestep X-Z statistics over evaluation episodes. Episodes that ended
// early stop contributing; `count` is the number still running.
struct TrajectoryStats {
  std::vector<double> ref_x;
  std::vector<double> ref_z;
  std::vector<double> mean_x;
  std::vector<double> std_x;
  std::vector<double> mean_z;
  std::vector<double> std_z;
  std::vector<int> count;
};

struct EvalResult {
  std::vector<double> rewards;
  double mean_reward = 0.0;
  double std_reward = 0.0;  // population std
  TrajectoryStats trajectory;
};

/// Deterministic rollouts with the mean action tanh(mu(e)).
EvalResult evaluate(const nn::Mlp& actor, const ExperimentConfig& config,
                    int n_episodes, std::uint64_t seed);
EvalResult evaluate(const std::filesystem::path& checkpoint,
                    const ExperimentConfig& config, int n_episodes,
                    std::uint64_t seed);

/// Episode rewards of a uniformly random policy.
std::vector<double> random_policy_rewards(const ExperimentConfig& config,
                                          int n_episodes, std::uint64_t seed);

struct EpisodeRecord {
  long episode = 0;
  long env_step = 0;  // environment steps taken when the episode ended
  double reward = 0.0;
  int length = 0;
  bool crashed = false;
  double elapsed_s = 0.0;
};

struct EvalRecord {
  long env_step = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double elapsed_s = 0.0;
};

struct UpdateRecord {
  long update = 0;
  long env_step = 0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;
  double alpha_loss = 0.0;
  double lambda = 0.0;
  double mean_violation = 0.0;  // NaN when no model is monitored
  double cvar_violation = 0.0;
  double max_violation = 0.0;
};

// Append-only log of one training run. elapsed_s fields are seconds since
// started_at.
struct RunRecord {
  std::string algo;
  std::uint64_t seed = 0;
  std::string started_at;  // UTC, ISO 8601
  double wall_clock_s = 0.0;
  std::vector<EpisodeRecord> episodes;
  std::vector<EvalRecord> evals;
  std::vector<UpdateRecord> updates;
  TrajectoryStats trajectory;  // from the final evaluation
};

struct TrainOptions {
  Algo algo = Algo::kSac;
  std::uint64_t seed = 0;
  // Required for LC-SAC. With SAC they only enable violation monitoring.
  const koopman::LiftedModel* model = nullptr;
  const clf::CLFCertificate* cert = nullptr;
  // Checkpoints and the failure dump go here when set.
  std::optional<std::filesystem::path> out_dir;
  std::ostream* log = nullptr;
};

/// Online loop: act with the stochastic policy, store the transition, then
/// (after warmup) critic step, actor step, dual step, temperature step and
/// Polyak averaging. Evaluates every eval_interval steps and at the end.
/// A non-finite loss or gradient aborts with the agent state dumped to
/// out_dir/failed_state.
RunRecord train(const ExperimentConfig& config, const TrainOptions& options);

struct SeedSummary {
  double final_train_last10 = 0.0;
  double max_episode_reward = 0.0;
  double convergence_episode = 0.0;
  double final_eval = 0.0;
  double best_eval = 0.0;
};

struct AlgoSummary {
  std::string algo;
  std::vector<std::uint64_t> seeds;
  std::vector<SeedSummary> per_seed;
  SeedSummary mean;
  SeedSummary std;  // population std across seeds
  SeedSummary min;
  SeedSummary max;
};

/// Mean of the last min(10, n) values; NaN for an empty trace.
double trailing_mean(const std::vector<double>& rewards, std::size_t end,
                     std::size_t window = 10);

/// 1-based index of the first episode whose trailing-10 mean reaches
/// final - 0.1 |final| (90% of a positive final value). 0 if no episodes.
long convergence_episode(const std::vector<double>& rewards);

SeedSummary summarize_run(const RunRecord& record);
std::vector<AlgoSummary> summarize(const std::vector<RunRecord>& records);

/// Writes runs/<algo>_seed<N>/{episodes,evals,updates,trajectory}.csv and
/// record.json for every record plus summary.csv and summary.json.
/// Throws std::invalid_argument for an empty record list.
void export_metrics(const std::vector<RunRecord>& records,
                    const std::filesystem::path& out_dir);

/// Directory name used for a run under runs/.
std::string run_dir_name(const std::string& algo, std::uint64_t seed);
void save_run_record(const RunRecord& record, const std::filesystem::path& dir);
RunRecord load_run_record(const std::filesystem::path& dir);

nlohmann::json to_json(const koopman::ValidationReport& report);
nlohmann::json to_json(const clf::ContractionReport& report);

}  // namespace lcsac::experiment
