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
#include "lcsac/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lcsac/io.hpp"
#include "lcsac/lyapunov_constraint.hpp"
#include "lcsac/sac.hpp"

namespace lcsac::experiment {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Stream : std::uint64_t {
  kCollectNoise = 1,
  kCollectEpisode,
  kAgentInit,
  kUpdates,
  kActions,
  kTrainEpisode,
  kTrainEval,
  kRandomActions,
  kEvalEpisode,
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) { return io::format_double(v); }

template <class... Ts>
std::string csv_row(const Ts&... cols) {
  std::ostringstream out;
  bool first = true;
  auto put = [&](const auto& c) {
    if (!first) out << ',';
    first = false;
    using T = std::decay_t<decltype(c)>;
    if constexpr (std::is_floating_point_v<T>) {
      out << fmt(c);
    } else {
      out << c;
    }
  };
  (put(cols), ...);
  out << '\n';
  return out.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::string& header) {
  std::istringstream in(io::read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  const std::size_t width = io::split_csv_line(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cols = io::split_csv_line(line);
    if (cols.size() != width) {
      throw std::runtime_error(path.string() + ": wrong column count");
    }
    rows.push_back(std::move(cols));
  }
  return rows;
}

long to_long(const std::string& s) { return std::stol(s); }

// Population mean and std.
std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {kNaN, kNaN};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {mean, std::sqrt(var)};
}

Eigen::MatrixXd column(const sim::StateVector& v) { return Eigen::MatrixXd(v); }

struct Welford {
  std::vector<double> mean, m2;
  std::vector<int> n;
  void add(std::size_t t, double x) {
    if (t >= n.size()) {
      n.resize(t + 1, 0);
      mean.resize(t + 1, 0.0);
      m2.resize(t + 1, 0.0);
    }
    ++n[t];
    const double d = x - mean[t];
    mean[t] += d / n[t];
    m2[t] += d * (x - mean[t]);
  }
  std::vector<double> stddev() const {
    std::vector<double> out(n.size());
    for (std::size_t t = 0; t < n.size(); ++t) out[t] = std::sqrt(m2[t] / n[t]);
    return out;
  }
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                          std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ stream) ^ index);
}

sim::ActionVector pid_control(const sim::QuadState& state,
                              const sim::ReferencePoint& ref,
                              const PidGains& gains,
                              const sim::QuadParams& params) {
  const double g = params.gravity;
  const double ax = -gains.kp_x * (state.x - ref.x) - gains.kd_x * (state.x_dot - ref.x_dot);
  const double az = -gains.kp_z * (state.z - ref.z) - gains.kd_z * (state.z_dot - ref.z_dot);

  const double theta_des =
      std::clamp(std::atan2(ax, g + az), -gains.max_tilt, gains.max_tilt);
  const double total =
      std::max(params.mass * (g + az) / std::max(std::cos(state.theta), 0.5), 0.0);
  const double torque = params.inertia_yy * (gains.kp_theta * (theta_des - state.theta) -
                                             gains.kd_theta * state.theta_dot);
  const double diff = torque / params.arm_length;  // T2 - T1

  const Eigen::Vector2d thrust(0.5 * (total - diff), 0.5 * (total + diff));
  return sim::thrust_to_action(thrust, params).cwiseMax(-1.0).cwiseMin(1.0);
}

PidEpisode run_pid_episode(const sim::EnvConfig& env_config, const PidGains& gains,
                           std::uint64_t seed, double action_noise) {
  sim::PlanarQuadEnv env(env_config);
  env.reset(derive_seed(seed, kCollectEpisode));
  std::mt19937_64 rng(derive_seed(seed, kCollectNoise));
  std::normal_distribution<double> normal(0.0, 1.0);

  PidEpisode out;
  double err_sum = 0.0;
  for (;;) {
    sim::ActionVector u =
        pid_control(env.state(), env.current_reference(), gains, env_config.params);
    if (action_noise > 0.0) {
      u += action_noise * sim::ActionVector(normal(rng), normal(rng));
      u = u.cwiseMax(-1.0).cwiseMin(1.0);
    }
    const auto res = env.step(u);
    const auto& tr = res.transition;
    err_sum += std::hypot(tr.next_state.x - tr.next_reference.x,
                          tr.next_state.z - tr.next_reference.z);
    ++out.steps;
    if (res.terminal) {
      out.crashed = tr.done;
      break;
    }
  }
  out.mean_position_error = err_sum / out.steps;
  return out;
}

koopman::EDMDDataset collect_dataset(const ExperimentConfig& config,
                                     std::uint64_t seed) {
  config.validate();
  const auto& params = config.env.params;
  const auto n = static_cast<std::size_t>(config.edmd.dataset_size);
  sim::PlanarQuadEnv env(config.env);
  std::mt19937_64 rng(derive_seed(seed, kCollectNoise));
  std::normal_distribution<double> normal(0.0, 1.0);

  koopman::EDMDDataset data;
  data.samples.reserve(n);
  int crashes = 0;
  for (std::uint64_t episode = 0; data.size() < n; ++episode) {
    env.reset(derive_seed(seed, kCollectEpisode, episode));
    for (;;) {
      sim::ActionVector u =
          pid_control(env.state(), env.current_reference(), config.pid, params);
      if (config.edmd.action_noise > 0.0) {
        u += config.edmd.action_noise * sim::ActionVector(normal(rng), normal(rng));
      }
      u = u.cwiseMax(-1.0).cwiseMin(1.0);
      const auto res = env.step(u);
      const auto& tr = res.transition;
      data.samples.push_back({sim::tracking_error(tr.state, tr.reference), u,
                              sim::tracking_error(tr.next_state, tr.next_reference)});
      if (data.size() == n) break;
      if (res.terminal) {
        if (tr.done && ++crashes > 2) {
          throw std::runtime_error(
              "PID data collection left the flight envelope in " +
              std::to_string(crashes) +
              " episodes; retune the [pid] gains or lower edmd.action_noise");
        }
        break;
      }
    }
  }
  return data;
}

ModelFit fit_model(const koopman::EDMDDataset& dataset,
                   const ExperimentConfig& config) {
  config.validate();
  const auto& s = config.edmd;
  auto [train, heldout] = koopman::split_dataset(
      dataset, s.train_fraction, s.seed, static_cast<std::size_t>(s.block_size));
  const auto dict = koopman::build_dictionary(train, s.n_rbf, s.bandwidth, s.seed);
  ModelFit fit;
  fit.model = koopman::fit_edmd(train, dict, s.tikhonov);
  fit.model.config_hash = config.model_config_hash();
  fit.validation = koopman::validate_model(fit.model, heldout, s.horizon);
  fit.n_train = train.size();
  fit.n_heldout = heldout.size();
  return fit;
}

clf::CLFCertificate certify_model(const koopman::LiftedModel& model,
                                  const ExperimentConfig& config) {
  const auto& d = config.dare;
  const auto Q = clf::default_state_weight(model.n_lift(), model.dictionary.n_state,
                                           d.state_weight, d.rbf_weight);
  const auto R = clf::default_control_weight(model.n_input(), d.control_weight);
  return clf::certify(model, Q, R, d.eta, {d.tol, d.max_iter});
}

void check_artifacts(const ExperimentConfig& config,
                     const koopman::LiftedModel& model,
                     const clf::CLFCertificate& cert) {
  if (model.config_hash != config.model_config_hash()) {
    throw std::runtime_error(
        "model was fitted under a different configuration (hash " +
        model.config_hash + ", expected " + config.model_config_hash() +
        "); rerun collect and fit-edmd");
  }
  if (cert.model_hash != koopman::model_hash(model)) {
    throw std::runtime_error(
        "certificate does not belong to this model; rerun solve-dare");
  }
  constraint::check_compatible(model, cert);
}

Algo parse_algo(const std::string& name) {
  if (name == "sac") return Algo::kSac;
  if (name == "lcsac") return Algo::kLcsac;
  throw std::invalid_argument("unknown algorithm '" + name + "' (sac or lcsac)");
}

std::string to_string(Algo algo) { return algo == Algo::kSac ? "sac" : "lcsac"; }

EvalResult evaluate(const nn::Mlp& actor, const ExperimentConfig& config,
                    int n_episodes, std::uint64_t seed) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes must be >= 1");
  sim::PlanarQuadEnv env(config.env);
  EvalResult out;
  Welford xs, zs;
  for (int ep = 0; ep < n_episodes; ++ep) {
    env.reset(derive_seed(seed, kEvalEpisode, static_cast<std::uint64_t>(ep)));
    xs.add(0, env.state().x);
    zs.add(0, env.state().z);
    double total = 0.0;
    for (std::size_t t = 1;; ++t) {
      const auto res = env.step(sac::policy_mean_action(actor, env.observation()));
      total += res.transition.reward;
      xs.add(t, res.transition.next_state.x);
      zs.add(t, res.transition.next_state.z);
      if (res.terminal) break;
    }
    out.rewards.push_back(total);
  }
  std::tie(out.mean_reward, out.std_reward) = mean_std(out.rewards);

  auto& tr = out.trajectory;
  tr.mean_x = xs.mean;
  tr.std_x = xs.stddev();
  tr.mean_z = zs.mean;
  tr.std_z = zs.stddev();
  tr.count = xs.n;
  for (std::size_t t = 0; t < tr.count.size(); ++t) {
    const auto ref = sim::reference(config.env.trajectory,
                                    static_cast<double>(t) * config.env.params.dt);
    tr.ref_x.push_back(ref.x);
    tr.ref_z.push_back(ref.z);
  }
  return out;
}

EvalResult evaluate(const std::filesystem::path& checkpoint,
                    const ExperimentConfig& config, int n_episodes,
                    std::uint64_t seed) {
  return evaluate(nn::load_mlp(checkpoint), config, n_episodes, seed);
}

std::vector<double> random_policy_rewards(const ExperimentConfig& config,
                                          int n_episodes, std::uint64_t seed) {
  sim::PlanarQuadEnv env(config.env);
  std::mt19937_64 rng(derive_seed(seed, kRandomActions));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<double> rewards;
  for (int ep = 0; ep < n_episodes; ++ep) {
    env.reset(derive_seed(seed, kEvalEpisode, static_cast<std::uint64_t>(ep)));
    double total = 0.0;
    for (;;) {
      const double a0 = uniform(rng);
      const double a1 = uniform(rng);
      const auto res = env.step(sim::ActionVector(a0, a1));
      total += res.transition.reward;
      if (res.terminal) break;
    }
    rewards.push_back(total);
  }
  return rewards;
}

namespace {

void dump_failed_state(const std::filesystem::path& dir, const sac::Agent& agent,
                       const constraint::LagrangeState& lagrange, long env_step,
                       long update, const std::string& what) {
  std::filesystem::create_directories(dir);
  nn::save_mlp(agent.params.actor, dir / "actor.json");
  nn::save_mlp(agent.params.q1, dir / "q1.json");
  nn::save_mlp(agent.params.q2, dir / "q2.json");
  nn::save_mlp(agent.params.q1_target, dir / "q1_target.json");
  nn::save_mlp(agent.params.q2_target, dir / "q2_target.json");
  io::write_json_file(dir / "state.json",
                      {{"env_step", env_step},
                       {"update", update},
                       {"log_alpha", agent.params.log_alpha.value(0, 0)},
                       {"lambda", lagrange.lambda},
                       {"error", what}});
}

}  // namespace

RunRecord train(const ExperimentConfig& config, const TrainOptions& options) {
  config.validate();
  const bool constrained = options.algo == Algo::kLcsac;
  if (constrained) {
    if (!options.model || !options.cert) {
      throw std::invalid_argument("lcsac training needs a model and a certificate");
    }
    check_artifacts(config, *options.model, *options.cert);
  } else if (options.model && options.cert) {
    constraint::check_compatible(*options.model, *options.cert);
  }
  const bool monitor = options.model && options.cert;

  RunRecord record;
  record.algo = to_string(options.algo);
  record.seed = options.seed;
  record.started_at = utc_now();
  const auto start = Clock::now();

  const auto& ac = config.agent;
  const std::uint64_t seed = options.seed;
  sac::Agent agent = sac::Agent::create(ac.sac, derive_seed(seed, kAgentInit));
  sac::ReplayBuffer buffer(ac.buffer_size);
  std::mt19937_64 update_rng(derive_seed(seed, kUpdates));
  std::mt19937_64 action_rng(derive_seed(seed, kActions));
  constraint::LagrangeState lagrange = config.lcsac;
  const auto batch_size = static_cast<std::size_t>(ac.batch_size);

  sim::PlanarQuadEnv env(config.env);
  long episode = 0;
  env.reset(derive_seed(seed, kTrainEpisode, 0));
  double episode_reward = 0.0;
  int episode_length = 0;
  double best_eval = -std::numeric_limits<double>::infinity();
  long update = 0;

  auto log = [&](const std::string& line) {
    if (options.log) *options.log << '[' << record.algo << " seed " << seed << "] " << line << std::endl;
  };

  auto update_round = [&](long env_step) {
    UpdateRecord u;
    u.update = update;
    u.env_step = env_step;
    const auto batch = sac::buffer_sample(buffer, batch_size, update_rng);
    const auto critic = sac::critic_update(batch, agent, ac.sac.gamma, update_rng);

    sac::ActorStats actor;
    std::optional<constraint::ViolationBatch> viol;
    if (constrained) {
      auto stats = constraint::actor_update_constrained(
          batch, agent, *options.model, *options.cert, lagrange, update_rng);
      actor = std::move(stats.actor);
      viol = std::move(stats.violations);
      lagrange = constraint::dual_update(lagrange, viol->mean);
    } else {
      actor = sac::actor_update_baseline(batch, agent, update_rng);
      if (monitor) {
        viol = constraint::lyapunov_penalty(batch.obs, batch.done, *options.model,
                                            *options.cert, actor.actions, lagrange);
      }
    }
    u.alpha_loss = sac::temperature_update(agent, actor.log_probs);
    sac::polyak_update(agent, ac.sac.tau);

    u.critic_loss = critic.loss;
    u.actor_loss = actor.loss;
    u.alpha = agent.params.alpha();
    u.entropy = -actor.log_probs.mean();
    u.lambda = lagrange.lambda;
    u.mean_violation = viol ? viol->mean : kNaN;
    u.cvar_violation = viol ? viol->aggregate : kNaN;
    u.max_violation = viol ? viol->max : kNaN;
    if (!std::isfinite(u.critic_loss) || !std::isfinite(u.actor_loss) ||
        !std::isfinite(u.alpha_loss) || !std::isfinite(u.alpha)) {
      throw std::runtime_error("non-finite loss at update " + std::to_string(update));
    }
    record.updates.push_back(u);
    ++update;
  };

  auto run_eval = [&](long env_step) {
    auto result = evaluate(agent.params.actor, config, config.run.eval_episodes,
                           derive_seed(seed, kTrainEval));
    record.evals.push_back(
        {env_step, result.mean_reward, result.std_reward, seconds_since(start)});
    record.trajectory = std::move(result.trajectory);
    if (options.out_dir && result.mean_reward > best_eval) {
      nn::save_mlp(agent.params.actor, *options.out_dir / "best_actor.json");
    }
    best_eval = std::max(best_eval, result.mean_reward);
    std::ostringstream msg;
    msg << "step " << env_step << " eval " << result.mean_reward << " +- "
        << result.std_reward << " episodes " << episode << " lambda "
        << lagrange.lambda << " alpha " << agent.params.alpha();
    log(msg.str());
  };

  for (long t = 1; t <= config.run.total_steps; ++t) {
    const nn::Matrix noise = nn::standard_normal(ac.sac.action_dim, 1, action_rng);
    const auto sample = sac::policy_sample(agent, column(env.observation()), noise);
    const sim::ActionVector action = sample.action.col(0);
    const auto res = env.step(action);
    buffer.push(res.transition);
    episode_reward += res.transition.reward;
    ++episode_length;
    if (res.terminal) {
      record.episodes.push_back({episode, t, episode_reward, episode_length,
                                 res.transition.done, seconds_since(start)});
      ++episode;
      env.reset(derive_seed(seed, kTrainEpisode, static_cast<std::uint64_t>(episode)));
      episode_reward = 0.0;
      episode_length = 0;
    }

    if (t > ac.warmup && buffer.size() >= batch_size) {
      for (int k = 0; k < ac.updates_per_step; ++k) {
        try {
          update_round(t);
        } catch (const std::exception& e) {
          std::string where;
          if (options.out_dir) {
            const auto dir = *options.out_dir / "failed_state";
            dump_failed_state(dir, agent, lagrange, t, update, e.what());
            where = "; state saved to " + dir.string();
          }
          throw std::runtime_error(std::string("training diverged: ") + e.what() + where);
        }
      }
    }

    if (t % config.run.eval_interval == 0 || t == config.run.total_steps) run_eval(t);
  }

  if (options.out_dir && config.run.total_steps > 0) {
    nn::save_mlp(agent.params.actor, *options.out_dir / "actor.json");
  }
  record.wall_clock_s = seconds_since(start);
  return record;
}

double trailing_mean(const std::vector<double>& rewards, std::size_t end,
                     std::size_t window) {
  end = std::min(end, rewards.size());
  if (end == 0 || window == 0) return kNaN;
  const std::size_t begin = end > window ? end - window : 0;
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += rewards[i];
  return sum / static_cast<double>(end - begin);
}

long convergence_episode(const std::vector<double>& rewards) {
  if (rewards.empty()) return 0;
  const double final = trailing_mean(rewards, rewards.size());
  const double threshold = final - 0.1 * std::abs(final);
  for (std::size_t i = 1; i <= rewards.size(); ++i) {
    if (trailing_mean(rewards, i) >= threshold) return static_cast<long>(i);
  }
  return static_cast<long>(rewards.size());
}

SeedSummary summarize_run(const RunRecord& record) {
  std::vector<double> rewards;
  for (const auto& e : record.episodes) rewards.push_back(e.reward);
  SeedSummary s;
  s.final_train_last10 = trailing_mean(rewards, rewards.size());
  s.max_episode_reward =
      rewards.empty() ? kNaN : *std::max_element(rewards.begin(), rewards.end());
  s.convergence_episode = static_cast<double>(convergence_episode(rewards));
  s.final_eval = record.evals.empty() ? kNaN : record.evals.back().mean_reward;
  s.best_eval = kNaN;
  for (const auto& e : record.evals) {
    if (std::isnan(s.best_eval) || e.mean_reward > s.best_eval) s.best_eval = e.mean_reward;
  }
  return s;
}

namespace {

using MetricField = double SeedSummary::*;
const std::vector<std::pair<std::string, MetricField>>& metric_fields() {
  static const std::vector<std::pair<std::string, MetricField>> fields = {
      {"final_train_last10", &SeedSummary::final_train_last10},
      {"max_episode_reward", &SeedSummary::max_episode_reward},
      {"convergence_episode", &SeedSummary::convergence_episode},
      {"final_eval", &SeedSummary::final_eval},
      {"best_eval", &SeedSummary::best_eval},
  };
  return fields;
}

}  // namespace

std::vector<AlgoSummary> summarize(const std::vector<RunRecord>& records) {
  std::vector<AlgoSummary> out;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const AlgoSummary& a) { return a.algo == r.algo; });
    if (it == out.end()) {
      out.push_back({});
      out.back().algo = r.algo;
      it = std::prev(out.end());
    }
    it->seeds.push_back(r.seed);
    it->per_seed.push_back(summarize_run(r));
  }
  for (auto& a : out) {
    for (const auto& [name, field] : metric_fields()) {
      std::vector<double> xs;
      for (const auto& s : a.per_seed) xs.push_back(s.*field);
      std::tie(a.mean.*field, a.std.*field) = mean_std(xs);
      a.min.*field = *std::min_element(xs.begin(), xs.end());
      a.max.*field = *std::max_element(xs.begin(), xs.end());
    }
  }
  return out;
}

std::string run_dir_name(const std::string& algo, std::uint64_t seed) {
  return algo + "_seed" + std::to_string(seed);
}

namespace {

const std::string kEpisodeHeader = "episode,env_step,reward,length,crashed,elapsed_s";
const std::string kEvalHeader = "env_step,mean_reward,std_reward,elapsed_s";
const std::string kUpdateHeader =
    "update,env_step,critic_loss,actor_loss,alpha,entropy,alpha_loss,lambda,"
    "mean_violation,cvar_violation,max_violation";
const std::string kTrajectoryHeader = "step,ref_x,ref_z,mean_x,std_x,mean_z,std_z,count";

}  // namespace

void save_run_record(const RunRecord& record, const std::filesystem::path& dir) {
  std::string text = kEpisodeHeader + "\n";
  for (const auto& e : record.episodes) {
    text += csv_row(e.episode, e.env_step, e.reward, e.length, int{e.crashed}, e.elapsed_s);
  }
  io::write_text_file(dir / "episodes.csv", text);

  text = kEvalHeader + "\n";
  for (const auto& e : record.evals) {
    text += csv_row(e.env_step, e.mean_reward, e.std_reward, e.elapsed_s);
  }
  io::write_text_file(dir / "evals.csv", text);

  text = kUpdateHeader + "\n";
  for (const auto& u : record.updates) {
    text += csv_row(u.update, u.env_step, u.critic_loss, u.actor_loss, u.alpha,
                    u.entropy, u.alpha_loss, u.lambda, u.mean_violation,
                    u.cvar_violation, u.max_violation);
  }
  io::write_text_file(dir / "updates.csv", text);

  const auto& tr = record.trajectory;
  text = kTrajectoryHeader + "\n";
  for (std::size_t t = 0; t < tr.count.size(); ++t) {
    text += csv_row(t, tr.ref_x[t], tr.ref_z[t], tr.mean_x[t], tr.std_x[t],
                    tr.mean_z[t], tr.std_z[t], tr.count[t]);
  }
  io::write_text_file(dir / "trajectory.csv", text);

  io::write_json_file(dir / "record.json",
                      {{"algo", record.algo},
                       {"seed", record.seed},
                       {"started_at", record.started_at},
                       {"wall_clock_s", fmt(record.wall_clock_s)}});
}

RunRecord load_run_record(const std::filesystem::path& dir) {
  RunRecord r;
  const auto meta = io::read_json_file(dir / "record.json");
  r.algo = meta.at("algo").get<std::string>();
  r.seed = meta.at("seed").get<std::uint64_t>();
  r.started_at = meta.at("started_at").get<std::string>();
  r.wall_clock_s = io::parse_double(meta.at("wall_clock_s").get<std::string>());

  for (const auto& c : read_csv(dir / "episodes.csv", kEpisodeHeader)) {
    r.episodes.push_back({to_long(c[0]), to_long(c[1]), io::parse_double(c[2]),
                          static_cast<int>(to_long(c[3])), c[4] == "1",
                          io::parse_double(c[5])});
  }
  for (const auto& c : read_csv(dir / "evals.csv", kEvalHeader)) {
    r.evals.push_back({to_long(c[0]), io::parse_double(c[1]), io::parse_double(c[2]),
                       io::parse_double(c[3])});
  }
  for (const auto& c : read_csv(dir / "updates.csv", kUpdateHeader)) {
    UpdateRecord u;
    u.update = to_long(c[0]);
    u.env_step = to_long(c[1]);
    double* fields[] = {&u.critic_loss, &u.actor_loss, &u.alpha,
                        &u.entropy, &u.alpha_loss, &u.lambda,
                        &u.mean_violation, &u.cvar_violation, &u.max_violation};
    for (std::size_t i = 0; i < std::size(fields); ++i) *fields[i] = io::parse_double(c[i + 2]);
    r.updates.push_back(u);
  }
  auto& tr = r.trajectory;
  for (const auto& c : read_csv(dir / "trajectory.csv", kTrajectoryHeader)) {
    tr.ref_x.push_back(io::parse_double(c[1]));
    tr.ref_z.push_back(io::parse_double(c[2]));
    tr.mean_x.push_back(io::parse_double(c[3]));
    tr.std_x.push_back(io::parse_double(c[4]));
    tr.mean_z.push_back(io::parse_double(c[5]));
    tr.std_z.push_back(io::parse_double(c[6]));
    tr.count.push_back(static_cast<int>(to_long(c[7])));
  }
  return r;
}

void export_metrics(const std::vector<RunRecord>& records,
                    const std::filesystem::path& out_dir) {
  if (records.empty()) throw std::invalid_argument("export_metrics: no records");
  for (const auto& r : records) {
    save_run_record(r, out_dir / "runs" / run_dir_name(r.algo, r.seed));
  }

  const auto summaries = summarize(records);
  std::string csv = "algo,metric,n_seeds,mean,std,min,max\n";
  nlohmann::json algos = nlohmann::json::array();
  for (const auto& a : summaries) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [name, field] : metric_fields()) {
      csv += csv_row(a.algo, name, a.seeds.size(), a.mean.*field, a.std.*field,
                     a.min.*field, a.max.*field);
      std::vector<double> per_seed;
      for (const auto& s : a.per_seed) per_seed.push_back(s.*field);
      metrics[name] = {{"mean", a.mean.*field},
                       {"std", a.std.*field},
                       {"min", a.min.*field},
                       {"max", a.max.*field},
                       {"per_seed", per_seed}};
    }
    algos.push_back({{"algo", a.algo}, {"seeds", a.seeds}, {"metrics", metrics}});
  }
  io::write_text_file(out_dir / "summary.csv", csv);
  io::write_json_file(out_dir / "summary.json", {{"algorithms", algos}});
}

nlohmann::json to_json(const koopman::ValidationReport& report) {
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  return {{"channels", {"x", "x_dot", "z", "z_dot", "theta", "theta_dot"}},
          {"one_step_rmse", vec(report.one_step_rmse)},
          {"multi_step_rmse", vec(report.multi_step_rmse)},
          {"horizon", report.horizon},
          {"n_samples", report.n_samples},
          {"n_windows", report.n_windows}};
}

nlohmann::json to_json(const clf::ContractionReport& report) {
  return {{"eta_star", report.eta_star},
          {"eta_exact", report.eta_exact},
          {"worst_s", report.worst_s},
          {"worst_rollout_ratio", report.worst_rollout_ratio},
          {"worst_norm_ratio", report.worst_norm_ratio},
          {"pass", report.pass}};
}

}  // namespace lcsac::experiment
