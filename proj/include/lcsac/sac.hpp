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

// Soft Actor-Critic: replay buffer, twin critics with clipped double-Q
// targets, tanh-Gaussian actor, learned temperature and Polyak targets.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "lcsac/nn.hpp"
#include "lcsac/planar_quad.hpp"

namespace lcsac::sac {

using nn::Matrix;
using nn::RowVector;

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1'000'000);

  /// FIFO eviction once full.
  void push(const sim::Transition& t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Oldest first.
  const sim::Transition& at(std::size_t i) const;

  /// Uniform sampling with replacement. Throws std::logic_error while the
  /// buffer holds fewer than batch_size transitions.
  std::vector<std::size_t> sample_indices(std::size_t batch_size,
                                          std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::vector<sim::Transition> data_;
  std::size_t head_ = 0;  // next slot to overwrite once full
};

/// Column-major training batch. Observations are tracking errors
/// e = x - x_ref.
struct Batch {
  Matrix obs;
  Matrix actions;
  RowVector rewards;
  Matrix next_obs;
  RowVector done;

  Eigen::Index size() const { return obs.cols(); }
};

Batch make_batch(const ReplayBuffer& buffer,
                 const std::vector<std::size_t>& indices);
Batch buffer_sample(const ReplayBuffer& buffer, std::size_t batch_size,
                    std::mt19937_64& rng);

struct SacConfig {
  int obs_dim = sim::kStateDim;
  int action_dim = sim::kActionDim;
  std::vector<int> hidden = {128, 128};
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double alpha_lr = 3e-4;
  double init_alpha = 0.2;
  double target_entropy = -2.0;  // -dim(action space)
  double final_actor_scale = 1e-2;

  void validate() const;
};

struct AgentParams {
  nn::Mlp actor;
  nn::Mlp q1;
  nn::Mlp q2;
  nn::Mlp q1_target;
  nn::Mlp q2_target;
  nn::ParamTensor log_alpha;
  double target_entropy = -2.0;

  double alpha() const { return std::exp(log_alpha.value(0, 0)); }
};

struct Agent {
  SacConfig config;
  AgentParams params;
  nn::AdamState actor_opt;
  nn::AdamState q1_opt;
  nn::AdamState q2_opt;
  nn::AdamState alpha_opt;

  /// Seeded initialization; targets start equal to the critics.
  static Agent create(const SacConfig& config, std::uint64_t seed);
};

/// Stochastic policy sample for a batch of observations with given noise.
nn::SquashedGaussianBatch policy_sample(const Agent& agent, const Matrix& obs,
                                        const Matrix& noise);
/// Deterministic action tanh(mean) for one observation.
sim::ActionVector policy_mean_action(const nn::Mlp& actor,
                                     const sim::StateVector& obs);

/// r + gamma (1 - d) (min_j Qbar_j(x', u') - alpha log pi(u'|x')) with
/// u' = policy sample at x' for the given noise. No gradients.
RowVector critic_targets(const Batch& batch, const Agent& agent, double gamma,
                         const Matrix& next_noise);

struct CriticStats {
  double loss = 0.0;  // mean of the two critic losses
  double q1_loss = 0.0;
  double q2_loss = 0.0;
};

/// One Adam step of both critics on 0.5 * mean((Q - y)^2) against a shared
/// target y. Draws the next-action noise from rng.
CriticStats critic_update(const Batch& batch, Agent& agent, double gamma,
                          std::mt19937_64& rng);

/// Extra actor loss term defined on the reparameterized actions. Returns its
/// value and adds its action gradient into d_actions.
using ActionPenalty =
    std::function<double(const Matrix& actions, Matrix& d_actions)>;

struct ActorStats {
  double loss = 0.0;      // total loss including any penalty
  double sac_loss = 0.0;  // mean of -min_j Q_j(x, u~) + alpha log pi(u~|x)
  double penalty = 0.0;
  RowVector log_probs;    // detached, for the temperature step
  Matrix actions;         // the u~ used in both terms
};

/// Actor step with explicit noise and an optional penalty. Critics are only
/// differentiated with respect to their inputs.
ActorStats actor_step(const Batch& batch, Agent& agent, const Matrix& noise,
                      const ActionPenalty* penalty = nullptr);

/// Baseline SAC actor update: noise from rng, no penalty.
ActorStats actor_update_baseline(const Batch& batch, Agent& agent,
                                 std::mt19937_64& rng);

/// J(alpha) = mean(-alpha (log pi + target_entropy)); one Adam step on
/// log alpha. Returns the loss value.
double temperature_update(Agent& agent, const RowVector& log_probs);

/// target <- tau * critic + (1 - tau) * target, tau in (0, 1].
void polyak_update(Agent& agent, double tau);

}  // namespace lcsac::sac
