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
#include "lcsac/sac.hpp"

#include <stdexcept>

namespace lcsac::sac {

namespace {

Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

void polyak(nn::Mlp& target, const nn::Mlp& source, double tau) {
  auto dst = target.parameters();
  auto src = source.parameters();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i]->value = tau * src[i]->value + (1.0 - tau) * dst[i]->value;
  }
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity 0");
}

void ReplayBuffer::push(const sim::Transition& t) {
  if (data_.size() < capacity_) {
    data_.push_back(t);
    return;
  }
  data_[head_] = t;
  head_ = (head_ + 1) % capacity_;
}

const sim::Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("ReplayBuffer::at");
  return data_.size() < capacity_ ? data_[i] : data_[(head_ + i) % capacity_];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(
    std::size_t batch_size, std::mt19937_64& rng) const {
  if (batch_size == 0 || data_.size() < batch_size) {
    throw std::logic_error("ReplayBuffer: not enough transitions to sample a batch");
  }
  std::uniform_int_distribution<std::size_t> dist(0, data_.size() - 1);
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = dist(rng);
  return idx;
}

Batch make_batch(const ReplayBuffer& buffer,
                 const std::vector<std::size_t>& indices) {
  const auto n = static_cast<Eigen::Index>(indices.size());
  Batch b;
  b.obs.resize(sim::kStateDim, n);
  b.next_obs.resize(sim::kStateDim, n);
  b.actions.resize(sim::kActionDim, n);
  b.rewards.resize(n);
  b.done.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const sim::Transition& t = buffer.at(indices[static_cast<std::size_t>(k)]);
    b.obs.col(k) = sim::tracking_error(t.state, t.reference);
    b.next_obs.col(k) = sim::tracking_error(t.next_state, t.next_reference);
    b.actions.col(k) = t.action;
    b.rewards(k) = t.reward;
    b.done(k) = t.done ? 1.0 : 0.0;
  }
  return b;
}

Batch buffer_sample(const ReplayBuffer& buffer, std::size_t batch_size,
                    std::mt19937_64& rng) {
  return make_batch(buffer, buffer.sample_indices(batch_size, rng));
}

void SacConfig::validate() const {
  if (obs_dim <= 0 || action_dim <= 0) {
    throw std::invalid_argument("SacConfig: dimensions must be positive");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("SacConfig: gamma must lie in [0, 1]");
  }
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("SacConfig: tau must lie in (0, 1]");
  }
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0) || !(alpha_lr >= 0.0)) {
    throw std::invalid_argument("SacConfig: learning rates must be positive");
  }
  if (!(init_alpha > 0.0)) {
    throw std::invalid_argument("SacConfig: init_alpha must be positive");
  }
}

Agent Agent::create(const SacConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  nn::MLPSpec actor_spec{config.obs_dim, config.hidden, 2 * config.action_dim,
                         nn::OutputTransform::kTanhGaussianHead};
  nn::MLPSpec critic_spec{config.obs_dim + config.action_dim, config.hidden, 1,
                          nn::OutputTransform::kNone};
  nn::Mlp actor(actor_spec, rng, config.final_actor_scale);
  nn::Mlp q1(critic_spec, rng);
  nn::Mlp q2(critic_spec, rng);
  nn::Mlp q1_target = q1;
  nn::Mlp q2_target = q2;
  nn::ParamTensor log_alpha("log_alpha", 1, 1);
  log_alpha.value(0, 0) = std::log(config.init_alpha);
  return Agent{config,
               AgentParams{std::move(actor), std::move(q1), std::move(q2),
                           std::move(q1_target), std::move(q2_target),
                           std::move(log_alpha), config.target_entropy},
               {}, {}, {}, {}};
}

nn::SquashedGaussianBatch policy_sample(const Agent& agent, const Matrix& obs,
                                        const Matrix& noise) {
  return nn::squashed_gaussian(agent.params.actor.forward(obs), noise);
}

sim::ActionVector policy_mean_action(const nn::Mlp& actor,
                                     const sim::StateVector& obs) {
  const Matrix head = actor.forward(Matrix(obs));
  return nn::squashed_mean_action(head).col(0);
}

RowVector critic_targets(const Batch& batch, const Agent& agent, double gamma,
                         const Matrix& next_noise) {
  const AgentParams& p = agent.params;
  const nn::SquashedGaussianBatch next = policy_sample(agent, batch.next_obs, next_noise);
  const Matrix in = stack(batch.next_obs, next.action);
  const RowVector tq =
      p.q1_target.forward(in).row(0).cwiseMin(p.q2_target.forward(in).row(0));
  const RowVector soft = tq - p.alpha() * next.log_prob;
  RowVector y = batch.rewards.array() +
                gamma * (1.0 - batch.done.array()) * soft.array();
  if (!y.allFinite()) throw std::runtime_error("critic target is not finite");
  return y;
}

CriticStats critic_update(const Batch& batch, Agent& agent, double gamma,
                          std::mt19937_64& rng) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw std::invalid_argument("critic_update: empty batch");
  const Matrix noise = nn::standard_normal(agent.config.action_dim, n, rng);
  const RowVector y = critic_targets(batch, agent, gamma, noise);
  const Matrix in = stack(batch.obs, batch.actions);

  nn::AdamConfig adam;
  adam.lr = agent.config.critic_lr;
  auto fit = [&](nn::Mlp& q, nn::AdamState& opt) {
    nn::Tape tape;
    const RowVector diff = q.forward(in, &tape).row(0) - y;
    q.zero_grad();
    q.backward(tape, (1.0 / static_cast<double>(n)) * Matrix(diff));
    optimizer_step(q.parameters(), opt, adam);
    return 0.5 * diff.squaredNorm() / static_cast<double>(n);
  };
  CriticStats stats;
  stats.q1_loss = fit(agent.params.q1, agent.q1_opt);
  stats.q2_loss = fit(agent.params.q2, agent.q2_opt);
  stats.loss = 0.5 * (stats.q1_loss + stats.q2_loss);
  return stats;
}

ActorStats actor_step(const Batch& batch, Agent& agent, const Matrix& noise,
                      const ActionPenalty* penalty) {
  AgentParams& p = agent.params;
  const Eigen::Index n = batch.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double alpha = p.alpha();

  nn::Tape actor_tape;
  const Matrix head = p.actor.forward(batch.obs, &actor_tape);
  const nn::SquashedGaussianBatch sample = nn::squashed_gaussian(head, noise);

  const Matrix in = stack(batch.obs, sample.action);
  nn::Tape t1;
  nn::Tape t2;
  const RowVector q1 = p.q1.forward(in, &t1).row(0);
  const RowVector q2 = p.q2.forward(in, &t2).row(0);

  Matrix up1 = Matrix::Zero(1, n);
  Matrix up2 = Matrix::Zero(1, n);
  double sac_sum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    // Gradient of -min(Q1, Q2) goes to whichever critic is smaller.
    if (q1(k) <= q2(k)) {
      up1(0, k) = -inv_n;
      sac_sum += -q1(k);
    } else {
      up2(0, k) = -inv_n;
      sac_sum += -q2(k);
    }
    sac_sum += alpha * sample.log_prob(k);
  }
  const Matrix d_in = p.q1.input_gradient(t1, up1) + p.q2.input_gradient(t2, up2);
  Matrix d_action = d_in.bottomRows(agent.config.action_dim);

  ActorStats stats;
  stats.sac_loss = sac_sum * inv_n;
  if (penalty != nullptr) {
    stats.penalty = (*penalty)(sample.action, d_action);
  }
  stats.loss = stats.sac_loss + stats.penalty;
  if (!std::isfinite(stats.loss)) {
    throw std::runtime_error("actor loss is not finite");
  }

  const RowVector d_log_prob = RowVector::Constant(n, alpha * inv_n);
  const Matrix d_head = sample.backward(d_action, d_log_prob);
  p.actor.zero_grad();
  p.actor.backward(actor_tape, d_head);
  nn::AdamConfig adam;
  adam.lr = agent.config.actor_lr;
  optimizer_step(p.actor.parameters(), agent.actor_opt, adam);

  stats.log_probs = sample.log_prob;
  stats.actions = sample.action;
  return stats;
}

ActorStats actor_update_baseline(const Batch& batch, Agent& agent,
                                 std::mt19937_64& rng) {
  const Matrix noise = nn::standard_normal(agent.config.action_dim, batch.size(), rng);
  return actor_step(batch, agent, noise, nullptr);
}

double temperature_update(Agent& agent, const RowVector& log_probs) {
  AgentParams& p = agent.params;
  const double alpha = p.alpha();
  const double mean_term = (log_probs.array() + p.target_entropy).mean();
  // d/d(log alpha) of -alpha * mean_term
  p.log_alpha.grad(0, 0) = -alpha * mean_term;
  nn::AdamConfig adam;
  adam.lr = agent.config.alpha_lr;
  nn::ParamTensor* params[] = {&p.log_alpha};
  optimizer_step(params, agent.alpha_opt, adam);
  return -alpha * mean_term;
}

void polyak_update(Agent& agent, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("polyak_update: tau must lie in (0, 1]");
  }
  polyak(agent.params.q1_target, agent.params.q1, tau);
  polyak(agent.params.q2_target, agent.params.q2, tau);
}

}  // namespace lcsac::sac
