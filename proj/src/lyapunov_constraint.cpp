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
#include "lcsac/lyapunov_constraint.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lcsac::constraint {

void LagrangeState::validate() const {
  if (!(zeta > 0.0)) throw std::invalid_argument("LagrangeState: zeta must be > 0");
  if (!(beta_lambda >= 0.0)) {
    throw std::invalid_argument("LagrangeState: beta_lambda must be >= 0");
  }
  if (!(lambda_max >= 0.0)) {
    throw std::invalid_argument("LagrangeState: lambda_max must be >= 0");
  }
  if (!(lambda >= 0.0 && lambda <= lambda_max)) {
    throw std::invalid_argument("LagrangeState: lambda outside [0, lambda_max]");
  }
  if (!(cvar_fraction > 0.0 && cvar_fraction <= 1.0)) {
    throw std::invalid_argument("LagrangeState: cvar_fraction must lie in (0, 1]");
  }
}

Eigen::Index cvar_count(double fraction, Eigen::Index n) {
  if (n <= 0) return 0;
  const auto k = static_cast<Eigen::Index>(
      std::ceil(fraction * static_cast<double>(n) - 1e-12));
  return std::clamp<Eigen::Index>(k, 1, n);
}

double cvar_mean(const RowVector& values, double fraction,
                 std::vector<Eigen::Index>* tail) {
  const Eigen::Index n = values.size();
  if (n == 0) return 0.0;
  const Eigen::Index k = cvar_count(fraction, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values(a) > values(b);
  });
  order.resize(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (Eigen::Index i : order) sum += values(i);
  if (tail) *tail = std::move(order);
  return sum / static_cast<double>(k);
}

void check_compatible(const koopman::LiftedModel& model,
                      const clf::CLFCertificate& cert) {
  const Eigen::Index n = model.A.rows();
  if (cert.P.rows() != n || cert.P.cols() != n || cert.K.cols() != n ||
      cert.K.rows() != model.B.cols()) {
    throw std::invalid_argument(
        "lyapunov penalty: model and certificate dimensions differ");
  }
}

ViolationBatch lyapunov_penalty(const Matrix& errors, const RowVector& done,
                                const koopman::LiftedModel& model,
                                const clf::CLFCertificate& cert,
                                const Matrix& actions,
                                const LagrangeState& lagrange) {
  check_compatible(model, cert);
  const Eigen::Index n = errors.cols();
  if (actions.cols() != n || done.size() != n ||
      actions.rows() != model.B.cols()) {
    throw std::invalid_argument("lyapunov_penalty: batch shape mismatch");
  }
  ViolationBatch out;
  out.s.resize(n);
  out.hinge.resize(n);
  std::vector<Eigen::VectorXd> lifted(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    lifted[static_cast<std::size_t>(k)] =
        koopman::lift(model.dictionary, errors.col(k));
    const clf::Violation v = clf::violation(
        model, cert, lifted[static_cast<std::size_t>(k)], actions.col(k));
    out.s(k) = v.s;
    out.hinge(k) = done(k) > 0.5 ? 0.0 : v.hinge;
  }
  out.mean = n > 0 ? out.hinge.mean() : 0.0;
  out.max = n > 0 ? out.hinge.maxCoeff() : 0.0;
  out.aggregate = cvar_mean(out.hinge, lagrange.cvar_fraction, &out.tail);

  out.d_aggregate = Matrix::Zero(actions.rows(), n);
  const double w = out.tail.empty() ? 0.0 : 1.0 / static_cast<double>(out.tail.size());
  for (Eigen::Index k : out.tail) {
    if (out.hinge(k) > 0.0) {
      out.d_aggregate.col(k) = w * clf::violation_gradient_wrt_action(
                                       model, cert, lifted[static_cast<std::size_t>(k)],
                                       actions.col(k));
    }
  }
  return out;
}

ConstrainedActorStats actor_update_constrained(
    const sac::Batch& batch, sac::Agent& agent,
    const koopman::LiftedModel& model, const clf::CLFCertificate& cert,
    const LagrangeState& lagrange, std::mt19937_64& rng) {
  lagrange.validate();
  check_compatible(model, cert);
  const Matrix noise =
      nn::standard_normal(agent.config.action_dim, batch.size(), rng);

  ConstrainedActorStats stats;
  const sac::ActionPenalty penalty = [&](const Matrix& actions, Matrix& d_actions) {
    stats.violations =
        lyapunov_penalty(batch.obs, batch.done, model, cert, actions, lagrange);
    const double lambda = lagrange.lambda;
    if (lambda > 0.0) {
      for (Eigen::Index k : stats.violations.tail) {
        if (stats.violations.hinge(k) > 0.0) {
          d_actions.col(k) += lambda * stats.violations.d_aggregate.col(k);
        }
      }
    }
    return lambda * (stats.violations.aggregate - lagrange.zeta);
  };
  stats.actor = sac::actor_step(batch, agent, noise, &penalty);
  return stats;
}

LagrangeState dual_update(const LagrangeState& lagrange, double mean_violation) {
  if (!(mean_violation >= 0.0)) {
    throw std::invalid_argument("dual_update: mean_violation must be >= 0");
  }
  LagrangeState next = lagrange;
  next.lambda = std::clamp(
      lagrange.lambda + lagrange.beta_lambda * (mean_violation - lagrange.zeta),
      0.0, lagrange.lambda_max);
  return next;
}

}  // namespace lcsac::constraint
