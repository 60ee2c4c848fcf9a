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

// Lyapunov-decrease penalty for the actor (CVaR-aggregated hinge on the
// surrogate one-step prediction) and the projected dual update of its
// multiplier.

#include <random>
#include <vector>

#include <Eigen/Core>

#include "lcsac/clf_dare.hpp"
#include "lcsac/koopman_edmd.hpp"
#include "lcsac/sac.hpp"

namespace lcsac::constraint {

using nn::Matrix;
using nn::RowVector;

struct LagrangeState {
  double lambda = 0.0;
  double zeta = 1e-6;
  double beta_lambda = 1e-3;
  double lambda_max = 0.1;
  double cvar_fraction = 0.1;

  void validate() const;
};

struct ViolationBatch {
  RowVector s;      // raw decrease residual per sample
  RowVector hinge;  // max(s, 0), zero on terminal samples
  std::vector<Eigen::Index> tail;  // samples entering the CVaR mean
  double aggregate = 0.0;  // mean of the tail hinges
  double mean = 0.0;       // plain batch mean of the hinges
  double max = 0.0;
  Matrix d_aggregate;      // d aggregate / d actions, (m x batch)
};

/// Number of samples in the CVaR tail: ceil(fraction * n), at least 1.
Eigen::Index cvar_count(double fraction, Eigen::Index n);

/// Mean of the ceil(fraction * n) largest values; ties keep the lower index.
double cvar_mean(const RowVector& values, double fraction,
                 std::vector<Eigen::Index>* tail = nullptr);

/// Throws std::invalid_argument unless model and certificate agree in size.
void check_compatible(const koopman::LiftedModel& model,
                      const clf::CLFCertificate& cert);

/// Hinge max(V(Az + Bu) - V(z) + eta V(z), 0) per sample with z = g(e), the
/// terminal samples (done = 1) masked to zero, and its CVaR aggregate.
ViolationBatch lyapunov_penalty(const Matrix& errors, const RowVector& done,
                                const koopman::LiftedModel& model,
                                const clf::CLFCertificate& cert,
                                const Matrix& actions,
                                const LagrangeState& lagrange);

struct ConstrainedActorStats {
  sac::ActorStats actor;
  ViolationBatch violations;
};

/// Actor step on mean(J_SAC) + lambda (aggregate - zeta), both terms
/// evaluated on the same reparameterized actions.
ConstrainedActorStats actor_update_constrained(
    const sac::Batch& batch, sac::Agent& agent,
    const koopman::LiftedModel& model, const clf::CLFCertificate& cert,
    const LagrangeState& lagrange, std::mt19937_64& rng);

/// lambda <- clip(lambda + beta_lambda (mean_violation - zeta), 0, lambda_max)
LagrangeState dual_update(const LagrangeState& lagrange, double mean_violation);

}  // namespace lcsac::constraint
