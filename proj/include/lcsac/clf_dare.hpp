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

// Quadratic control Lyapunov certificate V(z) = z' P z from the stabilizing
// DARE solution of a lifted model, plus the decrease-condition checks.

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "lcsac/koopman_edmd.hpp"

namespace lcsac::clf {

struct CLFCertificate {
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  double eta = 0.1;
  double dare_residual = 0.0;
  int iterations = 0;
  double closed_loop_spectral_radius = 0.0;
  // koopman::model_hash of the model the certificate was solved for.
  std::string model_hash;

  int n_lift() const { return static_cast<int>(P.rows()); }
};

struct DareOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

/// Riccati fixed-point iteration
///   P <- A'PA - A'PB (R + B'PB)^{-1} B'PA + Q,   P0 = Q,
/// symmetrized every step, until |P_{k+1} - P_k|_F < tol. Throws
/// std::runtime_error if it does not converge or if A - BK is not Schur
/// stable, std::invalid_argument for bad weights.
CLFCertificate solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                          const DareOptions& options = {});

/// One application of the Riccati map; exposed for residual checks.
Eigen::MatrixXd riccati_map(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                            const Eigen::MatrixXd& P);

/// |P - riccati_map(P)|_F
double dare_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P);

double spectral_radius(const Eigen::MatrixXd& M);

/// Default weights: state_weight on the first n_state lifted coordinates,
/// rbf_weight on the rest, control_weight * I for R.
Eigen::MatrixXd default_state_weight(int n_lift, int n_state,
                                     double state_weight = 10.0,
                                     double rbf_weight = 0.01);
Eigen::MatrixXd default_control_weight(int m, double control_weight = 0.1);

/// Solve on a lifted model and record its hash.
CLFCertificate certify(const koopman::LiftedModel& model,
                       const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                       double eta, const DareOptions& options = {});

double lyapunov_value(const Eigen::MatrixXd& P, const Eigen::VectorXd& z);

struct Violation {
  double s = 0.0;      // V(Az+Bu) - V(z) + eta V(z)
  double hinge = 0.0;  // max(s, 0)
};

Violation violation(const koopman::LiftedModel& model,
                    const CLFCertificate& cert, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& u);

/// 2 B'P (Az + Bu) where s(z,u) > 0, the zero vector elsewhere.
Eigen::VectorXd violation_gradient_wrt_action(const koopman::LiftedModel& model,
                                              const CLFCertificate& cert,
                                              const Eigen::VectorXd& z,
                                              const Eigen::VectorXd& u);

struct SpectrumReport {
  Eigen::VectorXd eigenvalues;  // descending
  double m1 = 0.0;              // smallest eigenvalue
  double m2 = 0.0;              // largest eigenvalue
  // largest / smallest eigenvalue above 1e-12 * largest; inf if none.
  double condition_number = 0.0;
};

/// Spectrum of P + chi_reg I. Throws if P is asymmetric beyond 1e-8.
SpectrumReport analyze_P(const Eigen::MatrixXd& P, double chi_reg = 0.0);

/// Spectrum as CSV: index,eigenvalue
std::string spectrum_csv(const SpectrumReport& report);

struct ContractionReport {
  // lambda_min(Q + K'RK) / lambda_max(P): any eta up to this is certified.
  double eta_star = 0.0;
  // Largest eta with V(z+) <= (1 - eta) V(z) for all z under u = -Kz.
  double eta_exact = 0.0;
  double worst_s = 0.0;
  double worst_rollout_ratio = 0.0;  // max V(z_t) / ((1-eta)^t V(z0))
  double worst_norm_ratio = 0.0;     // max |z_t| / bound(t)
  bool pass = false;
};

struct ContractionOptions {
  int sample_count = 10000;
  std::uint64_t seed = 0;
  int rollout_steps = 50;
  int rollout_count = 100;
  double s_tol = 1e-9;
};

/// Checks s(z, -Kz) <= s_tol on sampled z and along the extremal directions,
/// and that closed-loop rollouts satisfy V(z_t) <= (1-eta)^t V(z0) (1+1e-9)
/// and |z_t| <= sqrt(m2/m1) (1-eta)^{t/2} |z0| (1+1e-9).
ContractionReport verify_contraction(const koopman::LiftedModel& model,
                                     const CLFCertificate& cert,
                                     const ContractionOptions& options = {});

nlohmann::json to_json(const CLFCertificate& cert);
CLFCertificate certificate_from_json(const nlohmann::json& j);
void save_certificate(const CLFCertificate& cert,
                      const std::filesystem::path& path);
CLFCertificate load_certificate(const std::filesystem::path& path);

}  // namespace lcsac::clf
