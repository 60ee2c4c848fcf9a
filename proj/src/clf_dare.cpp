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
#include "lcsac/clf_dare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "lcsac/io.hpp"

namespace lcsac::clf {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& R, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd S = R + B.transpose() * P * B;
  return S.ldlt().solve(B.transpose() * P * A);
}

double max_abs_asymmetry(const Eigen::MatrixXd& M) {
  return (M - M.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace

Eigen::MatrixXd riccati_map(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                            const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd PA = P * A;
  const Eigen::MatrixXd BtPA = B.transpose() * PA;
  const Eigen::MatrixXd S = R + B.transpose() * P * B;
  return A.transpose() * PA - BtPA.transpose() * S.ldlt().solve(BtPA) + Q;
}

double dare_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                     const Eigen::MatrixXd& P) {
  return (P - riccati_map(A, B, Q, R, P)).norm();
}

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

CLFCertificate solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                          const DareOptions& options) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != m || R.cols() != m) {
    throw std::invalid_argument("solve_dare: dimension mismatch");
  }
  if (max_abs_asymmetry(R) > 1e-12 * std::max(1.0, R.cwiseAbs().maxCoeff()) ||
      R.llt().info() != Eigen::Success) {
    throw std::invalid_argument("solve_dare: R must be symmetric positive definite");
  }
  if (max_abs_asymmetry(Q) > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("solve_dare: Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qeig(Q, Eigen::EigenvaluesOnly);
  if (n > 0 &&
      qeig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, Q.norm())) {
    throw std::invalid_argument("solve_dare: Q must be positive semidefinite");
  }

  CLFCertificate cert;
  cert.Q = Q;
  cert.R = R;
  Eigen::MatrixXd P = Q;
  bool converged = false;
  int iter = 0;
  while (iter < options.max_iter) {
    ++iter;
    const Eigen::MatrixXd next = symmetrize(riccati_map(A, B, Q, R, P));
    if (!next.allFinite()) {
      throw std::runtime_error("solve_dare: iteration diverged");
    }
    const double delta = (next - P).norm();
    P = next;
    if (delta < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw std::runtime_error("solve_dare: no convergence within " +
                             std::to_string(options.max_iter) + " iterations");
  }
  cert.P = P;
  cert.K = lqr_gain(A, B, R, P);
  cert.iterations = iter;
  cert.dare_residual = dare_residual(A, B, Q, R, P);
  cert.closed_loop_spectral_radius = spectral_radius(A - B * cert.K);
  if (!(cert.closed_loop_spectral_radius < 1.0)) {
    throw std::runtime_error(
        "solve_dare: solution is not stabilizing (closed-loop spectral radius " +
        std::to_string(cert.closed_loop_spectral_radius) + ")");
  }
  return cert;
}

Eigen::MatrixXd default_state_weight(int n_lift, int n_state,
                                     double state_weight, double rbf_weight) {
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n_lift, rbf_weight);
  d.head(std::min(n_state, n_lift)).setConstant(state_weight);
  return d.asDiagonal();
}

Eigen::MatrixXd default_control_weight(int m, double control_weight) {
  return control_weight * Eigen::MatrixXd::Identity(m, m);
}

CLFCertificate certify(const koopman::LiftedModel& model,
                       const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                       double eta, const DareOptions& options) {
  if (!(eta >= 0.0 && eta < 1.0)) {
    throw std::invalid_argument("certify: eta must lie in [0, 1)");
  }
  CLFCertificate cert = solve_dare(model.A, model.B, Q, R, options);
  cert.eta = eta;
  cert.model_hash = koopman::model_hash(model);
  return cert;
}

double lyapunov_value(const Eigen::MatrixXd& P, const Eigen::VectorXd& z) {
  if (P.rows() != z.size() || P.cols() != z.size()) {
    throw std::invalid_argument("lyapunov_value: dimension mismatch");
  }
  return z.dot(P * z);
}

Violation violation(const koopman::LiftedModel& model,
                    const CLFCertificate& cert, const Eigen::VectorXd& z,
                    const Eigen::VectorXd& u) {
  const Eigen::VectorXd next = koopman::predict_one_step(model, z, u);
  const double v = lyapunov_value(cert.P, z);
  Violation out;
  out.s = lyapunov_value(cert.P, next) - v + cert.eta * v;
  out.hinge = std::max(out.s, 0.0);
  return out;
}

Eigen::VectorXd violation_gradient_wrt_action(const koopman::LiftedModel& model,
                                              const CLFCertificate& cert,
                                              const Eigen::VectorXd& z,
                                              const Eigen::VectorXd& u) {
  const Eigen::VectorXd next = koopman::predict_one_step(model, z, u);
  const double v = lyapunov_value(cert.P, z);
  const double s = lyapunov_value(cert.P, next) - v + cert.eta * v;
  if (!(s > 0.0)) return Eigen::VectorXd::Zero(u.size());
  return 2.0 * model.B.transpose() * (cert.P * next);
}

SpectrumReport analyze_P(const Eigen::MatrixXd& P, double chi_reg) {
  if (P.rows() != P.cols() || P.rows() == 0) {
    throw std::invalid_argument("analyze_P: P must be square and non-empty");
  }
  if (max_abs_asymmetry(P) > 1e-8) {
    throw std::invalid_argument("analyze_P: P is not symmetric");
  }
  const Eigen::MatrixXd shifted =
      symmetrize(P) + chi_reg * Eigen::MatrixXd::Identity(P.rows(), P.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(shifted,
                                                    Eigen::EigenvaluesOnly);
  SpectrumReport r;
  r.eigenvalues = es.eigenvalues().reverse();  // ascending -> descending
  r.m2 = r.eigenvalues(0);
  r.m1 = r.eigenvalues(r.eigenvalues.size() - 1);
  double smallest_nonzero = std::numeric_limits<double>::infinity();
  const double floor = 1e-12 * std::abs(r.m2);
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
    if (r.eigenvalues(i) > floor) {
      smallest_nonzero = std::min(smallest_nonzero, r.eigenvalues(i));
    }
  }
  r.condition_number = std::isfinite(smallest_nonzero)
                           ? r.m2 / smallest_nonzero
                           : std::numeric_limits<double>::infinity();
  return r;
}

std::string spectrum_csv(const SpectrumReport& report) {
  std::ostringstream out;
  out << "index,eigenvalue\n";
  for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i) {
    out << i << ',' << io::format_double(report.eigenvalues(i)) << '\n';
  }
  return out.str();
}

ContractionReport verify_contraction(const koopman::LiftedModel& model,
                                     const CLFCertificate& cert,
                                     const ContractionOptions& options) {
  const Eigen::Index n = cert.P.rows();
  const Eigen::MatrixXd closed = model.A - model.B * cert.K;
  const Eigen::MatrixXd M =
      symmetrize(cert.Q + cert.K.transpose() * cert.R * cert.K);
  const double eta = cert.eta;

  ContractionReport report;
  const SpectrumReport spec = analyze_P(cert.P);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> meig(M);
  report.eta_star = meig.eigenvalues()(0) / spec.m2;

  std::vector<Eigen::VectorXd> probes;
  probes.push_back(meig.eigenvectors().col(0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> peig(symmetrize(cert.P));
  probes.push_back(peig.eigenvectors().col(n - 1));
  if (spec.m1 > 0.0) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> geig(
        M, symmetrize(cert.P));
    report.eta_exact = geig.eigenvalues()(0);
    probes.push_back(geig.eigenvectors().col(0).normalized());
  } else {
    report.eta_exact = 0.0;
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  auto random_unit = [&] {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    return Eigen::VectorXd(z.normalized());
  };

  auto s_of = [&](const Eigen::VectorXd& z) {
    return violation(model, cert, z, -cert.K * z).s;
  };
  report.worst_s = -std::numeric_limits<double>::infinity();
  for (const auto& z : probes) report.worst_s = std::max(report.worst_s, s_of(z));
  for (int k = 0; k < options.sample_count; ++k) {
    report.worst_s = std::max(report.worst_s, s_of(random_unit()));
  }

  const double norm_gain =
      spec.m1 > 0.0 ? std::sqrt(spec.m2 / spec.m1)
                    : std::numeric_limits<double>::infinity();
  report.worst_rollout_ratio = 0.0;
  report.worst_norm_ratio = 0.0;
  for (int r = 0; r < options.rollout_count; ++r) {
    Eigen::VectorXd z = random_unit();
    const double v0 = lyapunov_value(cert.P, z);
    const double n0 = z.norm();
    for (int t = 1; t <= options.rollout_steps; ++t) {
      z = closed * z;
      const double decay = std::pow(1.0 - eta, t);
      report.worst_rollout_ratio = std::max(
          report.worst_rollout_ratio, lyapunov_value(cert.P, z) / (decay * v0));
      report.worst_norm_ratio =
          std::max(report.worst_norm_ratio,
                   z.norm() / (norm_gain * std::sqrt(decay) * n0));
    }
  }
  report.pass = report.worst_s <= options.s_tol &&
                report.worst_rollout_ratio <= 1.0 + 1e-9 &&
                report.worst_norm_ratio <= 1.0 + 1e-9;
  return report;
}

nlohmann::json to_json(const CLFCertificate& cert) {
  return {{"format", "lcsac-clf-certificate-v1"},
          {"P", io::matrix_to_json(cert.P)},
          {"K", io::matrix_to_json(cert.K)},
          {"Q", io::matrix_to_json(cert.Q)},
          {"R", io::matrix_to_json(cert.R)},
          {"eta", cert.eta},
          {"dare_residual", cert.dare_residual},
          {"iterations", cert.iterations},
          {"closed_loop_spectral_radius", cert.closed_loop_spectral_radius},
          {"model_hash", cert.model_hash}};
}

CLFCertificate certificate_from_json(const nlohmann::json& j) {
  CLFCertificate c;
  c.P = io::matrix_from_json(j.at("P"));
  c.K = io::matrix_from_json(j.at("K"));
  c.Q = io::matrix_from_json(j.at("Q"));
  c.R = io::matrix_from_json(j.at("R"));
  c.eta = j.at("eta").get<double>();
  c.dare_residual = j.at("dare_residual").get<double>();
  c.iterations = j.value("iterations", 0);
  c.closed_loop_spectral_radius = j.value("closed_loop_spectral_radius", 0.0);
  c.model_hash = j.value("model_hash", "");
  return c;
}

void save_certificate(const CLFCertificate& cert,
                      const std::filesystem::path& path) {
  io::write_json_file(path, to_json(cert));
}

CLFCertificate load_certificate(const std::filesystem::path& path) {
  return certificate_from_json(io::read_json_file(path));
}

}  // namespace lcsac::clf
