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
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "lcsac/clf_dare.hpp"

namespace lcsac::clf {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

koopman::LiftedModel make_model(const MatrixXd& a, const MatrixXd& b) {
  koopman::LiftedModel m;
  m.A = a;
  m.B = b;
  m.dictionary.n_state = static_cast<int>(a.rows());
  m.C = MatrixXd::Identity(a.rows(), a.rows());
  return m;
}

koopman::LiftedModel random_model(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> normal;
  MatrixXd a = MatrixXd::NullaryExpr(n, n, [&] { return normal(rng); });
  a *= 1.05 / a.eigenvalues().cwiseAbs().maxCoeff();  // mildly unstable
  const MatrixXd b = MatrixXd::NullaryExpr(n, m, [&] { return normal(rng); });
  return make_model(a, b);
}

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

TEST(SolveDare, ScalarMatchesQuadraticRoot) {
  // p = a^2 p - a^2 b^2 p^2 / (r + b^2 p) + q with a = 0.5, b = q = r = 1
  // reduces to p^2 - 0.25 p - 1 = 0.
  const double oracle = (0.25 + std::sqrt(0.25 * 0.25 + 4.0)) / 2.0;
  const auto cert = solve_dare(scalar(0.5), scalar(1.0), scalar(1.0), scalar(1.0));
  EXPECT_NEAR(cert.P(0, 0), oracle, 1e-9);
  EXPECT_NEAR(cert.P(0, 0), 1.13278, 1e-5);
  EXPECT_NEAR(cert.K(0, 0), oracle * 0.5 / (1.0 + oracle), 1e-9);
  EXPECT_LT(cert.dare_residual, 1e-8);
}

TEST(SolveDare, ZeroInputReducesToLyapunovSeries) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  MatrixXd a = MatrixXd::NullaryExpr(5, 5, [&] { return normal(rng); });
  a *= 0.8 / a.eigenvalues().cwiseAbs().maxCoeff();
  MatrixXd q = MatrixXd::NullaryExpr(5, 5, [&] { return normal(rng); });
  q = q * q.transpose() + MatrixXd::Identity(5, 5);

  MatrixXd series = MatrixXd::Zero(5, 5);
  MatrixXd term = q;
  while (term.norm() > 1e-12 * series.norm() || series.isZero()) {
    series += term;
    term = a.transpose() * term * a;
  }
  const auto cert = solve_dare(a, MatrixXd::Zero(5, 1), q, scalar(1.0));
  EXPECT_LT((cert.P - series).norm() / series.norm(), 1e-9);
  EXPECT_TRUE(cert.K.isZero());
}

TEST(SolveDare, DeadbeatGivesQ) {
  const MatrixXd q = MatrixXd::Identity(3, 3) * 2.0;
  const auto cert = solve_dare(MatrixXd::Zero(3, 3), MatrixXd::Ones(3, 1), q, scalar(1.0));
  EXPECT_EQ(cert.P, q);
  EXPECT_TRUE(cert.K.isZero());
}

TEST(SolveDare, LiftedSizedProblemIsStabilizing) {
  std::mt19937_64 rng(2);
  const auto model = random_model(rng, 8, 2);
  const auto cert = solve_dare(model.A, model.B, default_state_weight(8, 6),
                               default_control_weight(2));
  EXPECT_LT(dare_residual(model.A, model.B, cert.Q, cert.R, cert.P), 1e-8);
  EXPECT_LT(spectral_radius(model.A - model.B * cert.K), 1.0);
  EXPECT_NEAR(cert.closed_loop_spectral_radius,
              spectral_radius(model.A - model.B * cert.K), 1e-12);
  EXPECT_LT((cert.P - cert.P.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_GE(analyze_P(cert.P).m1, -1e-10);
}

TEST(SolveDare, Errors) {
  EXPECT_THROW(solve_dare(scalar(0.5), scalar(1.0), scalar(1.0), scalar(0.0)),
               std::invalid_argument);
  EXPECT_THROW(solve_dare(scalar(0.5), scalar(1.0), scalar(-1.0), scalar(1.0)),
               std::invalid_argument);
  // Unstable and uncontrollable: no stabilizing solution.
  EXPECT_THROW(solve_dare(scalar(1.5), scalar(0.0), scalar(1.0), scalar(1.0)),
               std::runtime_error);
  EXPECT_THROW(solve_dare(scalar(0.5), scalar(1.0), scalar(1.0), scalar(1.0), {1e-10, 2}),
               std::runtime_error);
}

TEST(Lyapunov, ValueAndSandwich) {
  EXPECT_EQ(lyapunov_value(MatrixXd::Identity(4, 4), VectorXd::Zero(4)), 0.0);
  VectorXd z = VectorXd::Zero(4);
  z(0) = 3.0;
  z(1) = 4.0;
  EXPECT_EQ(lyapunov_value(MatrixXd::Identity(4, 4), z), 25.0);

  std::mt19937_64 rng(3);
  const auto model = random_model(rng, 8, 2);
  const auto cert = certify(model, default_state_weight(8, 6), default_control_weight(2), 0.1);
  const auto spec = analyze_P(cert.P);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 100000; ++i) {
    const VectorXd r = VectorXd::NullaryExpr(8, [&] { return normal(rng); });
    const double v = lyapunov_value(cert.P, r);
    ASSERT_GE(v, spec.m1 * r.squaredNorm() - 1e-9 * v);
    ASSERT_LE(v, spec.m2 * r.squaredNorm() + 1e-9 * v);
  }
}

TEST(Violation, ForcedArithmetic) {
  // V(z) = 2, V(z+) = 1 with P = I, A = diag(1/sqrt2), B = 0.
  auto model = make_model(MatrixXd::Identity(1, 1) / std::sqrt(2.0), MatrixXd::Zero(1, 1));
  CLFCertificate cert;
  cert.P = MatrixXd::Identity(1, 1);
  cert.eta = 0.1;
  auto v = violation(model, cert, VectorXd::Constant(1, std::sqrt(2.0)), VectorXd::Zero(1));
  EXPECT_NEAR(v.s, -0.8, 1e-12);
  EXPECT_EQ(v.hinge, 0.0);

  model.A = MatrixXd::Identity(1, 1) * std::sqrt(2.0);
  v = violation(model, cert, VectorXd::Constant(1, 1.0), VectorXd::Zero(1));
  EXPECT_NEAR(v.s, 1.1, 1e-12);
  EXPECT_NEAR(v.hinge, 1.1, 1e-12);
}

TEST(ViolationGradient, ScalarAndZeroCases) {
  const auto model = make_model(scalar(0.0), scalar(1.0));
  CLFCertificate cert;
  cert.P = scalar(1.0);
  cert.eta = 0.1;
  EXPECT_NEAR(violation_gradient_wrt_action(model, cert, VectorXd::Zero(1),
                                            VectorXd::Constant(1, 2.0))(0),
              4.0, 1e-15);
  // s <= 0: no gradient.
  EXPECT_EQ(violation_gradient_wrt_action(model, cert, VectorXd::Constant(1, 5.0),
                                          VectorXd::Constant(1, 0.1))(0),
            0.0);
}

TEST(ViolationGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  const auto model = random_model(rng, 8, 2);
  const auto cert = certify(model, default_state_weight(8, 6), default_control_weight(2), 0.1);
  int active = 0;
  for (int i = 0; i < 200 && active < 100; ++i) {
    const VectorXd z = VectorXd::NullaryExpr(8, [&] { return normal(rng); });
    const VectorXd u = VectorXd::NullaryExpr(2, [&] { return 3.0 * normal(rng); });
    if (violation(model, cert, z, u).s <= 0.0) continue;
    ++active;
    const VectorXd g = violation_gradient_wrt_action(model, cert, z, u);
    VectorXd fd(2);
    const double h = 1e-6;
    for (int j = 0; j < 2; ++j) {
      VectorXd up = u, dn = u;
      up(j) += h;
      dn(j) -= h;
      fd(j) = (violation(model, cert, z, up).s - violation(model, cert, z, dn).s) / (2 * h);
    }
    EXPECT_LT((g - fd).norm() / g.norm(), 1e-6);
  }
  EXPECT_EQ(active, 100);
}

TEST(AnalyzeP, SpectraAndShift) {
  auto r = analyze_P(MatrixXd::Identity(3, 3));
  EXPECT_TRUE((r.eigenvalues.array() == 1.0).all());
  EXPECT_NEAR(r.condition_number, 1.0, 1e-12);

  const MatrixXd d = VectorXd((VectorXd(3) << 10.0, 1.0, 0.1).finished()).asDiagonal();
  r = analyze_P(d);
  EXPECT_NEAR(r.eigenvalues(0), 10.0, 1e-12);
  EXPECT_NEAR(r.eigenvalues(2), 0.1, 1e-12);
  EXPECT_NEAR(r.condition_number, 100.0, 1e-9);
  EXPECT_NEAR(r.m1, 0.1, 1e-12);
  EXPECT_NEAR(r.m2, 10.0, 1e-12);

  const MatrixXd semi = VectorXd((VectorXd(2) << 1.0, 0.0).finished()).asDiagonal();
  r = analyze_P(semi, 0.1);
  EXPECT_NEAR(r.eigenvalues(0), 1.1, 1e-12);
  EXPECT_NEAR(r.eigenvalues(1), 0.1, 1e-12);

  MatrixXd asym = MatrixXd::Identity(2, 2);
  asym(0, 1) = 1e-6;
  EXPECT_THROW(analyze_P(asym), std::invalid_argument);
  EXPECT_EQ(spectrum_csv(analyze_P(d)).substr(0, 17), "index,eigenvalue\n");
}

TEST(Contraction, ZeroAndHalfRatePass) {
  std::mt19937_64 rng(5);
  const auto model = random_model(rng, 8, 2);
  auto cert = certify(model, default_state_weight(8, 6), default_control_weight(2), 0.0);
  auto report = verify_contraction(model, cert);
  EXPECT_TRUE(report.pass);
  EXPECT_GT(report.eta_star, 0.0);
  EXPECT_GE(report.eta_exact, report.eta_star - 1e-12);

  cert.eta = 0.5 * report.eta_star;
  EXPECT_TRUE(verify_contraction(model, cert).pass);
  cert.eta = report.eta_star;
  EXPECT_TRUE(verify_contraction(model, cert).pass);
}

TEST(Contraction, DoubleRateFailsAlongMinimizingDirection) {
  // Scalar system: the bound eta* is attained, so 2 eta* must fail.
  const auto model = make_model(scalar(1.2), scalar(1.0));
  auto cert = certify(model, scalar(1.0), scalar(1.0), 0.0);
  const auto base = verify_contraction(model, cert);
  EXPECT_NEAR(base.eta_star, base.eta_exact, 1e-12);
  cert.eta = 2.0 * base.eta_star;
  const auto report = verify_contraction(model, cert);
  EXPECT_FALSE(report.pass);
  EXPECT_GT(report.worst_s, 0.0);
}

TEST(Certificate, JsonRoundTrip) {
  std::mt19937_64 rng(6);
  const auto model = random_model(rng, 8, 2);
  const auto cert = certify(model, default_state_weight(8, 6), default_control_weight(2), 0.1);
  EXPECT_EQ(cert.model_hash, koopman::model_hash(model));
  const auto back = certificate_from_json(to_json(cert));
  EXPECT_EQ(back.P, cert.P);
  EXPECT_EQ(back.K, cert.K);
  EXPECT_EQ(back.eta, cert.eta);
  EXPECT_EQ(back.model_hash, cert.model_hash);
  EXPECT_THROW(certify(model, cert.Q, cert.R, 1.0), std::invalid_argument);
}

}  // namespace
}  // namespace lcsac::clf
