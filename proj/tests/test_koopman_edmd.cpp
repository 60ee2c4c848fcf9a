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
#include <filesystem>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "lcsac/koopman_edmd.hpp"

namespace lcsac::koopman {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd random_stable(std::mt19937_64& rng, int n, double radius) {
  std::normal_distribution<double> normal;
  MatrixXd a = MatrixXd::NullaryExpr(n, n, [&] { return normal(rng); });
  const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
  return a * (radius / rho);
}

// Consecutive samples of e+ = A0 e + B0 u driven by Gaussian inputs.
EDMDDataset linear_data(const MatrixXd& a0, const MatrixXd& b0, int n,
                        std::mt19937_64& rng, double input_scale = 1.0) {
  std::normal_distribution<double> normal;
  EDMDDataset ds;
  sim::StateVector e = sim::StateVector::NullaryExpr([&] { return normal(rng); });
  for (int k = 0; k < n; ++k) {
    const sim::ActionVector u = input_scale * sim::ActionVector(normal(rng), normal(rng));
    const sim::StateVector next = a0 * e + b0 * u;
    ds.samples.push_back({e, u, next});
    e = next;
    if (k % 50 == 49) e = sim::StateVector::NullaryExpr([&] { return normal(rng); });
  }
  return ds;
}

Dictionary identity_dictionary() { return Dictionary{}; }

TEST(Kmeans, FindsTwoSeparatedClusterMeans) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 0.1);
  std::vector<VectorXd> points;
  VectorXd mean_a = VectorXd::Zero(6);
  VectorXd mean_b = VectorXd::Zero(6);
  for (int i = 0; i < 200; ++i) {
    VectorXd p = VectorXd::NullaryExpr(6, [&] { return normal(rng); });
    if (i % 2 == 0) {
      p(0) += 10.0;
      mean_a += p;
    } else {
      p(0) -= 10.0;
      mean_b += p;
    }
    points.push_back(p);
  }
  mean_a /= 100.0;
  mean_b /= 100.0;
  auto centers = kmeans(points, 2, 3);
  ASSERT_EQ(centers.size(), 2u);
  if (centers[0](0) < 0) std::swap(centers[0], centers[1]);
  EXPECT_LT((centers[0] - mean_a).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((centers[1] - mean_b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Kmeans, SeededRunsAgree) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<VectorXd> points;
  for (int i = 0; i < 300; ++i) points.push_back(VectorXd::NullaryExpr(6, [&] { return uniform(rng); }));
  const auto a = kmeans(points, 4, 11);
  const auto b = kmeans(points, 4, 11);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Dictionary, SizesAndErrors) {
  std::mt19937_64 rng(3);
  const auto ds = linear_data(random_stable(rng, 6, 0.9), MatrixXd::Ones(6, 2), 100, rng);
  EXPECT_EQ(build_dictionary(ds, 0, std::nullopt, 0).n_lift(), 6);
  const auto dict = build_dictionary(ds, 2, std::nullopt, 0);
  EXPECT_EQ(dict.n_lift(), 8);
  EXPECT_GT(dict.bandwidth, 0.0);
  EXPECT_NEAR(dict.bandwidth, (dict.centers[0] - dict.centers[1]).norm(), 1e-12);
  EXPECT_EQ(build_dictionary(ds, 2, 0.7, 0).bandwidth, 0.7);
  EXPECT_THROW(build_dictionary(ds, 101, std::nullopt, 0), std::invalid_argument);
  EXPECT_THROW(build_dictionary(EDMDDataset{}, 2, std::nullopt, 0), std::invalid_argument);
}

TEST(Lift, StateBlockAndRbfValues) {
  Dictionary dict;
  dict.centers = {VectorXd::Zero(6), VectorXd::Constant(6, 1.0)};
  dict.bandwidth = 0.5;
  const VectorXd z0 = lift(dict, VectorXd::Zero(6));
  EXPECT_TRUE(z0.head(6).isZero());
  EXPECT_EQ(z0(6), 1.0);
  EXPECT_NEAR(z0(7), std::exp(-6.0 / (2.0 * 0.25)), 1e-15);

  VectorXd e = VectorXd::Zero(6);
  e(2) = dict.bandwidth * std::sqrt(2.0);
  EXPECT_NEAR(lift(dict, e)(6), std::exp(-1.0), 1e-12);

  const VectorXd r = VectorXd::LinSpaced(6, -1.0, 2.0);
  EXPECT_EQ(lift(identity_dictionary(), r), r);
  const MatrixXd c = MatrixXd::Identity(6, 8);
  EXPECT_EQ(c * lift(dict, r), r);
  const VectorXd zr = lift(dict, r);
  EXPECT_TRUE((zr.tail(2).array() > 0.0).all() && (zr.tail(2).array() <= 1.0).all());
}

TEST(FitEdmd, RecoversLinearSystemsExactly) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd a0 = random_stable(rng, 6, 0.95);
    const MatrixXd b0 = MatrixXd::NullaryExpr(6, 2, [&] { return normal(rng); });
    const auto ds = linear_data(a0, b0, 400, rng);
    const auto model = fit_edmd(ds, identity_dictionary(), 0.0);
    EXPECT_LT((model.A - a0).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((model.B - b0).cwiseAbs().maxCoeff(), 1e-8);
    const auto report = validate_model(model, ds, 10);
    EXPECT_LT(report.one_step_rmse.maxCoeff(), 1e-8);
    EXPECT_LT(report.multi_step_rmse.maxCoeff(), 1e-8);
    EXPECT_GT(report.n_windows, 0u);
  }
}

TEST(FitEdmd, UnexcitedInputGivesZeroB) {
  std::mt19937_64 rng(5);
  const MatrixXd a0 = random_stable(rng, 6, 0.9);
  const auto ds = linear_data(a0, MatrixXd::Zero(6, 2), 300, rng, 0.0);
  EXPECT_THROW(fit_edmd(ds, identity_dictionary(), 0.0), std::invalid_argument);
  const auto model = fit_edmd(ds, identity_dictionary(), 1e-8);
  EXPECT_LT(model.B.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((model.A - a0).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FitEdmd, RegularizationShrinksMonotonically) {
  std::mt19937_64 rng(6);
  const auto ds = linear_data(random_stable(rng, 6, 0.9), MatrixXd::Ones(6, 2), 200, rng);
  const auto dict = build_dictionary(ds, 2, std::nullopt, 0);
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5}) {
    const auto m = fit_edmd(ds, dict, lambda);
    MatrixXd ab(m.A.rows(), m.A.cols() + m.B.cols());
    ab << m.A, m.B;
    EXPECT_LT(ab.norm(), previous);
    previous = ab.norm();
  }
  EXPECT_LT(previous, 0.1);
}

TEST(FitEdmd, SatisfiesRegularizedNormalEquations) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  auto ds = linear_data(random_stable(rng, 6, 0.9), MatrixXd::Ones(6, 2), 500, rng);
  for (auto& s : ds.samples) s.e_next += sim::StateVector::NullaryExpr([&] { return noise(rng); });
  const auto dict = build_dictionary(ds, 2, std::nullopt, 1);
  const double lambda = 1e-3;
  const auto m = fit_edmd(ds, dict, lambda);

  const int n = dict.n_lift();
  MatrixXd ab(n, n + 2);
  ab << m.A, m.B;
  MatrixXd grad = lambda * ab;
  for (const auto& s : ds.samples) {
    VectorXd x(n + 2);
    x << lift(dict, s.e), s.u;
    grad += (ab * x - lift(dict, s.e_next)) * x.transpose();
  }
  EXPECT_LT(grad.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FitEdmd, RejectsTooFewSamples) {
  std::mt19937_64 rng(8);
  const auto ds = linear_data(random_stable(rng, 6, 0.9), MatrixXd::Ones(6, 2), 7, rng);
  EXPECT_THROW(fit_edmd(ds, identity_dictionary(), 1e-5), std::invalid_argument);
}

TEST(Predict, MatchesLoopOracle) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  LiftedModel m;
  m.A = MatrixXd::NullaryExpr(8, 8, [&] { return normal(rng); });
  m.B = MatrixXd::NullaryExpr(8, 2, [&] { return normal(rng); });
  const VectorXd z = VectorXd::NullaryExpr(8, [&] { return normal(rng); });
  const VectorXd u = VectorXd::NullaryExpr(2, [&] { return normal(rng); });
  const VectorXd got = predict_one_step(m, z, u);
  for (int i = 0; i < 8; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 8; ++j) acc += m.A(i, j) * z(j);
    for (int j = 0; j < 2; ++j) acc += m.B(i, j) * u(j);
    EXPECT_NEAR(got(i), acc, 1e-12);
  }
  EXPECT_TRUE(predict_one_step(m, VectorXd::Zero(8), VectorXd::Zero(2)).isZero());
  m.A.setIdentity();
  m.B.setZero();
  EXPECT_EQ(predict_one_step(m, z, u), z);
  EXPECT_THROW(predict_one_step(m, VectorXd::Zero(7), u), std::invalid_argument);
}

TEST(Validate, RejectsEmptyHeldout) {
  std::mt19937_64 rng(10);
  const auto ds = linear_data(random_stable(rng, 6, 0.9), MatrixXd::Ones(6, 2), 100, rng);
  const auto model = fit_edmd(ds, identity_dictionary(), 0.0);
  EXPECT_THROW(validate_model(model, EDMDDataset{}), std::invalid_argument);
}

TEST(Split, PartitionsAllSamplesDeterministically) {
  std::mt19937_64 rng(11);
  const auto ds = linear_data(random_stable(rng, 6, 0.9), MatrixXd::Ones(6, 2), 1000, rng);
  const auto [train, held] = split_dataset(ds, 0.9, 5, 50);
  EXPECT_EQ(train.size() + held.size(), ds.size());
  EXPECT_EQ(held.size(), 100u);
  const auto [train2, held2] = split_dataset(ds, 0.9, 5, 50);
  for (std::size_t i = 0; i < held.size(); ++i) EXPECT_EQ(held.samples[i].e, held2.samples[i].e);
}

TEST(Persistence, DatasetAndModelRoundTrip) {
  std::mt19937_64 rng(12);
  const auto ds = linear_data(random_stable(rng, 6, 0.9), MatrixXd::Ones(6, 2), 120, rng);
  const auto dir = std::filesystem::temp_directory_path() / "lcsac_edmd_test";
  save_dataset_csv(ds, dir / "data.csv");
  const auto back = load_dataset_csv(dir / "data.csv");
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back.samples[i].e, ds.samples[i].e);
    EXPECT_EQ(back.samples[i].u, ds.samples[i].u);
    EXPECT_EQ(back.samples[i].e_next, ds.samples[i].e_next);
  }

  auto model = fit_edmd(ds, build_dictionary(ds, 2, std::nullopt, 0), 1e-5);
  model.config_hash = "abc";
  save_model(model, dir / "model.json");
  const auto loaded = load_model(dir / "model.json");
  EXPECT_EQ(loaded.A, model.A);
  EXPECT_EQ(loaded.B, model.B);
  EXPECT_EQ(loaded.dictionary.bandwidth, model.dictionary.bandwidth);
  EXPECT_EQ(loaded.config_hash, "abc");
  EXPECT_EQ(model_hash(loaded), model_hash(model));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lcsac::koopman
