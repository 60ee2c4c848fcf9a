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

// Lifted linear surrogate z+ = A z + B u of the tracking-error dynamics,
// identified by EDMD over a dictionary of [error coordinates; Gaussian RBFs].

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "lcsac/planar_quad.hpp"

namespace lcsac::koopman {

struct Dictionary {
  int n_state = sim::kStateDim;
  std::vector<Eigen::VectorXd> centers;
  double bandwidth = 1.0;

  int n_rbf() const { return static_cast<int>(centers.size()); }
  int n_lift() const { return n_state + n_rbf(); }
  void validate() const;
};

struct EDMDSample {
  sim::StateVector e;
  sim::ActionVector u;
  sim::StateVector e_next;
};

struct EDMDDataset {
  std::vector<EDMDSample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  void validate() const;
};

struct FitReport {
  double residual_norm = 0.0;
  std::size_t dataset_size = 0;
  double tikhonov = 0.0;
};

struct LiftedModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Dictionary dictionary;
  FitReport fit_report;
  // Hash of the settings that produced this model; checked before training.
  std::string config_hash;

  int n_lift() const { return static_cast<int>(A.rows()); }
  int n_input() const { return static_cast<int>(B.cols()); }
  void validate() const;
};

/// Lloyd's k-means with k-means++ seeding. Returns k centers; assignment ties
/// go to the lowest center index. Stops when assignments stop changing.
std::vector<Eigen::VectorXd> kmeans(const std::vector<Eigen::VectorXd>& points,
                                    int k, std::uint64_t seed,
                                    int max_iter = 50);

/// RBF centers from k-means on the dataset's error vectors. Without an
/// explicit bandwidth the median pairwise center distance is used.
Dictionary build_dictionary(const EDMDDataset& dataset, int n_rbf,
                            std::optional<double> bandwidth,
                            std::uint64_t seed);

/// [e; exp(-|e - c_i|^2 / (2 bandwidth^2))]
Eigen::VectorXd lift(const Dictionary& dict, const Eigen::VectorXd& e);

/// Regularized least squares for [A B]:
///   min |Z' - [A B][Z; U]|_F^2 + tikhonov |[A B]|_F^2
/// solved by QR on the Tikhonov-augmented regressor. C selects the state
/// block of the lift.
LiftedModel fit_edmd(const EDMDDataset& dataset, const Dictionary& dict,
                     double tikhonov);

Eigen::VectorXd predict_one_step(const LiftedModel& model,
                                 const Eigen::VectorXd& z,
                                 const Eigen::VectorXd& u);

struct ValidationReport {
  Eigen::VectorXd one_step_rmse;
  Eigen::VectorXd multi_step_rmse;
  int horizon = 0;
  std::size_t n_samples = 0;
  std::size_t n_windows = 0;
};

/// One-step RMSE of C (A g(e) + B u) against e' per error channel, plus the
/// RMSE of open-loop rollouts over consecutive samples (a sample continues
/// the previous one when its e equals the previous e'). Windows are
/// non-overlapping and `horizon` steps long.
ValidationReport validate_model(const LiftedModel& model,
                                const EDMDDataset& heldout, int horizon = 10);

/// Seeded shuffle of contiguous blocks, so held-out data keeps short
/// sequences for multi-step validation.
std::pair<EDMDDataset, EDMDDataset> split_dataset(const EDMDDataset& dataset,
                                                  double train_fraction,
                                                  std::uint64_t seed,
                                                  std::size_t block_size = 50);

// CSV columns: e1..e6,u1,u2,e1_next..e6_next. Values round-trip exactly.
void save_dataset_csv(const EDMDDataset& dataset,
                      const std::filesystem::path& path);
EDMDDataset load_dataset_csv(const std::filesystem::path& path);

nlohmann::json to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LiftedModel& model);
LiftedModel model_from_json(const nlohmann::json& j);

void save_model(const LiftedModel& model, const std::filesystem::path& path);
LiftedModel load_model(const std::filesystem::path& path);

/// Content hash of A, B and the dictionary.
std::string model_hash(const LiftedModel& model);

}  // namespace lcsac::koopman
