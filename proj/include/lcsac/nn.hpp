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

// Small reverse-mode layer for SAC: fully connected ReLU networks with a
// recorded forward pass, the tanh-squashed Gaussian policy head, and Adam.
//
// Batches are stored column-wise: an input of shape (input_dim x batch)
// produces an output of shape (output_dim x batch).

#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace lcsac::nn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kTanhEpsilon = 1e-6;

struct ParamTensor {
  std::string name;
  Matrix value;
  Matrix grad;

  ParamTensor() = default;
  ParamTensor(std::string name, Eigen::Index rows, Eigen::Index cols);
  void zero_grad() { grad.setZero(); }
};

enum class OutputTransform { kNone, kTanhGaussianHead };

struct MLPSpec {
  int input_dim = 0;
  std::vector<int> hidden = {128, 128};
  int output_dim = 0;
  OutputTransform output_transform = OutputTransform::kNone;

  void validate() const;
};

/// Values saved by Mlp::forward for the backward pass.
struct Tape {
  std::vector<Matrix> inputs;  // input of every layer
  std::vector<Matrix> pre;     // pre-activation of every hidden layer
  bool recorded = false;
};

class Mlp {
 public:
  /// Zero-initialized network.
  explicit Mlp(MLPSpec spec);
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; the last
  /// layer is additionally multiplied by final_layer_scale.
  Mlp(MLPSpec spec, std::mt19937_64& rng, double final_layer_scale = 1.0);

  /// Affine + ReLU composition (no activation on the last layer). Throws
  /// on a dimension mismatch or any non-finite output.
  Matrix forward(const Matrix& input, Tape* tape = nullptr) const;

  /// Accumulates parameter gradients of sum(upstream .* output) and returns
  /// the gradient with respect to the input. ReLU uses subgradient 0 at 0.
  Matrix backward(const Tape& tape, const Matrix& upstream);

  /// Input gradient only; parameter gradients are left untouched.
  Matrix input_gradient(const Tape& tape, const Matrix& upstream) const;

  void zero_grad();
  std::vector<ParamTensor*> parameters();
  std::vector<const ParamTensor*> parameters() const;
  std::size_t num_layers() const { return weights_.size(); }
  const MLPSpec& spec() const { return spec_; }

  /// Copies parameter values (not gradients) from a same-shaped network.
  void copy_values_from(const Mlp& other);

 private:
  Matrix backprop(const Tape& tape, const Matrix& upstream, bool accumulate);

  MLPSpec spec_;
  std::vector<ParamTensor> weights_;
  std::vector<ParamTensor> biases_;
};

struct SquashedGaussianSample {
  Eigen::VectorXd action;
  double log_prob = 0.0;
  Eigen::VectorXd pre_tanh;
};

/// a = tanh(mean + exp(log_std) * noise) with log_std clamped to
/// [kLogStdMin, kLogStdMax] and
///   log_prob = sum_i [log N(u_i; mean_i, std_i) - log(1 - tanh(u_i)^2 + 1e-6)].
SquashedGaussianSample sample_squashed_gaussian(const Eigen::VectorXd& mean,
                                                const Eigen::VectorXd& log_std,
                                                const Eigen::VectorXd& noise);

/// Batched policy head over a network output of shape (2m x batch): rows
/// [0, m) are means, rows [m, 2m) unclamped log standard deviations.
struct SquashedGaussianBatch {
  Matrix mean;
  Matrix log_std;  // clamped
  Matrix clamp_active;  // 1 where the raw log_std was inside the clamp range
  Matrix noise;
  Matrix pre_tanh;
  Matrix action;
  RowVector log_prob;

  /// Gradient with respect to the head output given upstream gradients on
  /// the actions and the log-probabilities.
  Matrix backward(const Matrix& d_action, const RowVector& d_log_prob) const;
};

SquashedGaussianBatch squashed_gaussian(const Matrix& head_output,
                                        const Matrix& noise);

/// Deterministic policy action tanh(mean).
Matrix squashed_mean_action(const Matrix& head_output);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step = 0;
};

/// One bias-corrected Adam update of every parameter from its .grad. Throws
/// std::runtime_error (and changes nothing) if any gradient is non-finite.
void optimizer_step(std::span<ParamTensor* const> params, AdamState& state,
                    const AdamConfig& config);

nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);
void save_mlp(const Mlp& net, const std::filesystem::path& path);
Mlp load_mlp(const std::filesystem::path& path);

/// Fills a (rows x cols) matrix with standard normal draws, column by column.
Matrix standard_normal(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng);

}  // namespace lcsac::nn
