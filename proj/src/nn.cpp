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
#include "lcsac/nn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lcsac/io.hpp"

namespace lcsac::nn {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw std::runtime_error(std::string("non-finite values in ") + what);
  }
}

}  // namespace

ParamTensor::ParamTensor(std::string name, Eigen::Index rows, Eigen::Index cols)
    : name(std::move(name)),
      value(Matrix::Zero(rows, cols)),
      grad(Matrix::Zero(rows, cols)) {}

void MLPSpec::validate() const {
  if (input_dim <= 0 || output_dim <= 0) {
    throw std::invalid_argument("MLPSpec: dimensions must be positive");
  }
  for (int h : hidden) {
    if (h <= 0) throw std::invalid_argument("MLPSpec: hidden sizes must be positive");
  }
  if (output_transform == OutputTransform::kTanhGaussianHead &&
      output_dim % 2 != 0) {
    throw std::invalid_argument("MLPSpec: Gaussian head needs an even output_dim");
  }
}

Mlp::Mlp(MLPSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::vector<int> dims;
  dims.push_back(spec_.input_dim);
  dims.insert(dims.end(), spec_.hidden.begin(), spec_.hidden.end());
  dims.push_back(spec_.output_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    weights_.emplace_back("W" + std::to_string(l), dims[l + 1], dims[l]);
    biases_.emplace_back("b" + std::to_string(l), dims[l + 1], 1);
  }
}

Mlp::Mlp(MLPSpec spec, std::mt19937_64& rng, double final_layer_scale)
    : Mlp(std::move(spec)) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(weights_[l].value.cols()));
    const double scale = (l + 1 == weights_.size()) ? final_layer_scale : 1.0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index c = 0; c < weights_[l].value.cols(); ++c) {
      for (Eigen::Index r = 0; r < weights_[l].value.rows(); ++r) {
        weights_[l].value(r, c) = scale * dist(rng);
      }
    }
    for (Eigen::Index r = 0; r < biases_[l].value.rows(); ++r) {
      biases_[l].value(r, 0) = scale * dist(rng);
    }
  }
}

Matrix Mlp::forward(const Matrix& input, Tape* tape) const {
  if (input.rows() != spec_.input_dim) {
    throw std::invalid_argument("Mlp::forward: expected input dimension " +
                                std::to_string(spec_.input_dim) + ", got " +
                                std::to_string(input.rows()));
  }
  require_finite(input, "network input");
  if (tape) {
    tape->inputs.clear();
    tape->pre.clear();
    tape->recorded = false;
  }
  Matrix h = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix a = weights_[l].value * h;
    a.colwise() += biases_[l].value.col(0);
    if (tape) tape->inputs.push_back(std::move(h));
    if (l + 1 < weights_.size()) {
      h = a.cwiseMax(0.0);
      if (tape) tape->pre.push_back(std::move(a));
    } else {
      h = std::move(a);
    }
  }
  require_finite(h, "network output");
  if (tape) tape->recorded = true;
  return h;
}

Matrix Mlp::backprop(const Tape& tape, const Matrix& upstream, bool accumulate) {
  if (!tape.recorded || tape.inputs.size() != weights_.size()) {
    throw std::logic_error("Mlp::backward called without a recorded forward pass");
  }
  const Eigen::Index batch = tape.inputs.front().cols();
  if (upstream.rows() != spec_.output_dim || upstream.cols() != batch) {
    throw std::invalid_argument("Mlp::backward: upstream gradient shape mismatch");
  }
  Matrix delta = upstream;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    if (accumulate) {
      weights_[l].grad.noalias() += delta * tape.inputs[l].transpose();
      biases_[l].grad += delta.rowwise().sum();
    }
    Matrix next = weights_[l].value.transpose() * delta;
    if (l > 0) {
      next = (tape.pre[l - 1].array() > 0.0).select(next, 0.0);
    }
    delta = std::move(next);
  }
  require_finite(delta, "input gradient");
  return delta;
}

Matrix Mlp::backward(const Tape& tape, const Matrix& upstream) {
  return backprop(tape, upstream, true);
}

Matrix Mlp::input_gradient(const Tape& tape, const Matrix& upstream) const {
  return const_cast<Mlp*>(this)->backprop(tape, upstream, false);
}

void Mlp::zero_grad() {
  for (auto& w : weights_) w.zero_grad();
  for (auto& b : biases_) b.zero_grad();
}

std::vector<ParamTensor*> Mlp::parameters() {
  std::vector<ParamTensor*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const ParamTensor*> Mlp::parameters() const {
  std::vector<const ParamTensor*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

void Mlp::copy_values_from(const Mlp& other) {
  if (other.weights_.size() != weights_.size()) {
    throw std::invalid_argument("Mlp::copy_values_from: layer count mismatch");
  }
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (other.weights_[l].value.rows() != weights_[l].value.rows() ||
        other.weights_[l].value.cols() != weights_[l].value.cols()) {
      throw std::invalid_argument("Mlp::copy_values_from: shape mismatch");
    }
    weights_[l].value = other.weights_[l].value;
    biases_[l].value = other.biases_[l].value;
  }
}

SquashedGaussianSample sample_squashed_gaussian(const Eigen::VectorXd& mean,
                                                const Eigen::VectorXd& log_std,
                                                const Eigen::VectorXd& noise) {
  if (mean.size() != log_std.size() || mean.size() != noise.size()) {
    throw std::invalid_argument("sample_squashed_gaussian: size mismatch");
  }
  Matrix head(2 * mean.size(), 1);
  head << mean, log_std;
  const SquashedGaussianBatch b = squashed_gaussian(head, noise);
  return {b.action.col(0), b.log_prob(0), b.pre_tanh.col(0)};
}

SquashedGaussianBatch squashed_gaussian(const Matrix& head_output,
                                        const Matrix& noise) {
  const Eigen::Index m = head_output.rows() / 2;
  if (head_output.rows() != 2 * m || noise.rows() != m ||
      noise.cols() != head_output.cols()) {
    throw std::invalid_argument("squashed_gaussian: shape mismatch");
  }
  SquashedGaussianBatch b;
  b.mean = head_output.topRows(m);
  const Matrix raw = head_output.bottomRows(m);
  b.log_std = raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  b.clamp_active =
      ((raw.array() >= kLogStdMin) && (raw.array() <= kLogStdMax)).cast<double>();
  b.noise = noise;
  const Matrix stddev = b.log_std.array().exp();
  b.pre_tanh = b.mean.array() + stddev.array() * noise.array();
  b.action = b.pre_tanh.array().tanh();
  const Eigen::ArrayXXd one_minus_a2 = 1.0 - b.action.array().square();
  const Eigen::ArrayXXd per_dim = -0.5 * noise.array().square() -
                                  b.log_std.array() - kHalfLog2Pi -
                                  (one_minus_a2 + kTanhEpsilon).log();
  b.log_prob = per_dim.colwise().sum().matrix();
  require_finite(b.log_prob, "policy log-probability");
  return b;
}

Matrix SquashedGaussianBatch::backward(const Matrix& d_action,
                                       const RowVector& d_log_prob) const {
  const Eigen::Index m = mean.rows();
  const Eigen::ArrayXXd a = action.array();
  const Eigen::ArrayXXd one_minus_a2 = 1.0 - a.square();
  // d/du of -log(1 - tanh(u)^2 + eps)
  const Eigen::ArrayXXd dcorr = 2.0 * a * one_minus_a2 / (one_minus_a2 + kTanhEpsilon);
  const Eigen::ArrayXXd dlp = d_log_prob.replicate(m, 1).array();
  const Eigen::ArrayXXd du = d_action.array() * one_minus_a2 + dlp * dcorr;

  Matrix d_head(2 * m, mean.cols());
  d_head.topRows(m) = du.matrix();
  const Eigen::ArrayXXd stddev = log_std.array().exp();
  d_head.bottomRows(m) =
      ((du * stddev * noise.array() - dlp) * clamp_active.array()).matrix();
  return d_head;
}

Matrix squashed_mean_action(const Matrix& head_output) {
  const Eigen::Index m = head_output.rows() / 2;
  return head_output.topRows(m).array().tanh();
}

void optimizer_step(std::span<ParamTensor* const> params, AdamState& state,
                    const AdamConfig& config) {
  for (const ParamTensor* p : params) {
    if (!p->grad.allFinite()) {
      throw std::runtime_error("optimizer_step: non-finite gradient in " + p->name);
    }
  }
  if (state.m.empty()) {
    for (const ParamTensor* p : params) {
      state.m.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      state.v.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("optimizer_step: parameter list changed");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamTensor& p = *params[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * p.grad;
    state.v[i] = config.beta2 * state.v[i] +
                 (1.0 - config.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= config.lr * (state.m[i].array() / bc1) /
                       ((state.v[i].array() / bc2).sqrt() + config.epsilon);
  }
}

nlohmann::json to_json(const Mlp& net) {
  nlohmann::json tensors = nlohmann::json::array();
  for (const ParamTensor* p : net.parameters()) {
    nlohmann::json t = io::matrix_to_json(p->value);
    t["name"] = p->name;
    tensors.push_back(std::move(t));
  }
  const MLPSpec& s = net.spec();
  return {{"format", "lcsac-mlp-v1"},
          {"spec",
           {{"input_dim", s.input_dim},
            {"hidden", s.hidden},
            {"output_dim", s.output_dim},
            {"output_transform",
             s.output_transform == OutputTransform::kTanhGaussianHead
                 ? "tanh_gaussian"
                 : "none"}}},
          {"tensors", tensors}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  const auto& js = j.at("spec");
  MLPSpec spec;
  spec.input_dim = js.at("input_dim").get<int>();
  spec.hidden = js.at("hidden").get<std::vector<int>>();
  spec.output_dim = js.at("output_dim").get<int>();
  spec.output_transform = js.value("output_transform", "none") == "tanh_gaussian"
                              ? OutputTransform::kTanhGaussianHead
                              : OutputTransform::kNone;
  Mlp net(spec);
  const auto& tensors = j.at("tensors");
  auto params = net.parameters();
  if (tensors.size() != params.size()) {
    throw std::runtime_error("mlp json: tensor count does not match spec");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix v = io::matrix_from_json(tensors[i]);
    if (v.rows() != params[i]->value.rows() || v.cols() != params[i]->value.cols()) {
      throw std::runtime_error("mlp json: shape mismatch for " + params[i]->name);
    }
    params[i]->value = std::move(v);
  }
  return net;
}

void save_mlp(const Mlp& net, const std::filesystem::path& path) {
  io::write_json_file(path, to_json(net));
}

Mlp load_mlp(const std::filesystem::path& path) {
  return mlp_from_json(io::read_json_file(path));
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) out(r, c) = normal(rng);
  }
  return out;
}

}  // namespace lcsac::nn
