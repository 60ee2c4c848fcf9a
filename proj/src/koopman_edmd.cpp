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
#include "lcsac/koopman_edmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/QR>

#include "lcsac/io.hpp"

namespace lcsac::koopman {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int nearest(const std::vector<Eigen::VectorXd>& centers,
            const Eigen::VectorXd& p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(centers.size()); ++c) {
    const double d = (p - centers[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

void Dictionary::validate() const {
  if (n_state <= 0) throw std::invalid_argument("Dictionary: n_state <= 0");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("Dictionary: bandwidth must be positive");
  }
  for (const auto& c : centers) {
    if (c.size() != n_state || !c.allFinite()) {
      throw std::invalid_argument("Dictionary: bad RBF center");
    }
  }
}

void EDMDDataset::validate() const {
  if (samples.empty()) throw std::invalid_argument("EDMD dataset is empty");
  for (const auto& s : samples) {
    if (!s.e.allFinite() || !s.u.allFinite() || !s.e_next.allFinite()) {
      throw std::invalid_argument("EDMD dataset contains non-finite values");
    }
  }
}

void LiftedModel::validate() const {
  dictionary.validate();
  const int n = dictionary.n_lift();
  if (A.rows() != n || A.cols() != n || B.rows() != n ||
      C.rows() != dictionary.n_state || C.cols() != n) {
    throw std::invalid_argument("LiftedModel: inconsistent dimensions");
  }
  if (!A.allFinite() || !B.allFinite() || !C.allFinite()) {
    throw std::invalid_argument("LiftedModel: non-finite entries");
  }
}

std::vector<Eigen::VectorXd> kmeans(const std::vector<Eigen::VectorXd>& points,
                                    int k, std::uint64_t seed, int max_iter) {
  if (k < 0) throw std::invalid_argument("kmeans: k < 0");
  if (k == 0) return {};
  if (static_cast<std::size_t>(k) > points.size()) {
    throw std::invalid_argument("kmeans: more clusters than points");
  }
  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);

  // k-means++ seeding.
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(k);
  centers.push_back(points[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = (points[i] - centers[0]).squaredNorm();
  }
  while (static_cast<int>(centers.size()) < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick + 1 < n; ++pick) {
        r -= d2[pick];
        if (r < 0.0) break;
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points[i] - centers.back()).squaredNorm());
    }
  }

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest(centers, points[i]);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    const Eigen::Index dim = points[0].size();
    std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(dim));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[assign[i]] += points[i];
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      // An empty cluster keeps its previous center.
      if (counts[c] > 0) centers[c] = sums[c] / static_cast<double>(counts[c]);
    }
  }
  return centers;
}

Dictionary build_dictionary(const EDMDDataset& dataset, int n_rbf,
                            std::optional<double> bandwidth,
                            std::uint64_t seed) {
  if (dataset.empty()) {
    throw std::invalid_argument("build_dictionary: empty dataset");
  }
  if (n_rbf < 0) throw std::invalid_argument("build_dictionary: n_rbf < 0");
  if (static_cast<std::size_t>(n_rbf) > dataset.size()) {
    throw std::invalid_argument(
        "build_dictionary: n_rbf exceeds the number of samples");
  }
  Dictionary dict;
  dict.n_state = static_cast<int>(dataset.samples.front().e.size());
  if (n_rbf == 0) {
    dict.bandwidth = bandwidth.value_or(1.0);
    dict.validate();
    return dict;
  }

  std::vector<Eigen::VectorXd> points;
  points.reserve(dataset.size());
  for (const auto& s : dataset.samples) points.emplace_back(s.e);
  dict.centers = kmeans(points, n_rbf, seed);

  if (bandwidth) {
    dict.bandwidth = *bandwidth;
  } else {
    std::vector<double> dists;
    for (std::size_t i = 0; i < dict.centers.size(); ++i) {
      for (std::size_t j = i + 1; j < dict.centers.size(); ++j) {
        dists.push_back((dict.centers[i] - dict.centers[j]).norm());
      }
    }
    if (dists.empty()) {
      // Single center: median distance from the data to it.
      for (const auto& p : points) dists.push_back((p - dict.centers[0]).norm());
    }
    dict.bandwidth = median(std::move(dists));
    if (!(dict.bandwidth > 0.0)) dict.bandwidth = 1.0;
  }
  dict.validate();
  return dict;
}

Eigen::VectorXd lift(const Dictionary& dict, const Eigen::VectorXd& e) {
  if (e.size() != dict.n_state) {
    throw std::invalid_argument("lift: state dimension mismatch");
  }
  Eigen::VectorXd z(dict.n_lift());
  z.head(dict.n_state) = e;
  const double inv = 1.0 / (2.0 * dict.bandwidth * dict.bandwidth);
  for (int i = 0; i < dict.n_rbf(); ++i) {
    z(dict.n_state + i) = std::exp(-(e - dict.centers[i]).squaredNorm() * inv);
  }
  return z;
}

LiftedModel fit_edmd(const EDMDDataset& dataset, const Dictionary& dict,
                     double tikhonov) {
  dataset.validate();
  dict.validate();
  if (!(tikhonov >= 0.0)) {
    throw std::invalid_argument("fit_edmd: tikhonov must be >= 0");
  }
  const int n_lift = dict.n_lift();
  const int m = static_cast<int>(dataset.samples.front().u.size());
  const Eigen::Index rows = static_cast<Eigen::Index>(dataset.size());
  const Eigen::Index cols = n_lift + m;
  if (rows < cols) {
    throw std::invalid_argument(
        "fit_edmd: fewer samples than regressor columns");
  }

  Eigen::MatrixXd phi(rows, cols);
  Eigen::MatrixXd target(rows, n_lift);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& s = dataset.samples[static_cast<std::size_t>(i)];
    phi.row(i).head(n_lift) = lift(dict, s.e).transpose();
    phi.row(i).tail(m) = s.u.transpose();
    target.row(i) = lift(dict, s.e_next).transpose();
  }

  Eigen::MatrixXd weights;  // cols x n_lift, so [A B] = weights^T
  if (tikhonov > 0.0) {
    Eigen::MatrixXd aug(rows + cols, cols);
    aug.topRows(rows) = phi;
    aug.bottomRows(cols) =
        std::sqrt(tikhonov) * Eigen::MatrixXd::Identity(cols, cols);
    Eigen::MatrixXd aug_rhs = Eigen::MatrixXd::Zero(rows + cols, n_lift);
    aug_rhs.topRows(rows) = target;
    weights = aug.householderQr().solve(aug_rhs);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
    if (qr.rank() < cols) {
      throw std::invalid_argument(
          "fit_edmd: regressor is rank deficient; use tikhonov > 0");
    }
    weights = qr.solve(target);
  }

  LiftedModel model;
  model.A = weights.topRows(n_lift).transpose();
  model.B = weights.bottomRows(m).transpose();
  model.C = Eigen::MatrixXd::Zero(dict.n_state, n_lift);
  model.C.leftCols(dict.n_state).setIdentity();
  model.dictionary = dict;
  model.fit_report.residual_norm = (phi * weights - target).norm();
  model.fit_report.dataset_size = dataset.size();
  model.fit_report.tikhonov = tikhonov;
  model.validate();
  return model;
}

Eigen::VectorXd predict_one_step(const LiftedModel& model,
                                 const Eigen::VectorXd& z,
                                 const Eigen::VectorXd& u) {
  if (z.size() != model.A.cols() || u.size() != model.B.cols()) {
    throw std::invalid_argument("predict_one_step: dimension mismatch");
  }
  return model.A * z + model.B * u;
}

ValidationReport validate_model(const LiftedModel& model,
                                const EDMDDataset& heldout, int horizon) {
  if (heldout.empty()) {
    throw std::invalid_argument("validate_model: empty held-out set");
  }
  const int ns = model.dictionary.n_state;
  ValidationReport report;
  report.horizon = horizon;
  report.n_samples = heldout.size();

  Eigen::VectorXd sq = Eigen::VectorXd::Zero(ns);
  for (const auto& s : heldout.samples) {
    const Eigen::VectorXd pred =
        model.C * predict_one_step(model, lift(model.dictionary, s.e), s.u);
    sq += (pred - s.e_next).cwiseAbs2();
  }
  report.one_step_rmse = (sq / static_cast<double>(heldout.size())).cwiseSqrt();

  Eigen::VectorXd msq = Eigen::VectorXd::Zero(ns);
  std::size_t count = 0;
  const auto& xs = heldout.samples;
  std::size_t i = 0;
  while (horizon > 0 && i + static_cast<std::size_t>(horizon) <= xs.size()) {
    bool chained = true;
    for (int k = 1; k < horizon && chained; ++k) {
      chained = xs[i + k].e == xs[i + k - 1].e_next;
    }
    if (!chained) {
      ++i;
      continue;
    }
    Eigen::VectorXd z = lift(model.dictionary, xs[i].e);
    for (int k = 0; k < horizon; ++k) {
      z = predict_one_step(model, z, xs[i + k].u);
      msq += (model.C * z - xs[i + k].e_next).cwiseAbs2();
      ++count;
    }
    ++report.n_windows;
    i += horizon;
  }
  if (count > 0) {
    report.multi_step_rmse = (msq / static_cast<double>(count)).cwiseSqrt();
  } else {
    report.multi_step_rmse =
        Eigen::VectorXd::Constant(ns, std::numeric_limits<double>::quiet_NaN());
  }
  return report;
}

std::pair<EDMDDataset, EDMDDataset> split_dataset(const EDMDDataset& dataset,
                                                  double train_fraction,
                                                  std::uint64_t seed,
                                                  std::size_t block_size) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split_dataset: train_fraction in (0,1)");
  }
  if (block_size == 0) block_size = 1;
  const std::size_t n_blocks = (dataset.size() + block_size - 1) / block_size;
  if (n_blocks < 2) {
    throw std::invalid_argument("split_dataset: dataset too small to split");
  }
  std::vector<std::size_t> order(n_blocks);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::size_t n_test = static_cast<std::size_t>(
      std::llround((1.0 - train_fraction) * static_cast<double>(n_blocks)));
  n_test = std::clamp<std::size_t>(n_test, 1, n_blocks - 1);
  std::vector<bool> is_test(n_blocks, false);
  for (std::size_t b = 0; b < n_test; ++b) is_test[order[b]] = true;

  EDMDDataset train;
  EDMDDataset test;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t lo = b * block_size;
    const std::size_t hi = std::min(dataset.size(), lo + block_size);
    auto& dst = is_test[b] ? test : train;
    dst.samples.insert(dst.samples.end(), dataset.samples.begin() + lo,
                       dataset.samples.begin() + hi);
  }
  return {std::move(train), std::move(test)};
}

void save_dataset_csv(const EDMDDataset& dataset,
                      const std::filesystem::path& path) {
  std::ostringstream out;
  out << "e1,e2,e3,e4,e5,e6,u1,u2,"
         "e1_next,e2_next,e3_next,e4_next,e5_next,e6_next\n";
  for (const auto& s : dataset.samples) {
    for (int i = 0; i < s.e.size(); ++i) out << io::format_double(s.e(i)) << ',';
    for (int i = 0; i < s.u.size(); ++i) out << io::format_double(s.u(i)) << ',';
    for (int i = 0; i < s.e_next.size(); ++i) {
      out << io::format_double(s.e_next(i))
          << (i + 1 < s.e_next.size() ? ',' : '\n');
    }
  }
  io::write_text_file(path, out.str());
}

EDMDDataset load_dataset_csv(const std::filesystem::path& path) {
  std::istringstream in(io::read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("dataset csv is empty: " + path.string());
  }
  EDMDDataset ds;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = io::split_csv_line(line);
    if (cells.size() != 14) {
      throw std::runtime_error("dataset csv line " + std::to_string(line_no) +
                               ": expected 14 columns");
    }
    EDMDSample s;
    for (int i = 0; i < 6; ++i) s.e(i) = io::parse_double(cells[i]);
    for (int i = 0; i < 2; ++i) s.u(i) = io::parse_double(cells[6 + i]);
    for (int i = 0; i < 6; ++i) s.e_next(i) = io::parse_double(cells[8 + i]);
    ds.samples.push_back(s);
  }
  return ds;
}

nlohmann::json to_json(const Dictionary& dict) {
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : dict.centers) {
    centers.push_back(std::vector<double>(c.data(), c.data() + c.size()));
  }
  return {{"n_state", dict.n_state},
          {"bandwidth", dict.bandwidth},
          {"centers", centers}};
}

Dictionary dictionary_from_json(const nlohmann::json& j) {
  Dictionary d;
  d.n_state = j.at("n_state").get<int>();
  d.bandwidth = j.at("bandwidth").get<double>();
  for (const auto& c : j.at("centers")) {
    const auto v = c.get<std::vector<double>>();
    d.centers.emplace_back(
        Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  d.validate();
  return d;
}

nlohmann::json to_json(const LiftedModel& model) {
  return {{"format", "lcsac-lifted-model-v1"},
          {"n_lift", model.n_lift()},
          {"n_input", model.n_input()},
          {"A", io::matrix_to_json(model.A)},
          {"B", io::matrix_to_json(model.B)},
          {"C", io::matrix_to_json(model.C)},
          {"dictionary", to_json(model.dictionary)},
          {"fit_report",
           {{"residual_norm", model.fit_report.residual_norm},
            {"dataset_size", model.fit_report.dataset_size},
            {"tikhonov", model.fit_report.tikhonov}}},
          {"config_hash", model.config_hash}};
}

LiftedModel model_from_json(const nlohmann::json& j) {
  LiftedModel m;
  m.A = io::matrix_from_json(j.at("A"));
  m.B = io::matrix_from_json(j.at("B"));
  m.C = io::matrix_from_json(j.at("C"));
  m.dictionary = dictionary_from_json(j.at("dictionary"));
  const auto& fr = j.at("fit_report");
  m.fit_report.residual_norm = fr.at("residual_norm").get<double>();
  m.fit_report.dataset_size = fr.at("dataset_size").get<std::size_t>();
  m.fit_report.tikhonov = fr.at("tikhonov").get<double>();
  m.config_hash = j.value("config_hash", "");
  m.validate();
  return m;
}

void save_model(const LiftedModel& model, const std::filesystem::path& path) {
  io::write_json_file(path, to_json(model));
}

LiftedModel load_model(const std::filesystem::path& path) {
  return model_from_json(io::read_json_file(path));
}

std::string model_hash(const LiftedModel& model) {
  nlohmann::json j = {{"A", io::matrix_to_json(model.A)},
                      {"B", io::matrix_to_json(model.B)},
                      {"dictionary", to_json(model.dictionary)}};
  return io::fnv1a_hex(j.dump());
}

}  // namespace lcsac::koopman
