// Copyright 2026 The infolab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Feed-forward ReLU classifier with a softmax output, trained by mini-batch
// SGD with momentum on samples from a histogram model.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infolab/encoders.hpp"
#include "infolab/infocalc.hpp"
#include "infolab/model.hpp"

namespace infolab {

struct MLPArch {
  std::string name;
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t classes = 0;

  // mlp32: one hidden layer of 32; mlp256 and mlp1024: two hidden layers.
  static MLPArch preset(const std::string& name, std::size_t input_dim, std::size_t classes);
};

struct DenseLayer {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;
};

struct MLPParams {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return static_cast<std::size_t>(layers.front().w.cols()); }
  std::size_t classes() const { return static_cast<std::size_t>(layers.back().w.rows()); }
  std::size_t parameter_count() const;
};

// Zero weights and biases (uniform output).
MLPParams zero_params(const MLPArch& arch);

// He-style uniform initialization, bound sqrt(6 / fan_in); zero biases.
MLPParams init_params(const MLPArch& arch, std::uint64_t seed);

// Columns of x are samples; returns classes x batch softmax probabilities.
Eigen::MatrixXd forward_batch(const MLPParams& params, const Eigen::MatrixXd& x);

std::vector<double> forward(const MLPParams& params, std::span<const double> x);

// Mean natural-log cross-entropy over the batch; fills grad when non-null.
double loss_and_gradient(const MLPParams& params, const Eigen::MatrixXd& x,
                         std::span<const int> y, MLPParams* grad);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t samples_used = 0;
};

// Central differences with step 1e-5 on a random subset of parameters.
// Samples with a hidden pre-activation within kink_margin of zero are
// dropped first, so the loss is smooth under the perturbation.
GradCheckResult grad_check(const MLPParams& params, const Eigen::MatrixXd& x,
                           std::span<const int> y, std::size_t max_checks = 200,
                           std::uint64_t seed = 0, double kink_margin = 1e-3);

struct TrainConfig {
  double learning_rate = 1e-2;
  double momentum = 0.97;
  std::size_t batch_size = 0;  // 0: pick from the data length
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  std::size_t validation_size = 100000;
  std::optional<Encoder> pre_encoder;
};

// Batch-size rule keyed to the data lengths of the study.
std::size_t scheduled_batch_size(std::size_t n);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss_bits = 0.0;
  double val_risk_bits = 0.0;
  double val_se_bits = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  MLPParams params;
};

TrainHistory train(const HistogramModel& model, std::size_t n, const MLPArch& arch,
                   const TrainConfig& config);

// Predictor for mc_risk / mc_gap: optional pre-encoder, then the network.
BatchPredictor network_predictor(const MLPParams& params, std::optional<Encoder> pre_encoder);

struct GapReport {
  Estimate gap;   // D(mu_{Y|X} || v | mu_X)
  Estimate risk;  // cross-entropy risk on the same samples
  // Exact I(X;Y|pre(X)) when a pre-encoder is present; the remainder of the
  // gap is then the decoder effect relative to U = pre(X).
  std::optional<double> encoder_effect;
};

GapReport evaluate_gap(const HistogramModel& model, const MLPParams& params,
                       const std::optional<Encoder>& pre_encoder, std::size_t n_mc,
                       std::uint64_t seed);

// splitmix64 step, used to derive independent stream seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace infolab
