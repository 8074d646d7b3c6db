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

#include "infolab/learner.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "infolab/error.hpp"
#include "infolab/harness.hpp"
#include "infolab/model_io.hpp"
#include "support/random_models.hpp"

namespace infolab {
namespace {

Eigen::MatrixXd random_inputs(testing::Rng& rng, std::size_t dim, std::size_t n) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = testing::unit(rng) * 2.0 - 1.0;
  }
  return x;
}

std::vector<int> random_labels(testing::Rng& rng, std::size_t classes, std::size_t n) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(testing::pick(rng, 0, classes - 1));
  return y;
}

TEST(Arch, Presets) {
  EXPECT_EQ(MLPArch::preset("mlp32", 15, 3).hidden, std::vector<std::size_t>({32}));
  EXPECT_EQ(MLPArch::preset("mlp256", 15, 3).hidden, std::vector<std::size_t>({256, 256}));
  EXPECT_EQ(MLPArch::preset("mlp1024", 5, 3).hidden, std::vector<std::size_t>({1024, 1024}));
  EXPECT_THROW(MLPArch::preset("mlp7", 5, 3), Error);
  const auto p = init_params(MLPArch::preset("mlp32", 5, 3), 1);
  EXPECT_EQ(p.parameter_count(), 5u * 32 + 32 + 32 * 3 + 3);
}

TEST(Forward, ZeroParamsGiveUniformOutput) {
  const auto arch = MLPArch::preset("mlp32", 4, 3);
  const auto p = zero_params(arch);
  testing::Rng rng(1);
  const auto x = random_inputs(rng, 4, 50);
  const auto out = forward_batch(p, x);
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(out(k, j), 1.0 / 3.0, 1e-15);
  }
  const auto y = random_labels(rng, 3, 50);
  EXPECT_NEAR(loss_and_gradient(p, x, y, nullptr), std::log(3.0), 1e-12);
}

TEST(Forward, HandComputedNetwork) {
  MLPParams p;
  DenseLayer h{Eigen::MatrixXd(2, 2), Eigen::VectorXd(2)};
  h.w << 1.0, -1.0, 0.5, 2.0;
  h.b << 0.0, -1.0;
  DenseLayer o{Eigen::MatrixXd(2, 2), Eigen::VectorXd(2)};
  o.w << 1.0, 0.0, -1.0, 1.0;
  o.b << 0.25, 0.0;
  p.layers = {h, o};
  // x = (1, 0.5): pre = (0.5, 0.5 + 1 - 1) = (0.5, 0.5); relu same.
  // logits = (0.5 + 0.25, -0.5 + 0.5) = (0.75, 0).
  const std::vector<double> x{1.0, 0.5};
  const auto out = forward(p, x);
  const double e = std::exp(0.75);
  EXPECT_NEAR(out[0], e / (e + 1.0), 1e-15);
  EXPECT_NEAR(out[1], 1.0 / (e + 1.0), 1e-15);
  // x = (-1, 0): pre = (-1, -1.5) -> relu 0; logits = (0.25, 0).
  const auto out2 = forward(p, std::vector<double>{-1.0, 0.0});
  const double e2 = std::exp(0.25);
  EXPECT_NEAR(out2[0], e2 / (e2 + 1.0), 1e-15);
}

TEST(Forward, SoftmaxStableForLargeLogits) {
  MLPParams p;
  DenseLayer o{Eigen::MatrixXd::Zero(3, 1), Eigen::VectorXd(3)};
  o.b << 1000.0, 999.0, -1000.0;
  p.layers = {o};
  const auto out = forward(p, std::vector<double>{0.0});
  EXPECT_NEAR(out[0] + out[1] + out[2], 1.0, 1e-15);
  EXPECT_NEAR(out[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
  EXPECT_TRUE(std::isfinite(loss_and_gradient(p, Eigen::MatrixXd::Zero(1, 1),
                                              std::vector<int>{2}, nullptr)));
}

TEST(Gradient, MatchesCentralDifferences) {
  testing::Rng rng(5);
  for (const char* name : {"mlp32", "mlp256"}) {
    const auto arch = MLPArch::preset(name, 6, 3);
    const auto p = init_params(arch, 11);
    const auto x = random_inputs(rng, 6, 64);
    const auto y = random_labels(rng, 3, 64);
    const auto r = grad_check(p, x, y, 300, 3);
    EXPECT_GT(r.checked, 100u) << name;
    EXPECT_GT(r.samples_used, 0u) << name;
    EXPECT_LT(r.max_rel_error, 1e-4) << name;
  }
}

TEST(Gradient, ZeroParamsHaveZeroHiddenGradient) {
  const auto arch = MLPArch::preset("mlp32", 3, 3);
  const auto p = zero_params(arch);
  testing::Rng rng(8);
  const auto x = random_inputs(rng, 3, 30);
  // One sample per class: the output-bias gradient vanishes too.
  std::vector<int> y(30);
  for (int i = 0; i < 30; ++i) y[static_cast<std::size_t>(i)] = i % 3;
  MLPParams g;
  loss_and_gradient(p, x, y, &g);
  EXPECT_EQ(g.layers[0].w.norm(), 0.0);
  EXPECT_EQ(g.layers[1].w.norm(), 0.0);
  EXPECT_NEAR(g.layers[1].b.norm(), 0.0, 1e-15);
}

TEST(Train, BatchSchedule) {
  EXPECT_EQ(scheduled_batch_size(2780), 44u);
  EXPECT_EQ(scheduled_batch_size(21500), 344u);
  EXPECT_EQ(scheduled_batch_size(59900), 512u);
  EXPECT_EQ(scheduled_batch_size(464000), 512u);
  EXPECT_EQ(scheduled_batch_size(1290000), 1024u);
  EXPECT_EQ(scheduled_batch_size(10), 10u);
  EXPECT_EQ(scheduled_batch_size(5000000), 1024u);
  EXPECT_THROW(scheduled_batch_size(0), Error);
}

TEST(Train, FullBatchStepIsPlainGradientDescent) {
  const auto m = builtin_model("2d-demonstration");
  const auto arch = MLPArch::preset("mlp32", 2, m.classes());
  TrainConfig cfg;
  cfg.seed = 9;
  cfg.epochs = 1;
  cfg.batch_size = 200;
  cfg.learning_rate = 0.05;
  cfg.validation_size = 100;
  const auto hist = train(m, 200, arch, cfg);

  const Dataset data = sample(m, derive_seed(9, 1), 200);
  Eigen::MatrixXd x(2, 200);
  for (std::size_t i = 0; i < 200; ++i) {
    x(0, static_cast<Eigen::Index>(i)) = data.x[2 * i];
    x(1, static_cast<Eigen::Index>(i)) = data.x[2 * i + 1];
  }
  auto expected = init_params(arch, derive_seed(9, 0));
  MLPParams g;
  const double loss = loss_and_gradient(expected, x, data.y, &g);
  for (std::size_t l = 0; l < expected.layers.size(); ++l) {
    expected.layers[l].w -= 0.05 * g.layers[l].w;
    expected.layers[l].b -= 0.05 * g.layers[l].b;
    EXPECT_LT((hist.params.layers[l].w - expected.layers[l].w).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((hist.params.layers[l].b - expected.layers[l].b).cwiseAbs().maxCoeff(), 1e-12);
  }
  ASSERT_EQ(hist.epochs.size(), 1u);
  EXPECT_NEAR(hist.epochs[0].train_loss_bits, loss / std::log(2.0), 1e-12);
}

TEST(Train, DeterministicAndLearns) {
  const auto m = builtin_model("2d-singular");
  const auto arch = MLPArch::preset("mlp32", 2, 2);
  TrainConfig cfg;
  cfg.seed = 4;
  cfg.epochs = 15;
  cfg.validation_size = 5000;
  const auto a = train(m, 4000, arch, cfg);
  const auto b = train(m, 4000, arch, cfg);
  ASSERT_EQ(a.epochs.size(), 15u);
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    EXPECT_EQ(a.epochs[e].val_risk_bits, b.epochs[e].val_risk_bits);
    EXPECT_EQ(a.epochs[e].train_loss_bits, b.epochs[e].train_loss_bits);
  }
  // H(Y|X) = 0 here; the XOR pattern should be mostly learned.
  EXPECT_LT(a.epochs.back().val_risk_bits, 0.3);
  EXPECT_LT(a.epochs.back().val_risk_bits, a.epochs.front().val_risk_bits);
}

TEST(Train, RejectsBadConfig) {
  const auto m = builtin_model("2d-singular");
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train(m, 100, MLPArch::preset("mlp32", 2, 2), cfg), Error);
  cfg.learning_rate = 0.01;
  try {
    train(m, 100, MLPArch::preset("mlp32", 3, 2), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(Gap, RiskMinusGapEstimatesConditionalEntropy) {
  const auto m = builtin_model("2d-demonstration");
  const auto arch = MLPArch::preset("mlp32", 2, m.classes());
  const auto p = init_params(arch, 3);
  const auto r = evaluate_gap(m, p, std::nullopt, 200000, 77);
  EXPECT_GE(r.gap.value, 0.0);
  const double tol = 4.0 * (r.gap.std_error + r.risk.std_error);
  EXPECT_NEAR(r.risk.value - r.gap.value, conditional_entropy(m), tol);
  EXPECT_FALSE(r.encoder_effect.has_value());
}

TEST(Gap, SelectorPreEncoderLosesNothingOnStudy) {
  const auto m = builtin_model("study");
  const auto pre = study_pre_encoder();
  const auto arch = MLPArch::preset("mlp32", 5, m.classes());
  const auto p = init_params(arch, 1);
  const auto r = evaluate_gap(m, p, pre, 2000, 5);
  ASSERT_TRUE(r.encoder_effect.has_value());
  EXPECT_NEAR(*r.encoder_effect, 0.0, 1e-12);
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(1, 0), derive_seed(1, 0));
}

}  // namespace
}  // namespace infolab
