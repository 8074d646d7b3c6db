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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <random>
#include <utility>

#include "infolab/error.hpp"

namespace infolab {
namespace {

constexpr double kLn2 = 0.69314718055994530942;

void check_arch(const MLPArch& arch) {
  if (arch.input_dim == 0 || arch.classes < 2) {
    throw Error(ErrorCode::kShapeMismatch, "MLP needs input_dim >= 1 and at least 2 classes");
  }
  for (std::size_t w : arch.hidden) {
    if (w == 0) throw Error(ErrorCode::kShapeMismatch, "hidden width must be positive");
  }
}

std::vector<std::size_t> layer_sizes(const MLPArch& arch) {
  std::vector<std::size_t> sizes{arch.input_dim};
  sizes.insert(sizes.end(), arch.hidden.begin(), arch.hidden.end());
  sizes.push_back(arch.classes);
  return sizes;
}

// Column-wise softmax in place.
void softmax_columns(Eigen::MatrixXd& z) {
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    auto col = z.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer
  std::vector<Eigen::MatrixXd> act;   // act[0] = input, act[l+1] = relu(pre[l])
};

Eigen::MatrixXd run_forward(const MLPParams& params, const Eigen::MatrixXd& x,
                            ForwardCache* cache) {
  if (params.layers.empty() ||
      static_cast<std::size_t>(x.rows()) != params.input_dim()) {
    throw Error(ErrorCode::kShapeMismatch, "input rows do not match the network input size");
  }
  Eigen::MatrixXd a = x;
  if (cache) cache->act.push_back(x);
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    Eigen::MatrixXd z = layer.w * a;
    z.colwise() += layer.b;
    if (l == last) {
      if (cache) cache->pre.push_back(z);
      softmax_columns(z);
      return z;
    }
    if (cache) cache->pre.push_back(z);
    a = z.cwiseMax(0.0);
    if (cache) cache->act.push_back(a);
  }
  return a;  // unreachable
}

Eigen::MatrixXd features(const std::vector<double>& xs, std::size_t rows, std::size_t dim,
                         const std::optional<Encoder>& pre) {
  if (!pre) {
    return Eigen::Map<const Eigen::MatrixXd>(xs.data(), static_cast<Eigen::Index>(dim),
                                             static_cast<Eigen::Index>(rows));
  }
  Eigen::MatrixXd out;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<double> f =
        apply_continuous(*pre, std::span<const double>(xs.data() + r * dim, dim));
    if (r == 0) out.resize(static_cast<Eigen::Index>(f.size()), static_cast<Eigen::Index>(rows));
    out.col(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
  }
  return out;
}

double* param_ref(MLPParams& p, std::size_t flat) {
  for (DenseLayer& layer : p.layers) {
    const auto nw = static_cast<std::size_t>(layer.w.size());
    if (flat < nw) return layer.w.data() + flat;
    flat -= nw;
    const auto nb = static_cast<std::size_t>(layer.b.size());
    if (flat < nb) return layer.b.data() + flat;
    flat -= nb;
  }
  return nullptr;
}

}  // namespace

MLPArch MLPArch::preset(const std::string& name, std::size_t input_dim, std::size_t classes) {
  MLPArch a;
  a.name = name;
  a.input_dim = input_dim;
  a.classes = classes;
  if (name == "mlp32") {
    a.hidden = {32};
  } else if (name == "mlp256") {
    a.hidden = {256, 256};
  } else if (name == "mlp1024") {
    a.hidden = {1024, 1024};
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown architecture '" + name + "'");
  }
  return a;
}

std::size_t MLPParams::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) n += static_cast<std::size_t>(l.w.size() + l.b.size());
  return n;
}

MLPParams zero_params(const MLPArch& arch) {
  check_arch(arch);
  const auto sizes = layer_sizes(arch);
  MLPParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sizes[l + 1]),
                                    static_cast<Eigen::Index>(sizes[l]));
    layer.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sizes[l + 1]));
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MLPParams init_params(const MLPArch& arch, std::uint64_t seed) {
  MLPParams p = zero_params(arch);
  std::mt19937_64 rng(seed);
  for (DenseLayer& layer : p.layers) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.w.cols()));
    for (Eigen::Index i = 0; i < layer.w.size(); ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      layer.w.data()[i] = (2.0 * u - 1.0) * bound;
    }
  }
  return p;
}

Eigen::MatrixXd forward_batch(const MLPParams& params, const Eigen::MatrixXd& x) {
  return run_forward(params, x, nullptr);
}

std::vector<double> forward(const MLPParams& params, std::span<const double> x) {
  Eigen::MatrixXd col =
      Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::MatrixXd p = run_forward(params, col, nullptr);
  return std::vector<double>(p.data(), p.data() + p.size());
}

double loss_and_gradient(const MLPParams& params, const Eigen::MatrixXd& x,
                         std::span<const int> y, MLPParams* grad) {
  if (static_cast<std::size_t>(x.cols()) != y.size() || y.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "batch inputs and labels disagree in size");
  }
  ForwardCache cache;
  Eigen::MatrixXd prob = run_forward(params, x, &cache);
  const auto batch = static_cast<double>(y.size());
  const auto classes = static_cast<int>(prob.rows());
  // Log-sum-exp on the logits, so a saturated softmax still gives a finite loss.
  const Eigen::MatrixXd& logits = cache.pre.back();
  double loss = 0.0;
  for (std::size_t c = 0; c < y.size(); ++c) {
    if (y[c] < 0 || y[c] >= classes) {
      throw Error(ErrorCode::kIndexOutOfRange, "label outside the class range");
    }
    const auto col = logits.col(static_cast<Eigen::Index>(c));
    const double top = col.maxCoeff();
    loss += top + std::log((col.array() - top).exp().sum()) - col(y[c]);
  }
  loss /= batch;
  if (!grad) return loss;

  grad->layers.resize(params.layers.size());
  Eigen::MatrixXd delta = std::move(prob);
  for (std::size_t c = 0; c < y.size(); ++c) delta(y[c], static_cast<Eigen::Index>(c)) -= 1.0;
  delta /= batch;
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    grad->layers[l].w.noalias() = delta * cache.act[l].transpose();
    grad->layers[l].b = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = params.layers[l].w.transpose() * delta;
    delta = back.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return loss;
}

GradCheckResult grad_check(const MLPParams& params, const Eigen::MatrixXd& x,
                           std::span<const int> y, std::size_t max_checks, std::uint64_t seed,
                           double kink_margin) {
  if (y.empty()) throw Error(ErrorCode::kInvalidCount, "grad_check needs a non-empty batch");
  ForwardCache cache;
  run_forward(params, x, &cache);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    bool smooth = true;
    for (std::size_t l = 0; l + 1 < cache.pre.size() && smooth; ++l) {
      smooth = cache.pre[l].col(c).cwiseAbs().minCoeff() >= kink_margin;
    }
    if (smooth) keep.push_back(c);
  }
  GradCheckResult result;
  result.samples_used = keep.size();
  if (keep.empty()) return result;
  Eigen::MatrixXd xs(x.rows(), static_cast<Eigen::Index>(keep.size()));
  std::vector<int> ys;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    xs.col(static_cast<Eigen::Index>(k)) = x.col(keep[k]);
    ys.push_back(y[static_cast<std::size_t>(keep[k])]);
  }

  MLPParams grad;
  loss_and_gradient(params, xs, ys, &grad);
  const std::size_t total = params.parameter_count();
  std::vector<std::size_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = i;
  if (total > max_checks) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < max_checks; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, total - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(max_checks);
  }
  constexpr double h = 1e-5;
  MLPParams probe = params;
  for (std::size_t flat : idx) {
    double* v = param_ref(probe, flat);
    const double saved = *v;
    *v = saved + h;
    const double up = loss_and_gradient(probe, xs, ys, nullptr);
    *v = saved - h;
    const double down = loss_and_gradient(probe, xs, ys, nullptr);
    *v = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = *param_ref(grad, flat);
    const double rel =
        std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-7);
    result.max_rel_error = std::max(result.max_rel_error, rel);
    ++result.checked;
  }
  return result;
}

std::size_t scheduled_batch_size(std::size_t n) {
  static const std::pair<double, std::size_t> kTable[] = {
      {2.78e3, 44}, {2.15e4, 344}, {5.99e4, 512}, {4.64e5, 512}, {1.29e6, 1024}};
  if (n == 0) throw Error(ErrorCode::kInvalidCount, "data length must be positive");
  const double ln = std::log(static_cast<double>(n));
  std::size_t best = kTable[0].second;
  double best_d = kInfinity;
  for (const auto& [len, batch] : kTable) {
    const double d = std::abs(std::log(len) - ln);
    if (d < best_d) {
      best_d = d;
      best = batch;
    }
  }
  return std::min(best, n);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

BatchPredictor network_predictor(const MLPParams& params, std::optional<Encoder> pre_encoder) {
  auto shared = std::make_shared<const MLPParams>(params);
  return [shared, pre = std::move(pre_encoder)](std::span<const double> xs, std::size_t rows,
                                                std::span<double> out) {
    if (rows == 0) return;
    const std::size_t dim = xs.size() / rows;
    std::vector<double> copy(xs.begin(), xs.end());
    Eigen::MatrixXd p = run_forward(*shared, features(copy, rows, dim, pre), nullptr);
    // p is classes x rows column-major, i.e. rows x classes row-major.
    std::memcpy(out.data(), p.data(), sizeof(double) * static_cast<std::size_t>(p.size()));
  };
}

TrainHistory train(const HistogramModel& model, std::size_t n, const MLPArch& arch,
                   const TrainConfig& config) {
  if (!(config.learning_rate > 0.0) || config.momentum < 0.0 || config.momentum >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be > 0 and momentum in [0,1)");
  }
  if (config.epochs == 0 || config.validation_size == 0) {
    throw Error(ErrorCode::kInvalidCount, "epochs and validation size must be positive");
  }
  const std::size_t batch = config.batch_size ? config.batch_size : scheduled_batch_size(n);
  if (batch == 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");

  const Dataset data = sample(model, derive_seed(config.seed, 1), n);
  const Eigen::MatrixXd xs = features(data.x, n, data.dim, config.pre_encoder);
  if (static_cast<std::size_t>(xs.rows()) != arch.input_dim ||
      arch.classes != model.classes()) {
    throw Error(ErrorCode::kShapeMismatch, "architecture does not match the data shape");
  }

  TrainHistory hist;
  hist.params = init_params(arch, derive_seed(config.seed, 0));
  MLPParams velocity = zero_params(arch);
  MLPParams grad;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Eigen::MatrixXd bx(xs.rows(), static_cast<Eigen::Index>(batch));
  std::vector<int> by;
  by.reserve(batch);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::mt19937_64 rng(derive_seed(config.seed, 1000 + epoch));
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      if (static_cast<std::size_t>(bx.cols()) != len) {
        bx.resize(xs.rows(), static_cast<Eigen::Index>(len));
      }
      by.clear();
      for (std::size_t k = 0; k < len; ++k) {
        const std::size_t r = order[start + k];
        bx.col(static_cast<Eigen::Index>(k)) = xs.col(static_cast<Eigen::Index>(r));
        by.push_back(data.y[r]);
      }
      loss_sum += loss_and_gradient(hist.params, bx, by, &grad) * static_cast<double>(len);
      for (std::size_t l = 0; l < hist.params.layers.size(); ++l) {
        DenseLayer& v = velocity.layers[l];
        DenseLayer& p = hist.params.layers[l];
        v.w = config.momentum * v.w + grad.layers[l].w;
        v.b = config.momentum * v.b + grad.layers[l].b;
        p.w -= config.learning_rate * v.w;
        p.b -= config.learning_rate * v.b;
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss_bits = loss_sum / static_cast<double>(n) / kLn2;
    const Estimate val = mc_risk(model, network_predictor(hist.params, config.pre_encoder),
                                 config.validation_size, derive_seed(config.seed, 2));
    rec.val_risk_bits = val.value;
    rec.val_se_bits = val.std_error;
    hist.epochs.push_back(rec);
  }
  return hist;
}

GapReport evaluate_gap(const HistogramModel& model, const MLPParams& params,
                       const std::optional<Encoder>& pre_encoder, std::size_t n_mc,
                       std::uint64_t seed) {
  GapReport r;
  const BatchPredictor pred = network_predictor(params, pre_encoder);
  r.gap = mc_gap(model, pred, n_mc, seed);
  r.risk = mc_risk(model, pred, n_mc, seed);
  if (pre_encoder) {
    try {
      r.encoder_effect = mil(model, *pre_encoder);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotExactlyComputable) throw;
    }
  }
  return r;
}

}  // namespace infolab
