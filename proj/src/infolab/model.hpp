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

// Histogram-structured joint models: a product grid of half-open cells, a
// class prior, and per-class cell probabilities. X given a cell is uniform on
// that cell, so every information measure reduces to a finite table.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace infolab {

// 0-based cell index along each dimension.
using CellIndex = std::vector<std::size_t>;

class BoundaryGrid {
 public:
  BoundaryGrid() = default;
  explicit BoundaryGrid(std::vector<std::vector<double>> edges);

  std::size_t dim() const { return edges_.size(); }
  std::size_t cells(std::size_t axis) const { return edges_[axis].size() - 1; }
  std::size_t total_cells() const { return total_; }
  const std::vector<double>& edges(std::size_t axis) const { return edges_[axis]; }
  const std::vector<std::vector<double>>& all_edges() const { return edges_; }

  // Row-major flattening, last axis fastest.
  std::size_t flatten(std::span<const std::size_t> index) const;
  CellIndex unflatten(std::size_t flat) const;

  std::optional<std::size_t> locate_axis(std::size_t axis, double v) const;
  std::optional<std::size_t> locate(std::span<const double> x) const;

  double lower(std::size_t axis, std::size_t i) const { return edges_[axis][i]; }
  double upper(std::size_t axis, std::size_t i) const { return edges_[axis][i + 1]; }
  double volume(std::size_t flat) const;

  // True when every axis carries the same boundary array.
  bool identical_axes() const;

  BoundaryGrid restrict_to(std::span<const std::size_t> axes) const;

 private:
  std::vector<std::vector<double>> edges_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 0;
};

// Class prior p_y and conditional cell pmf p_{i|y}, stored cell-major.
class DiscreteJoint {
 public:
  DiscreteJoint() = default;
  DiscreteJoint(std::size_t cells, std::vector<double> prior,
                std::vector<double> conditional, double tolerance = 1e-10);

  std::size_t classes() const { return prior_.size(); }
  std::size_t cells() const { return cells_; }
  const std::vector<double>& prior() const { return prior_; }
  const std::vector<double>& conditional() const { return conditional_; }

  double conditional(std::size_t cell, std::size_t y) const {
    return conditional_[cell * prior_.size() + y];
  }
  double joint(std::size_t cell, std::size_t y) const {
    return prior_[y] * conditional(cell, y);
  }
  double cell_mass(std::size_t cell) const;

 private:
  std::size_t cells_ = 0;
  std::vector<double> prior_;
  std::vector<double> conditional_;
};

class HistogramModel {
 public:
  HistogramModel() = default;
  HistogramModel(BoundaryGrid grid, DiscreteJoint joint,
                 std::optional<Eigen::MatrixXd> rotation = std::nullopt,
                 std::vector<std::size_t> masked = {});

  const BoundaryGrid& grid() const { return grid_; }
  const DiscreteJoint& joint() const { return joint_; }
  const std::optional<Eigen::MatrixXd>& rotation() const { return rotation_; }
  const std::vector<std::size_t>& masked() const { return masked_; }
  std::size_t dim() const { return grid_.dim(); }
  std::size_t classes() const { return joint_.classes(); }

  // Maps an observation to grid coordinates (inverse rotation).
  std::vector<double> to_latent(std::span<const double> x) const;

 private:
  BoundaryGrid grid_;
  DiscreteJoint joint_;
  std::optional<Eigen::MatrixXd> rotation_;
  std::vector<std::size_t> masked_;
};

struct CellEntry {
  CellIndex index;
  std::size_t cls = 0;
  double p = 0.0;
};

// A noise coordinate independent of (X, Y); position is its 0-based slot in
// the widened vector.
struct NoiseDim {
  std::size_t position = 0;
  std::vector<double> edges{0.0, 1.0};
  std::vector<double> pmf{1.0};
};

struct ModelSpec {
  std::vector<std::vector<double>> edges;
  std::vector<double> prior;
  std::vector<CellEntry> cells;
  std::optional<Eigen::MatrixXd> rotation;
  std::vector<std::size_t> mask;
  std::vector<NoiseDim> noise;
};

HistogramModel build_model(const ModelSpec& spec);

double pdf(const HistogramModel& model, std::span<const double> x, std::size_t y);

std::vector<double> true_posterior(const HistogramModel& model,
                                   std::span<const double> x);

struct Dataset {
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> x;  // row-major, size() * dim
  std::vector<int> y;     // 0-based labels

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * dim, dim};
  }
};

// Three-stage draw: Y from the prior, a cell given Y, then X uniform on the
// cell, rotated into observation space. Successive draw() calls continue one
// stream, so chunked draws match a single large draw.
class Sampler {
 public:
  Sampler(const HistogramModel& model, std::uint64_t seed);

  Dataset draw(std::size_t n);
  void draw_into(std::size_t n, std::vector<double>& x, std::vector<int>& y);

 private:
  double uniform();

  const HistogramModel* model_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::vector<double> prior_cdf_;
  std::vector<std::vector<double>> cell_cdf_;
  std::vector<std::vector<std::size_t>> cell_ids_;
};

Dataset sample(const HistogramModel& model, std::uint64_t seed, std::size_t n);

HistogramModel sparsify(const HistogramModel& model, std::vector<NoiseDim> noise);

// Replaces the law of each masked coordinate by its pooled marginal, making
// it independent of Y and of every other coordinate.
HistogramModel mask(const HistogramModel& model, std::vector<std::size_t> coords);

HistogramModel rotate(const HistogramModel& model, const Eigen::MatrixXd& u);

// Averages p_{i|y} over the orbit of i under coordinate permutations.
HistogramModel symmetrize(const HistogramModel& model);

// Marginal model of the selected grid axes (unrotated models only).
HistogramModel marginal_model(const HistogramModel& model,
                              std::span<const std::size_t> axes);

bool is_orthonormal(const Eigen::MatrixXd& u, double tol = 1e-10);

}  // namespace infolab
