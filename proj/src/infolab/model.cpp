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

#include "infolab/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "infolab/error.hpp"

namespace infolab {

namespace {

constexpr std::size_t kMaxCells = std::size_t{1} << 26;

std::string format_index(const CellIndex& index) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < index.size(); ++k) {
    os << (k ? "," : "") << index[k] + 1;
  }
  os << ')';
  return os.str();
}

std::vector<double> cumulative(std::span<const double> p) {
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  return cdf;
}

std::size_t pick(const std::vector<double>& cdf, double u) {
  double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  auto i = static_cast<std::size_t>(it - cdf.begin());
  return std::min(i, cdf.size() - 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// BoundaryGrid

BoundaryGrid::BoundaryGrid(std::vector<std::vector<double>> edges)
    : edges_(std::move(edges)) {
  if (edges_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs at least one dimension");
  }
  total_ = 1;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto& a = edges_[k];
    if (a.size() < 2) {
      throw Error(ErrorCode::kNonMonotoneBoundaries,
                  "dimension " + std::to_string(k + 1) + " needs at least two boundaries");
    }
    for (std::size_t l = 0; l < a.size(); ++l) {
      if (!std::isfinite(a[l]) || (l > 0 && !(a[l] > a[l - 1]))) {
        throw Error(ErrorCode::kNonMonotoneBoundaries,
                    "dimension " + std::to_string(k + 1) +
                        " boundaries are not finite and strictly increasing at position " +
                        std::to_string(l));
      }
    }
    if (total_ > kMaxCells / (a.size() - 1)) {
      throw Error(ErrorCode::kTooLarge, "grid has more than 2^26 cells");
    }
    total_ *= a.size() - 1;
  }
  strides_.assign(edges_.size(), 1);
  for (std::size_t k = edges_.size() - 1; k > 0; --k) {
    strides_[k - 1] = strides_[k] * cells(k);
  }
}

std::size_t BoundaryGrid::flatten(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < index.size(); ++k) flat += index[k] * strides_[k];
  return flat;
}

CellIndex BoundaryGrid::unflatten(std::size_t flat) const {
  CellIndex index(dim());
  for (std::size_t k = 0; k < dim(); ++k) {
    index[k] = flat / strides_[k];
    flat %= strides_[k];
  }
  return index;
}

std::optional<std::size_t> BoundaryGrid::locate_axis(std::size_t axis, double v) const {
  const auto& a = edges_[axis];
  if (!(v >= a.front()) || !(v < a.back())) return std::nullopt;
  auto it = std::upper_bound(a.begin(), a.end(), v);
  return static_cast<std::size_t>(it - a.begin()) - 1;
}

std::optional<std::size_t> BoundaryGrid::locate(std::span<const double> x) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dim(); ++k) {
    auto i = locate_axis(k, x[k]);
    if (!i) return std::nullopt;
    flat += *i * strides_[k];
  }
  return flat;
}

double BoundaryGrid::volume(std::size_t flat) const {
  double v = 1.0;
  for (std::size_t k = 0; k < dim(); ++k) {
    std::size_t i = flat / strides_[k];
    flat %= strides_[k];
    v *= upper(k, i) - lower(k, i);
  }
  return v;
}

bool BoundaryGrid::identical_axes() const {
  return std::all_of(edges_.begin(), edges_.end(),
                     [&](const auto& a) { return a == edges_.front(); });
}

BoundaryGrid BoundaryGrid::restrict_to(std::span<const std::size_t> axes) const {
  std::vector<std::vector<double>> edges;
  for (auto k : axes) edges.push_back(edges_.at(k));
  return BoundaryGrid(std::move(edges));
}

// ---------------------------------------------------------------------------
// DiscreteJoint

DiscreteJoint::DiscreteJoint(std::size_t cells, std::vector<double> prior,
                             std::vector<double> conditional, double tolerance)
    : cells_(cells), prior_(std::move(prior)), conditional_(std::move(conditional)) {
  const std::size_t m = prior_.size();
  if (m == 0) throw Error(ErrorCode::kInvalidArgument, "model needs at least one class");
  if (conditional_.size() != cells_ * m) {
    throw Error(ErrorCode::kShapeMismatch, "conditional table size does not match cells x classes");
  }
  double total = 0.0;
  for (std::size_t y = 0; y < m; ++y) {
    if (!(prior_[y] >= 0.0)) {
      throw Error(ErrorCode::kNegativeProbability,
                  "prior of class " + std::to_string(y + 1) + " is " + std::to_string(prior_[y]));
    }
    total += prior_[y];
  }
  if (std::abs(total - 1.0) > tolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "class prior sums to " << total;
    throw Error(ErrorCode::kProbabilityNotNormalized, os.str());
  }
  std::vector<double> sums(m, 0.0);
  for (std::size_t c = 0; c < cells_; ++c) {
    for (std::size_t y = 0; y < m; ++y) {
      double p = conditional_[c * m + y];
      if (!(p >= 0.0)) {
        throw Error(ErrorCode::kNegativeProbability,
                    "cell " + std::to_string(c) + " class " + std::to_string(y + 1) +
                        " has probability " + std::to_string(p));
      }
      sums[y] += p;
    }
  }
  for (std::size_t y = 0; y < m; ++y) {
    if (std::abs(sums[y] - 1.0) > tolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "conditional cell pmf of class " << y + 1 << " sums to " << sums[y];
      throw Error(ErrorCode::kProbabilityNotNormalized, os.str());
    }
  }
}

double DiscreteJoint::cell_mass(std::size_t cell) const {
  double s = 0.0;
  for (std::size_t y = 0; y < classes(); ++y) s += joint(cell, y);
  return s;
}

// ---------------------------------------------------------------------------
// HistogramModel

HistogramModel::HistogramModel(BoundaryGrid grid, DiscreteJoint joint,
                               std::optional<Eigen::MatrixXd> rotation,
                               std::vector<std::size_t> masked)
    : grid_(std::move(grid)),
      joint_(std::move(joint)),
      rotation_(std::move(rotation)),
      masked_(std::move(masked)) {
  if (joint_.cells() != grid_.total_cells()) {
    throw Error(ErrorCode::kShapeMismatch, "joint table does not match grid cell count");
  }
  if (rotation_) {
    if (rotation_->rows() != static_cast<Eigen::Index>(dim()) ||
        rotation_->cols() != static_cast<Eigen::Index>(dim())) {
      throw Error(ErrorCode::kDimensionMismatch, "rotation must be d x d");
    }
    if (!is_orthonormal(*rotation_)) {
      throw Error(ErrorCode::kNotOrthonormal, "rotation is not orthonormal within 1e-10");
    }
  }
  std::sort(masked_.begin(), masked_.end());
  masked_.erase(std::unique(masked_.begin(), masked_.end()), masked_.end());
  for (auto k : masked_) {
    if (k >= dim()) {
      throw Error(ErrorCode::kIndexOutOfRange, "masked coordinate " + std::to_string(k + 1));
    }
  }
}

std::vector<double> HistogramModel::to_latent(std::span<const double> x) const {
  if (x.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(dim()) + " coordinates, got " +
                    std::to_string(x.size()));
  }
  if (!rotation_) return {x.begin(), x.end()};
  Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd z = rotation_->transpose() * v;
  return {z.data(), z.data() + z.size()};
}

bool is_orthonormal(const Eigen::MatrixXd& u, double tol) {
  if (u.rows() != u.cols()) return false;
  Eigen::MatrixXd gram = u.transpose() * u;
  return (gram - Eigen::MatrixXd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// Construction

HistogramModel build_model(const ModelSpec& spec) {
  BoundaryGrid grid(spec.edges);
  const std::size_t m = spec.prior.size();
  if (m == 0) throw Error(ErrorCode::kInvalidArgument, "prior is empty");
  for (std::size_t y = 0; y < m; ++y) {
    if (!(spec.prior[y] >= 0.0)) {
      throw Error(ErrorCode::kNegativeProbability,
                  "prior of class " + std::to_string(y + 1) + " is " + std::to_string(spec.prior[y]));
    }
  }
  std::vector<double> cond(grid.total_cells() * m, 0.0);
  std::vector<bool> seen(cond.size(), false);
  for (const auto& e : spec.cells) {
    if (e.index.size() != grid.dim()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "cell index " + format_index(e.index) + " has wrong arity");
    }
    for (std::size_t k = 0; k < grid.dim(); ++k) {
      if (e.index[k] >= grid.cells(k)) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    "cell index " + format_index(e.index) + " outside the grid");
      }
    }
    if (e.cls >= m) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "class " + std::to_string(e.cls + 1) + " outside [1," + std::to_string(m) + "]");
    }
    if (!(e.p >= 0.0)) {
      throw Error(ErrorCode::kNegativeProbability,
                  "p" + format_index(e.index) + "|" + std::to_string(e.cls + 1) + " = " +
                      std::to_string(e.p));
    }
    std::size_t slot = grid.flatten(e.index) * m + e.cls;
    if (seen[slot]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate entry for cell " + format_index(e.index) + " class " +
                      std::to_string(e.cls + 1));
    }
    seen[slot] = true;
    cond[slot] = e.p;
  }
  HistogramModel model(grid, DiscreteJoint(grid.total_cells(), spec.prior, std::move(cond), 1e-12));
  if (!spec.noise.empty()) model = sparsify(model, spec.noise);
  if (!spec.mask.empty()) model = mask(model, spec.mask);
  if (spec.rotation) model = rotate(model, *spec.rotation);
  return model;
}

// ---------------------------------------------------------------------------
// Density and posterior

double pdf(const HistogramModel& model, std::span<const double> x, std::size_t y) {
  if (y >= model.classes()) {
    throw Error(ErrorCode::kIndexOutOfRange, "class " + std::to_string(y + 1));
  }
  auto z = model.to_latent(x);
  auto cell = model.grid().locate(z);
  if (!cell) return 0.0;
  return model.joint().conditional(*cell, y) / model.grid().volume(*cell);
}

std::vector<double> true_posterior(const HistogramModel& model, std::span<const double> x) {
  auto z = model.to_latent(x);
  auto cell = model.grid().locate(z);
  if (!cell) throw Error(ErrorCode::kOutsideSupport, "point lies outside the support box");
  const auto& joint = model.joint();
  std::vector<double> post(model.classes());
  double total = 0.0;
  for (std::size_t y = 0; y < post.size(); ++y) {
    post[y] = joint.joint(*cell, y);
    total += post[y];
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kOutsideSupport, "point lies in a zero-probability cell");
  }
  for (auto& p : post) p /= total;
  return post;
}

// ---------------------------------------------------------------------------
// Sampling

Sampler::Sampler(const HistogramModel& model, std::uint64_t seed)
    : model_(&model), seed_(seed), rng_(seed) {
  const auto& joint = model.joint();
  prior_cdf_ = cumulative(joint.prior());
  const std::size_t m = joint.classes();
  cell_cdf_.resize(m);
  cell_ids_.resize(m);
  for (std::size_t y = 0; y < m; ++y) {
    std::vector<double> p;
    for (std::size_t c = 0; c < joint.cells(); ++c) {
      double v = joint.conditional(c, y);
      if (v > 0.0) {
        p.push_back(v);
        cell_ids_[y].push_back(c);
      }
    }
    cell_cdf_[y] = cumulative(p);
  }
}

double Sampler::uniform() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

void Sampler::draw_into(std::size_t n, std::vector<double>& x, std::vector<int>& y) {
  const auto& grid = model_->grid();
  const std::size_t d = grid.dim();
  x.resize(n * d);
  y.resize(n);
  std::vector<double> z(d);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t cls = pick(prior_cdf_, uniform());
    // A class with zero prior is never drawn because its cdf step is flat.
    std::size_t cell = cell_ids_[cls][pick(cell_cdf_[cls], uniform())];
    CellIndex idx = grid.unflatten(cell);
    for (std::size_t k = 0; k < d; ++k) {
      double lo = grid.lower(k, idx[k]);
      double hi = grid.upper(k, idx[k]);
      double v = lo + uniform() * (hi - lo);
      z[k] = v < hi ? v : std::nextafter(hi, lo);
    }
    double* out = x.data() + s * d;
    if (model_->rotation()) {
      Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(d));
      Eigen::Map<Eigen::VectorXd>(out, static_cast<Eigen::Index>(d)) = *model_->rotation() * zv;
    } else {
      std::copy(z.begin(), z.end(), out);
    }
    y[s] = static_cast<int>(cls);
  }
}

Dataset Sampler::draw(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidCount, "sample size must be at least 1");
  Dataset ds;
  ds.dim = model_->dim();
  ds.seed = seed_;
  draw_into(n, ds.x, ds.y);
  return ds;
}

Dataset sample(const HistogramModel& model, std::uint64_t seed, std::size_t n) {
  Sampler sampler(model, seed);
  return sampler.draw(n);
}

// ---------------------------------------------------------------------------
// Transformations

HistogramModel sparsify(const HistogramModel& model, std::vector<NoiseDim> noise) {
  if (noise.empty()) throw Error(ErrorCode::kInvalidArgument, "no noise dimensions given");
  if (model.rotation()) {
    throw Error(ErrorCode::kInvalidArgument, "sparsify expects an unrotated model");
  }
  const std::size_t d = model.dim();
  const std::size_t total = d + noise.size();
  std::vector<int> slot_noise(total, -1);
  for (std::size_t v = 0; v < noise.size(); ++v) {
    const auto& nd = noise[v];
    if (nd.position >= total) {
      throw Error(ErrorCode::kPositionConflict,
                  "noise position " + std::to_string(nd.position + 1) + " exceeds " +
                      std::to_string(total));
    }
    if (slot_noise[nd.position] >= 0) {
      throw Error(ErrorCode::kPositionConflict,
                  "two noise dimensions at position " + std::to_string(nd.position + 1));
    }
    slot_noise[nd.position] = static_cast<int>(v);
    if (nd.pmf.size() + 1 != nd.edges.size()) {
      throw Error(ErrorCode::kShapeMismatch, "noise pmf must have one entry per cell");
    }
    double s = 0.0;
    for (double p : nd.pmf) {
      if (!(p >= 0.0)) throw Error(ErrorCode::kNegativeProbability, "noise pmf entry");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) {
      throw Error(ErrorCode::kProbabilityNotNormalized,
                  "noise pmf sums to " + std::to_string(s));
    }
  }

  std::vector<std::vector<double>> edges;
  std::vector<int> source;  // >= 0: original axis, < 0: -(noise+1)
  std::size_t next = 0;
  for (std::size_t s = 0; s < total; ++s) {
    if (slot_noise[s] >= 0) {
      edges.push_back(noise[static_cast<std::size_t>(slot_noise[s])].edges);
      source.push_back(-(slot_noise[s] + 1));
    } else {
      edges.push_back(model.grid().edges(next));
      source.push_back(static_cast<int>(next));
      ++next;
    }
  }
  BoundaryGrid grid(std::move(edges));
  const auto& old = model.joint();
  const std::size_t m = old.classes();
  std::vector<double> cond(grid.total_cells() * m);
  CellIndex orig(d);
  for (std::size_t c = 0; c < grid.total_cells(); ++c) {
    CellIndex idx = grid.unflatten(c);
    double w = 1.0;
    for (std::size_t s = 0; s < total; ++s) {
      if (source[s] >= 0) {
        orig[static_cast<std::size_t>(source[s])] = idx[s];
      } else {
        w *= noise[static_cast<std::size_t>(-source[s] - 1)].pmf[idx[s]];
      }
    }
    std::size_t oc = model.grid().flatten(orig);
    for (std::size_t y = 0; y < m; ++y) cond[c * m + y] = old.conditional(oc, y) * w;
  }
  std::vector<std::size_t> masked;
  for (std::size_t s = 0; s < total; ++s) {
    if (source[s] >= 0 &&
        std::binary_search(model.masked().begin(), model.masked().end(),
                           static_cast<std::size_t>(source[s]))) {
      masked.push_back(s);
    }
  }
  return HistogramModel(grid, DiscreteJoint(grid.total_cells(), old.prior(), std::move(cond)),
                        std::nullopt, std::move(masked));
}

HistogramModel mask(const HistogramModel& model, std::vector<std::size_t> coords) {
  const auto& grid = model.grid();
  for (auto k : coords) {
    if (k >= model.dim()) {
      throw Error(ErrorCode::kIndexOutOfRange, "mask coordinate " + std::to_string(k + 1));
    }
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  if (coords.empty()) return model;

  const auto& joint = model.joint();
  const std::size_t m = joint.classes();
  std::vector<bool> is_masked(model.dim(), false);
  for (auto k : coords) is_masked[k] = true;

  // Pooled marginal of each masked axis.
  std::vector<std::vector<double>> marginal(model.dim());
  for (auto k : coords) marginal[k].assign(grid.cells(k), 0.0);
  // Conditional pmf of the kept axes: key is the cell index with masked axes zeroed.
  std::map<CellIndex, std::vector<double>> kept;
  for (std::size_t c = 0; c < grid.total_cells(); ++c) {
    CellIndex idx = grid.unflatten(c);
    double mass = joint.cell_mass(c);
    for (auto k : coords) marginal[k][idx[k]] += mass;
    for (auto k : coords) idx[k] = 0;
    auto& row = kept[idx];
    row.resize(m, 0.0);
    for (std::size_t y = 0; y < m; ++y) row[y] += joint.conditional(c, y);
  }
  std::vector<double> cond(grid.total_cells() * m);
  for (std::size_t c = 0; c < grid.total_cells(); ++c) {
    CellIndex idx = grid.unflatten(c);
    double w = 1.0;
    for (auto k : coords) {
      w *= marginal[k][idx[k]];
      idx[k] = 0;
    }
    const auto& row = kept.at(idx);
    for (std::size_t y = 0; y < m; ++y) cond[c * m + y] = row[y] * w;
  }
  std::vector<std::size_t> masked = model.masked();
  masked.insert(masked.end(), coords.begin(), coords.end());
  return HistogramModel(grid, DiscreteJoint(grid.total_cells(), joint.prior(), std::move(cond)),
                        model.rotation(), std::move(masked));
}

HistogramModel rotate(const HistogramModel& model, const Eigen::MatrixXd& u) {
  if (u.rows() != static_cast<Eigen::Index>(model.dim()) || u.cols() != u.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "rotation must be d x d");
  }
  if (!is_orthonormal(u)) {
    throw Error(ErrorCode::kNotOrthonormal, "rotation is not orthonormal within 1e-10");
  }
  Eigen::MatrixXd composed = model.rotation() ? Eigen::MatrixXd(u * *model.rotation()) : u;
  if ((composed - Eigen::MatrixXd::Identity(composed.rows(), composed.cols())).cwiseAbs().maxCoeff() == 0.0) {
    return HistogramModel(model.grid(), model.joint(), std::nullopt, model.masked());
  }
  return HistogramModel(model.grid(), model.joint(), std::move(composed), model.masked());
}

HistogramModel symmetrize(const HistogramModel& model) {
  const auto& grid = model.grid();
  if (!grid.identical_axes()) {
    throw Error(ErrorCode::kHeterogeneousGrids, "symmetrize needs identical boundary arrays");
  }
  const auto& joint = model.joint();
  const std::size_t m = joint.classes();
  std::map<CellIndex, std::vector<std::size_t>> orbits;
  for (std::size_t c = 0; c < grid.total_cells(); ++c) {
    CellIndex idx = grid.unflatten(c);
    std::sort(idx.begin(), idx.end());
    orbits[idx].push_back(c);
  }
  std::vector<double> cond(joint.conditional().size());
  for (const auto& [key, members] : orbits) {
    for (std::size_t y = 0; y < m; ++y) {
      double s = 0.0;
      for (auto c : members) s += joint.conditional(c, y);
      s /= static_cast<double>(members.size());
      for (auto c : members) cond[c * m + y] = s;
    }
  }
  return HistogramModel(grid, DiscreteJoint(grid.total_cells(), joint.prior(), std::move(cond)),
                        model.rotation(), model.masked());
}

HistogramModel marginal_model(const HistogramModel& model, std::span<const std::size_t> axes) {
  if (model.rotation()) {
    throw Error(ErrorCode::kInvalidArgument, "marginal_model expects an unrotated model");
  }
  if (axes.empty()) throw Error(ErrorCode::kInvalidArgument, "no axes selected");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] >= model.dim() || (i > 0 && axes[i] <= axes[i - 1])) {
      throw Error(ErrorCode::kIndexOutOfRange, "axes must be strictly increasing within [d]");
    }
  }
  BoundaryGrid sub = model.grid().restrict_to(axes);
  const auto& joint = model.joint();
  const std::size_t m = joint.classes();
  std::vector<double> cond(sub.total_cells() * m, 0.0);
  CellIndex s(axes.size());
  for (std::size_t c = 0; c < joint.cells(); ++c) {
    CellIndex idx = model.grid().unflatten(c);
    for (std::size_t i = 0; i < axes.size(); ++i) s[i] = idx[axes[i]];
    std::size_t sc = sub.flatten(s);
    for (std::size_t y = 0; y < m; ++y) cond[sc * m + y] += joint.conditional(c, y);
  }
  return HistogramModel(sub, DiscreteJoint(sub.total_cells(), joint.prior(), std::move(cond)));
}

}  // namespace infolab
