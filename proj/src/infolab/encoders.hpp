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

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "infolab/model.hpp"

namespace infolab {

// Discrete representation symbol.
using Label = std::vector<std::int64_t>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool point() const { return lo == hi; }
  double length() const { return hi - lo; }
};
using Box = std::vector<Interval>;

class Encoder;

// Coordinate projection x -> (x_j1, ..., x_jq); coords 0-based, increasing.
struct SelectorEnc {
  std::vector<std::size_t> coords;
};

// Sets the listed coordinates to 0 and keeps the dimension.
struct MaskEnc {
  std::vector<std::size_t> coords;
};

// Vector quantizer induced by a product grid. Points outside the grid get
// the extended index 0 (below) or n_k + 1 (at or above) on that axis, so the
// partition covers R^d. An empty grouping labels each cell by its index.
struct CellQuantizerEnc {
  BoundaryGrid grid;
  std::map<CellIndex, std::int64_t> groups;
};

// Level-m dyadic partition: cells of side 2^-m covering [-m, m)^d plus one
// outer cell for everything else.
struct DyadicEnc {
  unsigned level = 1;
  std::size_t dim = 1;
  std::size_t alphabet_size() const;
};

// Labels a point by the sorted multiset of its cell indices on a grid whose
// axes all share one boundary array.
struct OrbitEnc {
  BoundaryGrid grid;
};

// x -> (U^T x)_j.
struct TransformSelectorEnc {
  Eigen::MatrixXd u;
  std::vector<std::size_t> coords;
};

struct ConstantEnc {};

struct CompositionEnc {
  std::vector<Encoder> layers;
};

class Encoder {
 public:
  using Variant = std::variant<SelectorEnc, MaskEnc, CellQuantizerEnc, DyadicEnc, OrbitEnc,
                               TransformSelectorEnc, ConstantEnc, CompositionEnc>;

  Encoder();
  explicit Encoder(Variant v);

  static Encoder selector(std::vector<std::size_t> coords);
  static Encoder mask(std::vector<std::size_t> coords);
  static Encoder cells(BoundaryGrid grid, std::map<CellIndex, std::int64_t> groups = {});
  static Encoder dyadic(unsigned level, std::size_t dim);
  static Encoder orbit(BoundaryGrid grid);
  static Encoder transform(Eigen::MatrixXd u, std::vector<std::size_t> coords);
  static Encoder constant();

  const Variant& variant() const { return *v_; }

  // Human-readable id, also used as encoder_id in reports.
  std::string describe() const;
  bool discrete_output() const;
  // Required input dimension, when the encoder fixes one.
  std::optional<std::size_t> input_dim() const;
  // Output dimension for continuous outputs, given the input dimension.
  std::optional<std::size_t> output_dim(std::optional<std::size_t> in) const;

 private:
  std::shared_ptr<const Variant> v_;
};

using Representation = std::variant<std::vector<double>, Label>;

// Call it qualified: with std containers as arguments, ADL also finds std::apply.
Representation apply(const Encoder& enc, std::span<const double> x);

// Real-vector output of an encoder with continuous output (selector, mask,
// transform and compositions of those); throws ShapeMismatch otherwise.
std::vector<double> apply_continuous(const Encoder& enc, std::span<const double> x);

std::vector<Encoder> dyadic_family(std::size_t dim, unsigned max_level);

Encoder orbit_encoder(const HistogramModel& model);

// Function composition, applied left to right. Every layer but the last must
// have continuous output.
Encoder compose(std::vector<Encoder> layers);

// prefixes(compose({a, b, c})) == {a, compose({a, b}), compose({a, b, c})}.
std::vector<Encoder> prefixes(const Encoder& enc);

// Exact image of one model cell: the cell splits into sub-boxes (in grid
// coordinates), each mapped to a single representation symbol. For
// continuous outputs the symbol encodes the output box, which is also
// returned so callers can check that distinct output boxes are disjoint.
struct ImagePiece {
  Label label;
  Box preimage;
  std::optional<Box> output_box;
};

std::vector<ImagePiece> cell_image(const Encoder& enc, const HistogramModel& model,
                                   std::size_t cell);

// Fraction of the cell's Lebesgue volume covered by a sub-box.
double volume_fraction(const Box& sub, const Box& cell);

Box cell_box(const BoundaryGrid& grid, std::size_t cell);

}  // namespace infolab
