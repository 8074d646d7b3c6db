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

#include "infolab/encoders.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "infolab/error.hpp"

namespace infolab {

namespace {

constexpr std::int64_t kOuterKey = std::numeric_limits<std::int64_t>::min();
constexpr std::size_t kMaxPiecesPerCell = std::size_t{1} << 22;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_increasing(const std::vector<std::size_t>& coords, const char* what) {
  for (std::size_t i = 1; i < coords.size(); ++i) {
    if (coords[i] <= coords[i - 1]) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(what) + " coordinates must be strictly increasing");
    }
  }
}

// Extended index along an axis: 0 below the first boundary, 1..n inside,
// n + 1 at or above the last boundary.
std::int64_t extended_index(const std::vector<double>& edges, double v) {
  if (v < edges.front()) return 0;
  if (!(v < edges.back())) return static_cast<std::int64_t>(edges.size());
  auto it = std::upper_bound(edges.begin(), edges.end(), v);
  return static_cast<std::int64_t>(it - edges.begin());
}

struct AxisPart {
  std::int64_t key;
  Interval part;
};

// Splits an interval along the extended partition induced by edges.
std::vector<AxisPart> split_axis(const Interval& iv, const std::vector<double>& edges) {
  if (iv.point()) return {{extended_index(edges, iv.lo), iv}};
  std::vector<AxisPart> parts;
  const double inf = std::numeric_limits<double>::infinity();
  const auto n = static_cast<std::int64_t>(edges.size());
  auto region_lo = [&](std::int64_t e) { return e == 0 ? -inf : edges[static_cast<std::size_t>(e - 1)]; };
  auto region_hi = [&](std::int64_t e) { return e == n ? inf : edges[static_cast<std::size_t>(e)]; };
  for (std::int64_t e = extended_index(edges, iv.lo); e <= n; ++e) {
    double lo = std::max(iv.lo, region_lo(e));
    double hi = std::min(iv.hi, region_hi(e));
    if (lo >= iv.hi) break;
    if (hi > lo) parts.push_back({e, {lo, hi}});
  }
  return parts;
}

std::vector<double> dyadic_edges(unsigned level, double scale) {
  const auto m = static_cast<std::int64_t>(level);
  const std::int64_t per_side = m * (std::int64_t{1} << level);
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(2 * per_side + 1));
  for (std::int64_t j = -per_side; j <= per_side; ++j) {
    edges.push_back(static_cast<double>(j) / scale);
  }
  return edges;
}

Label box_label(const Box& box) {
  Label label{1};
  for (const auto& iv : box) {
    label.push_back(std::bit_cast<std::int64_t>(iv.lo));
    label.push_back(std::bit_cast<std::int64_t>(iv.hi));
  }
  return label;
}

bool near(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a - b).cwiseAbs().maxCoeff() <= 1e-12;
}

// Piece of a cell as it travels through continuous layers.
struct State {
  Box current;
  Box pre;
  std::vector<int> origin;  // current axis -> grid axis, -1 for constants
  const Eigen::MatrixXd* frame = nullptr;  // observations are frame * z
};

void require_dim(std::size_t have, std::size_t want, const char* what) {
  if (have != want) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " expects dimension " + std::to_string(want) + ", got " +
                    std::to_string(have));
  }
}

void require_axis_frame(const State& s, const char* what) {
  if (s.frame) {
    throw Error(ErrorCode::kNotExactlyComputable,
                std::string(what) +
                    " on a rotated model has no exact image; use a transform selector first");
  }
}

// Cartesian product of per-axis parts, one piece per combination.
template <class LabelFn>
std::vector<ImagePiece> product_pieces(const State& s,
                                       const std::vector<std::vector<AxisPart>>& parts,
                                       LabelFn&& make_label) {
  std::size_t count = 1;
  for (const auto& p : parts) {
    if (p.empty()) return {};
    if (count > kMaxPiecesPerCell / p.size()) {
      throw Error(ErrorCode::kTooLarge, "cell image exceeds 2^22 pieces");
    }
    count *= p.size();
  }
  std::vector<ImagePiece> out;
  out.reserve(count);
  std::vector<std::size_t> pos(parts.size(), 0);
  std::vector<std::int64_t> keys(parts.size());
  for (std::size_t n = 0; n < count; ++n) {
    Box pre = s.pre;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const auto& ap = parts[k][pos[k]];
      keys[k] = ap.key;
      if (s.origin[k] >= 0) pre[static_cast<std::size_t>(s.origin[k])] = ap.part;
    }
    out.push_back({make_label(keys), std::move(pre), std::nullopt});
    for (std::size_t k = parts.size(); k-- > 0;) {
      if (++pos[k] < parts[k].size()) break;
      pos[k] = 0;
    }
  }
  return out;
}

State step_continuous(const Encoder& layer, State s) {
  return std::visit(
      Overloaded{
          [&](const SelectorEnc& e) {
            require_axis_frame(s, "selector");
            State t;
            t.pre = s.pre;
            for (auto c : e.coords) {
              if (c >= s.current.size()) {
                throw Error(ErrorCode::kDimensionMismatch,
                            "selector coordinate " + std::to_string(c + 1) + " exceeds dimension " +
                                std::to_string(s.current.size()));
              }
              t.current.push_back(s.current[c]);
              t.origin.push_back(s.origin[c]);
            }
            return t;
          },
          [&](const MaskEnc& e) {
            require_axis_frame(s, "mask");
            for (auto c : e.coords) {
              if (c >= s.current.size()) {
                throw Error(ErrorCode::kDimensionMismatch,
                            "mask coordinate " + std::to_string(c + 1) + " exceeds dimension");
              }
              s.current[c] = {0.0, 0.0};
              s.origin[c] = -1;
            }
            return s;
          },
          [&](const TransformSelectorEnc& e) {
            require_dim(s.current.size(), static_cast<std::size_t>(e.u.rows()), "transform selector");
            bool matches = s.frame ? near(e.u, *s.frame)
                                   : near(e.u, Eigen::MatrixXd::Identity(e.u.rows(), e.u.cols()));
            if (!matches) {
              throw Error(ErrorCode::kNotExactlyComputable,
                          "transform selector basis differs from the model rotation");
            }
            State t;
            t.pre = s.pre;
            for (auto c : e.coords) {
              t.current.push_back(s.current.at(c));
              t.origin.push_back(s.origin.at(c));
            }
            return t;
          },
          [&](const auto&) -> State {
            throw Error(ErrorCode::kShapeMismatch, "layer does not produce a real vector");
          }},
      layer.variant());
}

std::vector<ImagePiece> step_discrete(const Encoder& layer, const State& s) {
  return std::visit(
      Overloaded{
          [&](const CellQuantizerEnc& e) {
            require_axis_frame(s, "cell quantizer");
            require_dim(s.current.size(), e.grid.dim(), "cell quantizer");
            std::vector<std::vector<AxisPart>> parts;
            for (std::size_t k = 0; k < s.current.size(); ++k) {
              parts.push_back(split_axis(s.current[k], e.grid.edges(k)));
            }
            return product_pieces(s, parts, [&](const std::vector<std::int64_t>& keys) {
              if (!e.groups.empty()) {
                bool inner = true;
                CellIndex idx(keys.size());
                for (std::size_t k = 0; k < keys.size(); ++k) {
                  if (keys[k] < 1 || keys[k] > static_cast<std::int64_t>(e.grid.cells(k))) {
                    inner = false;
                    break;
                  }
                  idx[k] = static_cast<std::size_t>(keys[k] - 1);
                }
                if (inner) return Label{0, e.groups.at(idx)};
              }
              Label l{1};
              l.insert(l.end(), keys.begin(), keys.end());
              return l;
            });
          },
          [&](const DyadicEnc& e) {
            require_axis_frame(s, "dyadic quantizer");
            require_dim(s.current.size(), e.dim, "dyadic quantizer");
            const double scale = std::ldexp(1.0, static_cast<int>(e.level));
            const auto edges = dyadic_edges(e.level, scale);
            const auto n = static_cast<std::int64_t>(edges.size());
            const std::int64_t offset = static_cast<std::int64_t>(e.level) *
                                        (std::int64_t{1} << e.level);
            std::vector<std::vector<AxisPart>> parts;
            for (const auto& iv : s.current) {
              auto p = split_axis(iv, edges);
              for (auto& ap : p) {
                ap.key = (ap.key == 0 || ap.key == n) ? kOuterKey : ap.key - 1 - offset;
              }
              parts.push_back(std::move(p));
            }
            return product_pieces(s, parts, [](const std::vector<std::int64_t>& keys) {
              for (auto k : keys) {
                if (k == kOuterKey) return Label{kOuterKey};
              }
              return Label(keys.begin(), keys.end());
            });
          },
          [&](const OrbitEnc& e) {
            require_axis_frame(s, "orbit encoder");
            require_dim(s.current.size(), e.grid.dim(), "orbit encoder");
            std::vector<std::vector<AxisPart>> parts;
            for (std::size_t k = 0; k < s.current.size(); ++k) {
              parts.push_back(split_axis(s.current[k], e.grid.edges(k)));
            }
            return product_pieces(s, parts, [](std::vector<std::int64_t> keys) {
              std::sort(keys.begin(), keys.end());
              return Label(keys.begin(), keys.end());
            });
          },
          [&](const ConstantEnc&) {
            return std::vector<ImagePiece>{{Label{0}, s.pre, std::nullopt}};
          },
          [&](const auto&) -> std::vector<ImagePiece> {
            throw Error(ErrorCode::kShapeMismatch, "layer does not produce a discrete label");
          }},
      layer.variant());
}

}  // namespace

std::size_t DyadicEnc::alphabet_size() const {
  std::size_t per_axis = static_cast<std::size_t>(level) << (level + 1);
  std::size_t n = 1;
  for (std::size_t k = 0; k < dim; ++k) n *= per_axis;
  return n + 1;
}

Encoder::Encoder() : v_(std::make_shared<const Variant>(ConstantEnc{})) {}

Encoder::Encoder(Variant v) : v_(std::make_shared<const Variant>(std::move(v))) {}

Encoder Encoder::selector(std::vector<std::size_t> coords) {
  if (coords.empty()) throw Error(ErrorCode::kInvalidArgument, "selector needs coordinates");
  check_increasing(coords, "selector");
  return Encoder(SelectorEnc{std::move(coords)});
}

Encoder Encoder::mask(std::vector<std::size_t> coords) {
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  return Encoder(MaskEnc{std::move(coords)});
}

Encoder Encoder::cells(BoundaryGrid grid, std::map<CellIndex, std::int64_t> groups) {
  if (!groups.empty()) {
    if (groups.size() != grid.total_cells()) {
      throw Error(ErrorCode::kInvalidArgument, "cell grouping must cover every cell of its grid");
    }
    for (const auto& [idx, g] : groups) {
      if (idx.size() != grid.dim()) {
        throw Error(ErrorCode::kIndexOutOfRange, "grouping index has wrong arity");
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= grid.cells(k)) {
          throw Error(ErrorCode::kIndexOutOfRange, "grouping index outside the grid");
        }
      }
    }
  }
  return Encoder(CellQuantizerEnc{std::move(grid), std::move(groups)});
}

Encoder Encoder::dyadic(unsigned level, std::size_t dim) {
  if (level < 1 || level > 24) {
    throw Error(ErrorCode::kInvalidArgument, "dyadic level must be in [1, 24]");
  }
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dyadic dimension must be positive");
  return Encoder(DyadicEnc{level, dim});
}

Encoder Encoder::orbit(BoundaryGrid grid) {
  if (!grid.identical_axes()) {
    throw Error(ErrorCode::kHeterogeneousGrids, "orbit encoder needs identical boundary arrays");
  }
  return Encoder(OrbitEnc{std::move(grid)});
}

Encoder Encoder::transform(Eigen::MatrixXd u, std::vector<std::size_t> coords) {
  if (!is_orthonormal(u)) {
    throw Error(ErrorCode::kNotOrthonormal, "transform basis is not orthonormal within 1e-10");
  }
  if (coords.empty()) throw Error(ErrorCode::kInvalidArgument, "transform selector needs coordinates");
  check_increasing(coords, "transform selector");
  if (coords.back() >= static_cast<std::size_t>(u.rows())) {
    throw Error(ErrorCode::kIndexOutOfRange, "transform coordinate exceeds basis dimension");
  }
  return Encoder(TransformSelectorEnc{std::move(u), std::move(coords)});
}

Encoder Encoder::constant() { return Encoder(ConstantEnc{}); }

bool Encoder::discrete_output() const {
  return std::visit(
      Overloaded{[](const SelectorEnc&) { return false; },
                 [](const MaskEnc&) { return false; },
                 [](const TransformSelectorEnc&) { return false; },
                 [](const CompositionEnc& c) { return c.layers.back().discrete_output(); },
                 [](const auto&) { return true; }},
      *v_);
}

std::optional<std::size_t> Encoder::input_dim() const {
  return std::visit(
      Overloaded{[](const CellQuantizerEnc& e) -> std::optional<std::size_t> { return e.grid.dim(); },
                 [](const DyadicEnc& e) -> std::optional<std::size_t> { return e.dim; },
                 [](const OrbitEnc& e) -> std::optional<std::size_t> { return e.grid.dim(); },
                 [](const TransformSelectorEnc& e) -> std::optional<std::size_t> {
                   return static_cast<std::size_t>(e.u.rows());
                 },
                 [](const CompositionEnc& c) { return c.layers.front().input_dim(); },
                 [](const auto&) -> std::optional<std::size_t> { return std::nullopt; }},
      *v_);
}

std::optional<std::size_t> Encoder::output_dim(std::optional<std::size_t> in) const {
  return std::visit(
      Overloaded{[](const SelectorEnc& e) -> std::optional<std::size_t> { return e.coords.size(); },
                 [&](const MaskEnc&) { return in; },
                 [](const TransformSelectorEnc& e) -> std::optional<std::size_t> {
                   return e.coords.size();
                 },
                 [&](const CompositionEnc& c) {
                   auto d = in;
                   for (const auto& l : c.layers) d = l.output_dim(d);
                   return d;
                 },
                 [](const auto&) -> std::optional<std::size_t> { return std::nullopt; }},
      *v_);
}

std::string Encoder::describe() const {
  auto list = [](const std::vector<std::size_t>& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i] + 1);
    return s;
  };
  auto shape = [](const BoundaryGrid& g) {
    std::string s;
    for (std::size_t k = 0; k < g.dim(); ++k) s += (k ? "x" : "") + std::to_string(g.cells(k));
    return s;
  };
  return std::visit(
      Overloaded{
          [&](const SelectorEnc& e) { return "selector(" + list(e.coords) + ")"; },
          [&](const MaskEnc& e) { return "mask(" + list(e.coords) + ")"; },
          [&](const CellQuantizerEnc& e) {
            std::string s = "cells(" + shape(e.grid);
            if (!e.groups.empty()) {
              std::vector<std::int64_t> g;
              for (const auto& kv : e.groups) g.push_back(kv.second);
              std::sort(g.begin(), g.end());
              g.erase(std::unique(g.begin(), g.end()), g.end());
              s += ";groups=" + std::to_string(g.size());
            }
            return s + ")";
          },
          [&](const DyadicEnc& e) {
            return "dyadic(m=" + std::to_string(e.level) + ",d=" + std::to_string(e.dim) + ")";
          },
          [&](const OrbitEnc& e) { return "orbit(" + shape(e.grid) + ")"; },
          [&](const TransformSelectorEnc& e) {
            return "transform(d=" + std::to_string(e.u.rows()) + ";" + list(e.coords) + ")";
          },
          [&](const ConstantEnc&) { return std::string("constant"); },
          [&](const CompositionEnc& c) {
            std::string s = "chain[";
            for (std::size_t i = 0; i < c.layers.size(); ++i) {
              s += (i ? ">" : "") + c.layers[i].describe();
            }
            return s + "]";
          }},
      *v_);
}

// ---------------------------------------------------------------------------
// Pointwise application

Representation apply(const Encoder& enc, std::span<const double> x) {
  return std::visit(
      Overloaded{
          [&](const SelectorEnc& e) -> Representation {
            std::vector<double> out;
            for (auto c : e.coords) {
              if (c >= x.size()) {
                throw Error(ErrorCode::kDimensionMismatch,
                            "selector coordinate " + std::to_string(c + 1) + " exceeds dimension " +
                                std::to_string(x.size()));
              }
              out.push_back(x[c]);
            }
            return out;
          },
          [&](const MaskEnc& e) -> Representation {
            std::vector<double> out(x.begin(), x.end());
            for (auto c : e.coords) {
              if (c >= x.size()) throw Error(ErrorCode::kDimensionMismatch, "mask coordinate");
              out[c] = 0.0;
            }
            return out;
          },
          [&](const TransformSelectorEnc& e) -> Representation {
            require_dim(x.size(), static_cast<std::size_t>(e.u.rows()), "transform selector");
            Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
            Eigen::VectorXd z = e.u.transpose() * v;
            std::vector<double> out;
            for (auto c : e.coords) out.push_back(z(static_cast<Eigen::Index>(c)));
            return out;
          },
          [&](const CellQuantizerEnc& e) -> Representation {
            require_dim(x.size(), e.grid.dim(), "cell quantizer");
            std::vector<std::int64_t> keys;
            for (std::size_t k = 0; k < x.size(); ++k) keys.push_back(extended_index(e.grid.edges(k), x[k]));
            if (!e.groups.empty()) {
              CellIndex idx;
              bool inner = true;
              for (std::size_t k = 0; k < keys.size(); ++k) {
                if (keys[k] < 1 || keys[k] > static_cast<std::int64_t>(e.grid.cells(k))) {
                  inner = false;
                  break;
                }
                idx.push_back(static_cast<std::size_t>(keys[k] - 1));
              }
              if (inner) return Label{0, e.groups.at(idx)};
            }
            Label l{1};
            l.insert(l.end(), keys.begin(), keys.end());
            return l;
          },
          [&](const DyadicEnc& e) -> Representation {
            require_dim(x.size(), e.dim, "dyadic quantizer");
            const double m = static_cast<double>(e.level);
            const double scale = std::ldexp(1.0, static_cast<int>(e.level));
            Label l;
            for (double v : x) {
              if (!(v >= -m && v < m)) return Label{kOuterKey};
              l.push_back(static_cast<std::int64_t>(std::floor(v * scale)));
            }
            return l;
          },
          [&](const OrbitEnc& e) -> Representation {
            require_dim(x.size(), e.grid.dim(), "orbit encoder");
            Label l;
            for (std::size_t k = 0; k < x.size(); ++k) l.push_back(extended_index(e.grid.edges(k), x[k]));
            std::sort(l.begin(), l.end());
            return l;
          },
          [&](const ConstantEnc&) -> Representation { return Label{0}; },
          [&](const CompositionEnc& c) -> Representation {
            std::vector<double> cur(x.begin(), x.end());
            for (std::size_t i = 0; i < c.layers.size(); ++i) {
              auto r = infolab::apply(c.layers[i], std::span<const double>(cur));
              if (i + 1 == c.layers.size()) return r;
              cur = std::get<std::vector<double>>(std::move(r));
            }
            return cur;
          }},
      enc.variant());
}

std::vector<double> apply_continuous(const Encoder& enc, std::span<const double> x) {
  if (enc.discrete_output()) {
    throw Error(ErrorCode::kShapeMismatch, enc.describe() + " does not produce a real vector");
  }
  return std::get<std::vector<double>>(infolab::apply(enc, x));
}

// ---------------------------------------------------------------------------
// Families and composition

std::vector<Encoder> dyadic_family(std::size_t dim, unsigned max_level) {
  if (max_level < 1) throw Error(ErrorCode::kInvalidArgument, "max level must be at least 1");
  std::vector<Encoder> out;
  for (unsigned m = 1; m <= max_level; ++m) out.push_back(Encoder::dyadic(m, dim));
  return out;
}

Encoder orbit_encoder(const HistogramModel& model) { return Encoder::orbit(model.grid()); }

Encoder compose(std::vector<Encoder> layers) {
  if (layers.empty()) throw Error(ErrorCode::kShapeMismatch, "composition needs at least one layer");
  if (layers.size() == 1) return layers.front();
  std::vector<Encoder> flat;
  for (auto& l : layers) {
    if (const auto* c = std::get_if<CompositionEnc>(&l.variant())) {
      flat.insert(flat.end(), c->layers.begin(), c->layers.end());
    } else {
      flat.push_back(std::move(l));
    }
  }
  std::optional<std::size_t> dim = flat.front().input_dim();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (i + 1 < flat.size() && flat[i].discrete_output()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer " + std::to_string(i + 1) + " (" + flat[i].describe() +
                      ") emits labels but is followed by another layer");
    }
    auto need = flat[i].input_dim();
    if (i > 0 && need && dim && *need != *dim) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer " + std::to_string(i + 1) + " expects dimension " + std::to_string(*need) +
                      " but receives " + std::to_string(*dim));
    }
    if (const auto* s = std::get_if<SelectorEnc>(&flat[i].variant()); s && dim &&
                                                                    s->coords.back() >= *dim) {
      throw Error(ErrorCode::kShapeMismatch,
                  "selector in layer " + std::to_string(i + 1) + " exceeds dimension " +
                      std::to_string(*dim));
    }
    dim = flat[i].output_dim(i == 0 ? flat[i].input_dim() : dim);
  }
  return Encoder(CompositionEnc{std::move(flat)});
}

std::vector<Encoder> prefixes(const Encoder& enc) {
  const auto* c = std::get_if<CompositionEnc>(&enc.variant());
  if (!c) return {enc};
  std::vector<Encoder> out;
  for (std::size_t k = 1; k <= c->layers.size(); ++k) {
    out.push_back(compose({c->layers.begin(), c->layers.begin() + static_cast<std::ptrdiff_t>(k)}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact cell images

Box cell_box(const BoundaryGrid& grid, std::size_t cell) {
  CellIndex idx = grid.unflatten(cell);
  Box box(grid.dim());
  for (std::size_t k = 0; k < grid.dim(); ++k) box[k] = {grid.lower(k, idx[k]), grid.upper(k, idx[k])};
  return box;
}

double volume_fraction(const Box& sub, const Box& cell) {
  double f = 1.0;
  for (std::size_t k = 0; k < cell.size(); ++k) {
    if (cell[k].point()) continue;
    f *= sub[k].length() / cell[k].length();
  }
  return f;
}

std::vector<ImagePiece> cell_image(const Encoder& enc, const HistogramModel& model,
                                   std::size_t cell) {
  State s;
  s.current = cell_box(model.grid(), cell);
  s.pre = s.current;
  s.origin.resize(model.dim());
  for (std::size_t k = 0; k < model.dim(); ++k) s.origin[k] = static_cast<int>(k);
  s.frame = model.rotation() ? &*model.rotation() : nullptr;

  std::vector<Encoder> layers;
  if (const auto* c = std::get_if<CompositionEnc>(&enc.variant())) {
    layers = c->layers;
  } else {
    layers = {enc};
  }
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) s = step_continuous(layers[i], std::move(s));
  const Encoder& last = layers.back();
  if (last.discrete_output()) {
    if (s.frame && !std::holds_alternative<ConstantEnc>(last.variant())) {
      throw Error(ErrorCode::kNotExactlyComputable,
                  last.describe() + " on a rotated model has no exact image");
    }
    return step_discrete(last, s);
  }
  s = step_continuous(last, std::move(s));
  if (s.frame) {
    throw Error(ErrorCode::kNotExactlyComputable,
                "continuous encoder output on a rotated model has no exact image");
  }
  ImagePiece piece{box_label(s.current), s.pre, s.current};
  return {std::move(piece)};
}

}  // namespace infolab
