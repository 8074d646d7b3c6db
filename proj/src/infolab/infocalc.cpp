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

#include "infolab/infocalc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <set>

#include "infolab/error.hpp"

namespace infolab {

namespace {

std::atomic<Units> g_units{Units::kBits};

constexpr std::size_t kChunk = 8192;

void check_pmf(std::span<const double> p, double tol, const char* what) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kNegativeProbability, std::string(what) + " has a negative entry");
    s += v;
  }
  if (std::abs(s - 1.0) > tol) {
    throw Error(ErrorCode::kProbabilityNotNormalized,
                std::string(what) + " sums to " + std::to_string(s));
  }
}

// True when the interiors of two output boxes intersect.
bool overlaps(const Box& a, const Box& b) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].point() && b[k].point()) {
      if (a[k].lo != b[k].lo) return false;
    } else if (a[k].point()) {
      if (!(a[k].lo >= b[k].lo && a[k].lo < b[k].hi)) return false;
    } else if (b[k].point()) {
      if (!(b[k].lo >= a[k].lo && b[k].lo < a[k].hi)) return false;
    } else if (!(std::max(a[k].lo, b[k].lo) < std::min(a[k].hi, b[k].hi))) {
      return false;
    }
  }
  return true;
}

bool positive_overlap(const Box& a, const Box& b, const Box& cell) {
  for (std::size_t k = 0; k < cell.size(); ++k) {
    if (cell[k].point()) continue;
    if (!(std::max(a[k].lo, b[k].lo) < std::min(a[k].hi, b[k].hi))) return false;
  }
  return true;
}

std::vector<std::size_t> positive_cells(const HistogramModel& model) {
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < model.joint().cells(); ++c) {
    if (model.joint().cell_mass(c) > 0.0) cells.push_back(c);
  }
  return cells;
}

double row_cross_entropy_bits(std::span<const double> v, std::size_t y) {
  return v[y] > 0.0 ? -std::log2(v[y]) : kInfinity;
}

template <class PerSample>
Estimate monte_carlo(const HistogramModel& model, const BatchPredictor& predictor, std::size_t n,
                     std::uint64_t seed, PerSample&& per_sample) {
  if (n == 0) throw Error(ErrorCode::kInvalidCount, "Monte-Carlo size must be at least 1");
  Sampler sampler(model, seed);
  const std::size_t m = model.classes();
  const std::size_t d = model.dim();
  std::vector<double> xs;
  std::vector<int> ys;
  std::vector<double> out;
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;
  bool violation = false;
  for (std::size_t done = 0; done < n;) {
    std::size_t rows = std::min(kChunk, n - done);
    sampler.draw_into(rows, xs, ys);
    out.assign(rows * m, 0.0);
    predictor(xs, rows, out);
    for (std::size_t r = 0; r < rows; ++r) {
      std::span<const double> x(xs.data() + r * d, d);
      std::span<const double> v(out.data() + r * m, m);
      double loss = per_sample(x, static_cast<std::size_t>(ys[r]), v);
      if (std::isinf(loss)) {
        violation = true;
        continue;
      }
      ++count;
      double delta = loss - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (loss - mean);
    }
    done += rows;
  }
  Estimate est;
  est.n = n;
  est.support_violation = violation;
  if (violation) {
    est.value = kInfinity;
    est.std_error = kInfinity;
    return est;
  }
  est.value = mean;
  est.std_error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return est;
}

}  // namespace

void set_output_units(Units units) { g_units.store(units); }
Units output_units() { return g_units.load(); }

double to_output_units(double bits) {
  return output_units() == Units::kNats ? bits * std::numbers::ln2 : bits;
}

const char* units_suffix() { return output_units() == Units::kNats ? "nats" : "bits"; }

std::vector<double> JointPMF::symbol_marginal() const {
  std::vector<double> out(symbols.size(), 0.0);
  for (std::size_t u = 0; u < symbols.size(); ++u) {
    for (std::size_t y = 0; y < classes; ++y) out[u] += q(u, y);
  }
  return out;
}

std::vector<double> JointPMF::class_marginal() const {
  std::vector<double> out(classes, 0.0);
  for (std::size_t u = 0; u < symbols.size(); ++u) {
    for (std::size_t y = 0; y < classes; ++y) out[y] += q(u, y);
  }
  return out;
}

double entropy(std::span<const double> p) {
  check_pmf(p, 1e-10, "pmf");
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return std::max(h, 0.0);  // a lone mass of 1 + 1e-16 gives a tiny negative sum
}

double kl(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::kDimensionMismatch, "kl operands differ in size");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInfinity;
    d += p[i] * std::log2(p[i] / q[i]);
  }
  return d;
}

JointPMF cell_joint(const HistogramModel& model) {
  const auto& joint = model.joint();
  const auto& grid = model.grid();
  JointPMF out;
  out.classes = joint.classes();
  for (auto c : positive_cells(model)) {
    CellIndex idx = grid.unflatten(c);
    out.symbols.emplace_back(idx.begin(), idx.end());
    for (std::size_t y = 0; y < out.classes; ++y) out.table.push_back(joint.joint(c, y));
  }
  return out;
}

JointPMF pushforward(const HistogramModel& model, const Encoder& enc) {
  const auto& joint = model.joint();
  const std::size_t m = joint.classes();
  std::map<Label, std::vector<double>> acc;
  std::map<Label, Box> boxes;
  for (auto c : positive_cells(model)) {
    Box cell = cell_box(model.grid(), c);
    for (auto& piece : cell_image(enc, model, c)) {
      double frac = volume_fraction(piece.preimage, cell);
      if (!(frac > 0.0)) continue;
      auto& row = acc[piece.label];
      row.resize(m, 0.0);
      for (std::size_t y = 0; y < m; ++y) row[y] += frac * joint.joint(c, y);
      if (piece.output_box) boxes.emplace(piece.label, *piece.output_box);
    }
  }
  // Continuous outputs are exact only when distinct output boxes are disjoint.
  for (auto a = boxes.begin(); a != boxes.end(); ++a) {
    for (auto b = std::next(a); b != boxes.end(); ++b) {
      if (overlaps(a->second, b->second)) {
        throw Error(ErrorCode::kNotExactlyComputable,
                    enc.describe() + " maps cells onto partially overlapping regions");
      }
    }
  }
  JointPMF out;
  out.classes = m;
  for (auto& [label, row] : acc) {
    out.symbols.push_back(label);
    out.table.insert(out.table.end(), row.begin(), row.end());
  }
  return out;
}

double mi(const JointPMF& joint) {
  check_pmf(joint.table, 1e-10, "joint table");
  auto pu = joint.symbol_marginal();
  auto py = joint.class_marginal();
  double info = 0.0;
  for (std::size_t u = 0; u < joint.symbols.size(); ++u) {
    for (std::size_t y = 0; y < joint.classes; ++y) {
      double q = joint.q(u, y);
      if (q > 0.0) info += q * std::log2(q / (pu[u] * py[y]));
    }
  }
  return info;
}

double class_entropy(const HistogramModel& model) { return entropy(model.joint().prior()); }

double mutual_information(const HistogramModel& model) { return mi(cell_joint(model)); }

double conditional_entropy(const HistogramModel& model) {
  return class_entropy(model) - mutual_information(model);
}

double mi_selector(const HistogramModel& model, std::span<const std::size_t> coords) {
  if (coords.empty()) throw Error(ErrorCode::kInvalidArgument, "empty coordinate list");
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] >= model.dim() || (i > 0 && coords[i] <= coords[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "coordinates must be strictly increasing within [1," + std::to_string(model.dim()) + "]");
    }
  }
  if (model.rotation()) {
    throw Error(ErrorCode::kNotExactlyComputable,
                "coordinate selectors on a rotated model have no closed form; use a transform selector");
  }
  const auto& grid = model.grid();
  const auto& joint = model.joint();
  const std::size_t m = joint.classes();
  BoundaryGrid sub = grid.restrict_to(coords);
  // p_{(s|y)_j}: conditional pmf marginalized onto the selected axes.
  std::vector<double> marg(sub.total_cells() * m, 0.0);
  CellIndex s(coords.size());
  for (std::size_t c = 0; c < grid.total_cells(); ++c) {
    CellIndex idx = grid.unflatten(c);
    for (std::size_t l = 0; l < coords.size(); ++l) s[l] = idx[coords[l]];
    std::size_t sc = sub.flatten(s);
    for (std::size_t y = 0; y < m; ++y) marg[sc * m + y] += joint.conditional(c, y);
  }
  const auto& prior = joint.prior();
  double info = 0.0;
  for (std::size_t sc = 0; sc < sub.total_cells(); ++sc) {
    double mix = 0.0;
    for (std::size_t l = 0; l < m; ++l) mix += prior[l] * marg[sc * m + l];
    for (std::size_t y = 0; y < m; ++y) {
      double p = marg[sc * m + y];
      if (prior[y] > 0.0 && p > 0.0) info += prior[y] * p * std::log2(p / mix);
    }
  }
  return info;
}

double mil(const HistogramModel& model, const Encoder& enc) {
  return mutual_information(model) - mi(pushforward(model, enc));
}

double ip_error(const HistogramModel& model, const Encoder& enc) { return mil(model, enc); }

DecoderTable optimal_decoder(const HistogramModel& model, const Encoder& enc) {
  JointPMF joint = pushforward(model, enc);
  DecoderTable dec;
  dec.classes = joint.classes;
  auto pu = joint.symbol_marginal();
  for (std::size_t u = 0; u < joint.symbols.size(); ++u) {
    std::vector<double> row(joint.classes);
    for (std::size_t y = 0; y < joint.classes; ++y) row[y] = joint.q(u, y) / pu[u];
    dec.rows.emplace(joint.symbols[u], std::move(row));
  }
  return dec;
}

RiskDecomposition risk_exact(const HistogramModel& model, const Encoder& enc,
                             const DecoderTable& dec) {
  JointPMF joint = pushforward(model, enc);
  if (dec.classes != joint.classes) {
    throw Error(ErrorCode::kDimensionMismatch, "decoder class count differs from the model");
  }
  auto pu = joint.symbol_marginal();
  RiskDecomposition r;
  r.conditional_entropy = conditional_entropy(model);
  r.encoder_effect = mutual_information(model) - mi(joint);
  std::vector<double> post(joint.classes);
  for (std::size_t u = 0; u < joint.symbols.size(); ++u) {
    auto it = dec.rows.find(joint.symbols[u]);
    if (it == dec.rows.end()) {
      throw Error(ErrorCode::kInvalidArgument, "decoder has no row for a positive-mass symbol");
    }
    const auto& v = it->second;
    for (std::size_t y = 0; y < joint.classes; ++y) {
      double q = joint.q(u, y);
      post[y] = q / pu[u];
      if (q > 0.0) {
        if (v[y] <= 0.0) {
          r.support_violation = true;
        } else {
          r.total -= q * std::log2(v[y]);
        }
      }
    }
    if (!r.support_violation) r.decoder_effect += pu[u] * kl(post, v);
  }
  if (r.support_violation) {
    r.total = kInfinity;
    r.decoder_effect = kInfinity;
  }
  return r;
}

std::vector<double> layer_losses(const HistogramModel& model, const std::vector<Encoder>& chain) {
  if (chain.empty()) throw Error(ErrorCode::kInvalidArgument, "empty encoder chain");
  // Coarsening check: every symbol of layer k meets exactly one symbol of
  // layer k + 1 on positive volume.
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    std::map<Label, std::set<Label>> fibers;
    for (auto c : positive_cells(model)) {
      Box cell = cell_box(model.grid(), c);
      auto fine = cell_image(chain[k], model, c);
      auto coarse = cell_image(chain[k + 1], model, c);
      for (const auto& a : fine) {
        if (!(volume_fraction(a.preimage, cell) > 0.0)) continue;
        for (const auto& b : coarse) {
          if (positive_overlap(a.preimage, b.preimage, cell)) fibers[a.label].insert(b.label);
        }
      }
    }
    for (const auto& [label, images] : fibers) {
      if (images.size() > 1) {
        throw Error(ErrorCode::kNotACoarsening,
                    "layer " + std::to_string(k + 2) + " (" + chain[k + 1].describe() +
                        ") is not constant on the fibers of layer " + std::to_string(k + 1));
      }
    }
  }
  std::vector<double> losses;
  double prev = mutual_information(model);
  for (const auto& enc : chain) {
    double cur = mi(pushforward(model, enc));
    losses.push_back(prev - cur);
    prev = cur;
  }
  return losses;
}

BatchPredictor posterior_predictor(const HistogramModel& model) {
  return [&model](std::span<const double> xs, std::size_t rows, std::span<double> out) {
    const std::size_t d = model.dim();
    const std::size_t m = model.classes();
    for (std::size_t r = 0; r < rows; ++r) {
      auto p = true_posterior(model, xs.subspan(r * d, d));
      std::copy(p.begin(), p.end(), out.begin() + static_cast<std::ptrdiff_t>(r * m));
    }
  };
}

BatchPredictor uniform_predictor(std::size_t classes) {
  return [classes](std::span<const double>, std::size_t rows, std::span<double> out) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(rows * classes),
              1.0 / static_cast<double>(classes));
  };
}

BatchPredictor table_predictor(const Encoder& enc, const DecoderTable& dec) {
  if (!enc.discrete_output()) {
    throw Error(ErrorCode::kShapeMismatch, "table predictors need an encoder with discrete output");
  }
  return [enc, dec](std::span<const double> xs, std::size_t rows, std::span<double> out) {
    const std::size_t d = xs.size() / rows;
    const std::size_t m = dec.classes;
    for (std::size_t r = 0; r < rows; ++r) {
      auto label = std::get<Label>(infolab::apply(enc, xs.subspan(r * d, d)));
      auto it = dec.rows.find(label);
      if (it == dec.rows.end()) {
        throw Error(ErrorCode::kInvalidArgument, "decoder has no row for an observed symbol");
      }
      std::copy(it->second.begin(), it->second.end(), out.begin() + static_cast<std::ptrdiff_t>(r * m));
    }
  };
}

Estimate mc_risk(const HistogramModel& model, const BatchPredictor& predictor, std::size_t n,
                 std::uint64_t seed) {
  return monte_carlo(model, predictor, n, seed,
                     [](std::span<const double>, std::size_t y, std::span<const double> v) {
                       return row_cross_entropy_bits(v, y);
                     });
}

Estimate mc_gap(const HistogramModel& model, const BatchPredictor& predictor, std::size_t n,
                std::uint64_t seed) {
  return monte_carlo(model, predictor, n, seed,
                     [&model](std::span<const double> x, std::size_t, std::span<const double> v) {
                       auto post = true_posterior(model, x);
                       return kl(post, v);
                     });
}

}  // namespace infolab
