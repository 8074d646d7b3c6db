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

// Exact information measures on finite tables induced by histogram models
// and encoders, plus Monte-Carlo risk estimators for arbitrary predictors.
// All values are in bits.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "infolab/encoders.hpp"
#include "infolab/model.hpp"

namespace infolab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Units { kBits, kNats };

// Process-wide output unit for reports; computations always use bits.
void set_output_units(Units units);
Units output_units();
double to_output_units(double bits);
const char* units_suffix();

// Joint table q(u, y) over representation symbols and classes.
struct JointPMF {
  std::vector<Label> symbols;
  std::size_t classes = 0;
  std::vector<double> table;  // symbols.size() x classes

  double q(std::size_t u, std::size_t y) const { return table[u * classes + y]; }
  std::vector<double> symbol_marginal() const;
  std::vector<double> class_marginal() const;
};

// Predictive pmf v(.|u) per symbol.
struct DecoderTable {
  std::size_t classes = 0;
  std::map<Label, std::vector<double>> rows;
};

struct RiskDecomposition {
  double total = 0.0;
  double conditional_entropy = 0.0;
  double encoder_effect = 0.0;
  double decoder_effect = 0.0;
  bool support_violation = false;  // total and decoder_effect are +inf
};

double entropy(std::span<const double> p);

// D(p || q); +inf when p is not absolutely continuous w.r.t. q.
double kl(std::span<const double> p, std::span<const double> q);

// Full cell table (i, y) of the model, one symbol per cell with positive mass.
JointPMF cell_joint(const HistogramModel& model);

JointPMF pushforward(const HistogramModel& model, const Encoder& enc);

double mi(const JointPMF& joint);

double class_entropy(const HistogramModel& model);
double mutual_information(const HistogramModel& model);
double conditional_entropy(const HistogramModel& model);

// Closed-form I(eta_j(X); Y) by marginalizing p_{i|y} onto the selected axes.
double mi_selector(const HistogramModel& model, std::span<const std::size_t> coords);

// I(X;Y) - I(eta(X);Y) = I(X;Y|U).
double mil(const HistogramModel& model, const Encoder& enc);

// KL projection error onto the class of models that factor through eta;
// equal to mil by the chain rule.
double ip_error(const HistogramModel& model, const Encoder& enc);

DecoderTable optimal_decoder(const HistogramModel& model, const Encoder& enc);

RiskDecomposition risk_exact(const HistogramModel& model, const Encoder& enc,
                             const DecoderTable& dec);

// Per-layer losses (I(X;Y|U1), I(U1;Y|U2), ...) for a chain in which each
// encoder is a function of the previous one's output.
std::vector<double> layer_losses(const HistogramModel& model, const std::vector<Encoder>& chain);

// Maps `rows` inputs (row-major, model dimension) to rows x M pmfs.
using BatchPredictor =
    std::function<void(std::span<const double> xs, std::size_t rows, std::span<double> out)>;

BatchPredictor posterior_predictor(const HistogramModel& model);
BatchPredictor uniform_predictor(std::size_t classes);
BatchPredictor table_predictor(const Encoder& enc, const DecoderTable& dec);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  bool support_violation = false;
};

// -(1/n) sum log2 v(Y_i | X_i) on fresh samples.
Estimate mc_risk(const HistogramModel& model, const BatchPredictor& predictor, std::size_t n,
                 std::uint64_t seed);

// (1/n) sum D(mu_{Y|X}(.|X_i) || v(.|X_i)); same samples as mc_risk for a seed.
Estimate mc_gap(const HistogramModel& model, const BatchPredictor& predictor, std::size_t n,
                std::uint64_t seed);

}  // namespace infolab
