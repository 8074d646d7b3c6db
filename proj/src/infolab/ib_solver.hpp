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

// Deterministic information bottleneck over groupings of a model's cell
// alphabet: maximize I(U;Y) subject to H(U) <= B, where U labels the group
// of the cell containing X.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "infolab/model.hpp"

namespace infolab {

enum class IBSolver { kGreedy, kExhaustive };

const char* solver_name(IBSolver solver);

struct IBPoint {
  double bound = 0.0;      // B, bits
  double h_u = 0.0;        // achieved H(U)
  double i_uy = 0.0;       // achieved I(U;Y)
  double loss = 0.0;       // I(X;Y) - I(U;Y)
  std::vector<CellIndex> cells;    // positive-mass cells, flat order
  std::vector<std::size_t> group;  // group of each cell, first-appearance order
  std::size_t groups = 0;
};

struct IBCurve {
  IBSolver solver = IBSolver::kGreedy;
  std::vector<IBPoint> points;  // sorted by bound
};

inline constexpr std::size_t kExhaustiveLimit = 10;

// Global optimum by set-partition enumeration; at most kExhaustiveLimit
// positive cells. Ties go to fewer groups, then the lexicographically
// smallest grouping.
IBPoint ib_exhaustive(const HistogramModel& model, double bound);

// Agglomerative merging from the full cell partition. Each step merges the
// pair with the smallest loss of I(U;Y), ties broken by the larger drop in
// H(U) and then by the lowest label pair. When merge_losses is given it
// receives the I(U;Y) loss of every merge performed.
IBPoint ib_greedy(const HistogramModel& model, double bound,
                  std::vector<double>* merge_losses = nullptr);

IBCurve ib_curve(const HistogramModel& model, std::vector<double> bounds, IBSolver solver);

}  // namespace infolab
