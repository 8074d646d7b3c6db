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

#include "infolab/ib_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infolab/error.hpp"
#include "infolab/infocalc.hpp"

namespace infolab {

namespace {

constexpr double kFeasibleSlack = 1e-9;
constexpr double kTie = 1e-12;

struct Alphabet {
  std::vector<CellIndex> cells;
  std::vector<std::vector<double>> rows;  // q(i, y)
  std::vector<double> prior;
};

Alphabet positive_alphabet(const HistogramModel& model) {
  Alphabet a;
  const auto& joint = model.joint();
  a.prior = joint.prior();
  for (std::size_t c = 0; c < joint.cells(); ++c) {
    if (!(joint.cell_mass(c) > 0.0)) continue;
    a.cells.push_back(model.grid().unflatten(c));
    std::vector<double> row(joint.classes());
    for (std::size_t y = 0; y < row.size(); ++y) row[y] = joint.joint(c, y);
    a.rows.push_back(std::move(row));
  }
  return a;
}

double mass(const std::vector<double>& row) {
  double s = 0.0;
  for (double v : row) s += v;
  return s;
}

// Contribution of one group to I(U;Y).
double info_term(const std::vector<double>& row, const std::vector<double>& prior) {
  double q = mass(row);
  double t = 0.0;
  for (std::size_t y = 0; y < row.size(); ++y) {
    if (row[y] > 0.0) t += row[y] * std::log2(row[y] / (q * prior[y]));
  }
  return t;
}

double entropy_term(double q) { return q > 0.0 ? -q * std::log2(q) : 0.0; }

void require_bound(double bound) {
  if (!(bound >= 0.0) || std::isnan(bound)) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth bound must be non-negative");
  }
}

IBPoint make_point(const HistogramModel& model, const Alphabet& a, double bound,
                   const std::vector<std::size_t>& assignment) {
  IBPoint p;
  p.bound = bound;
  p.cells = a.cells;
  // Relabel groups by first appearance.
  std::vector<std::size_t> relabel(assignment.size(), std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (auto g : assignment) {
    if (relabel[g] == std::numeric_limits<std::size_t>::max()) relabel[g] = next++;
    p.group.push_back(relabel[g]);
  }
  p.groups = next;
  std::vector<std::vector<double>> rows(next, std::vector<double>(a.prior.size(), 0.0));
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    for (std::size_t y = 0; y < a.prior.size(); ++y) rows[p.group[i]][y] += a.rows[i][y];
  }
  for (const auto& r : rows) {
    p.h_u += entropy_term(mass(r));
    p.i_uy += info_term(r, a.prior);
  }
  p.loss = mutual_information(model) - p.i_uy;
  return p;
}

}  // namespace

const char* solver_name(IBSolver solver) {
  return solver == IBSolver::kGreedy ? "greedy" : "exhaustive";
}

IBPoint ib_exhaustive(const HistogramModel& model, double bound) {
  require_bound(bound);
  Alphabet a = positive_alphabet(model);
  const std::size_t n = a.cells.size();
  if (n > kExhaustiveLimit) {
    throw Error(ErrorCode::kTooLarge, std::to_string(n) + " positive cells exceed the enumeration budget of " +
                                          std::to_string(kExhaustiveLimit));
  }
  const std::size_t m = a.prior.size();
  // Restricted growth strings enumerate set partitions in lexicographic order.
  std::vector<std::size_t> rgs(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);
  std::vector<std::size_t> best;
  double best_info = -1.0;
  std::size_t best_groups = 0;
  std::vector<std::vector<double>> rows(n, std::vector<double>(m));
  while (true) {
    std::size_t groups = n ? prefix_max[n - 1] + 1 : 0;
    for (std::size_t g = 0; g < groups; ++g) std::fill(rows[g].begin(), rows[g].end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t y = 0; y < m; ++y) rows[rgs[i]][y] += a.rows[i][y];
    }
    double h = 0.0;
    double info = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
      h += entropy_term(mass(rows[g]));
      info += info_term(rows[g], a.prior);
    }
    if (h <= bound + kFeasibleSlack) {
      bool better = info > best_info + kTie ||
                    (std::abs(info - best_info) <= kTie && groups < best_groups);
      if (best.empty() || better) {
        best = rgs;
        best_info = info;
        best_groups = groups;
      }
    }
    // Next restricted growth string.
    std::size_t i = n;
    while (i-- > 1) {
      if (rgs[i] <= prefix_max[i - 1]) break;
    }
    if (i == 0 || n <= 1) break;
    ++rgs[i];
    prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      rgs[j] = 0;
      prefix_max[j] = prefix_max[j - 1];
    }
  }
  return make_point(model, a, bound, best);
}

IBPoint ib_greedy(const HistogramModel& model, double bound, std::vector<double>* merge_losses) {
  require_bound(bound);
  Alphabet a = positive_alphabet(model);
  const std::size_t n = a.cells.size();
  const std::size_t m = a.prior.size();
  // Live groups keyed by the lowest member index, which serves as the label.
  std::vector<std::size_t> owner(n);
  std::vector<std::vector<double>> rows = a.rows;
  std::vector<bool> alive(n, true);
  for (std::size_t i = 0; i < n; ++i) owner[i] = i;
  double h = 0.0;
  for (const auto& r : rows) h += entropy_term(mass(r));
  std::vector<double> merged(m);

  while (h > bound + kFeasibleSlack) {
    std::size_t best_a = n, best_b = n;
    double best_di = 0.0, best_dh = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!alive[j]) continue;
        for (std::size_t y = 0; y < m; ++y) merged[y] = rows[i][y] + rows[j][y];
        double di = info_term(rows[i], a.prior) + info_term(rows[j], a.prior) -
                    info_term(merged, a.prior);
        double dh = entropy_term(mass(merged)) - entropy_term(mass(rows[i])) -
                    entropy_term(mass(rows[j]));
        bool take = best_a == n || di < best_di - kTie ||
                    (std::abs(di - best_di) <= kTie && dh < best_dh - kTie);
        if (take) {
          best_a = i;
          best_b = j;
          best_di = di;
          best_dh = dh;
        }
      }
    }
    if (best_a == n) break;
    for (std::size_t y = 0; y < m; ++y) rows[best_a][y] += rows[best_b][y];
    alive[best_b] = false;
    for (auto& o : owner) {
      if (o == best_b) o = best_a;
    }
    h += best_dh;
    if (merge_losses) merge_losses->push_back(best_di);
  }
  return make_point(model, a, bound, owner);
}

IBCurve ib_curve(const HistogramModel& model, std::vector<double> bounds, IBSolver solver) {
  if (bounds.empty()) throw Error(ErrorCode::kInvalidArgument, "bound list is empty");
  std::sort(bounds.begin(), bounds.end());
  IBCurve curve;
  curve.solver = solver;
  for (double b : bounds) {
    curve.points.push_back(solver == IBSolver::kGreedy ? ib_greedy(model, b) : ib_exhaustive(model, b));
  }
  return curve;
}

}  // namespace infolab
