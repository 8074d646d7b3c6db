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

// Experiment orchestration: the study models with their self-check, the
// training matrix, the dyadic and IB sweeps, and the exact-measure table.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "infolab/ib_solver.hpp"
#include "infolab/learner.hpp"
#include "infolab/model.hpp"

namespace infolab {

struct StudyModels {
  HistogramModel full;       // informative coordinates 1, 3, 5 plus noise
  HistogramModel masked1;    // coordinate 1 masked
  HistogramModel masked135;  // coordinates 1, 3 and 5 masked
};

struct StudyCheck {
  double mi[3] = {0, 0, 0};
  double cond_entropy[3] = {0, 0, 0};
  double class_entropy = 0.0;
  double selector_mil = 0.0;  // MIL of the 1..5 selector on the full model
};

// Reference values the study models must reproduce.
inline constexpr double kStudyMI[3] = {1.182, 0.532, 0.0};
inline constexpr double kStudyCondEntropy[3] = {0.303532, 0.952762, 1.485475};
inline constexpr double kStudyClassEntropy = 1.485475;

// Throws SelfCheckFailed when a checked value deviates by more than 1e-3.
StudyModels build_study_models(StudyCheck* check = nullptr);

// The IS pre-encoder of the study: coordinates 1..5.
Encoder study_pre_encoder();

struct Fig2Spec {
  std::vector<std::string> models{"study", "study-masked1", "study-masked135"};
  std::vector<std::string> archs{"mlp32", "mlp256", "mlp1024"};
  std::vector<std::size_t> ns{2780, 21500, 59900};
  std::vector<bool> pre_encoder{false, true};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t epochs = 30;
  std::size_t validation_size = 100000;
  std::size_t batch_size = 0;  // 0: scheduled
  std::size_t workers = 1;
};

Fig2Spec desk_fig2_spec();
Fig2Spec full_fig2_spec();

struct Fig2Run {
  std::string model_id;
  std::string arch;
  std::size_t n = 0;
  bool pre_encoder = false;
  std::uint64_t seed = 0;
  double href_bits = 0.0;
  std::vector<EpochRecord> epochs;
};

struct Fig2Result {
  std::vector<Fig2Run> runs;  // spec order: model, arch, n, pre_encoder, seed
  std::string fig2_csv;       // seed-averaged per-epoch rows
  std::string runs_csv;       // per-seed rows
};

using ProgressFn = std::function<void(const Fig2Run&)>;

Fig2Result run_fig2(const Fig2Spec& spec, const ProgressFn& progress = {});

struct SweepSpec {
  std::vector<std::string> dyadic_models{"2d-singular", "2d-demonstration", "3d-equiprobable",
                                         "3d-demonstration"};
  unsigned dyadic_max_level = 4;
  std::vector<std::string> ib_models{"2d-singular", "2d-demonstration", "study-marginal"};
  std::size_t ib_steps = 20;  // B grid 0..H(I) in this many steps
};

struct SweepResult {
  std::string dyadic_csv;
  std::string ib_csv;
};

// "study-marginal" names the study model reduced to coordinates 1..5.
HistogramModel sweep_model(const std::string& id);

SweepResult run_expressiveness_sweeps(const SweepSpec& spec);

// Exact-measure table over the built-in models.
std::string measures_csv();

// JSON experiment spec: {"kind": "fig2"|"sweeps", ...}; unknown keys are
// rejected.
Fig2Spec parse_fig2_spec(const std::string& json_text, bool full_defaults);
SweepSpec parse_sweep_spec(const std::string& json_text);

// Entropy of the cell index, H(I), in bits.
double cell_entropy(const HistogramModel& model);

// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace infolab
