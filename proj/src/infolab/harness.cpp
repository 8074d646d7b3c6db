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

#include "infolab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "infolab/error.hpp"
#include "infolab/infocalc.hpp"
#include "infolab/model_io.hpp"

namespace infolab {
namespace {

constexpr double kSelfCheckTol = 1e-3;

void expect_close(const char* what, double got, double want) {
  if (!(std::abs(got - want) <= kSelfCheckTol)) {
    throw Error(ErrorCode::kSelfCheckFailed, std::string(what) + " = " + format_double(got) +
                                                 ", expected " + format_double(want));
  }
}

std::string join_row(std::initializer_list<std::string> cols) {
  std::string out;
  for (const auto& c : cols) {
    if (&c != cols.begin()) out += ',';
    out += csv_field(c);
  }
  return out + '\n';
}

const std::string& pre_name(bool pre) {
  static const std::string with = study_pre_encoder().describe();
  static const std::string without = "none";
  return pre ? with : without;
}

}  // namespace

StudyModels build_study_models(StudyCheck* check) {
  StudyModels m{builtin_model("study"), builtin_model("study-masked1"),
                builtin_model("study-masked135")};
  StudyCheck c;
  const HistogramModel* all[3] = {&m.full, &m.masked1, &m.masked135};
  const char* names[3] = {"I(X;Y)", "I(X~;Y)", "I(X-;Y)"};
  const char* hnames[3] = {"H(Y|X)", "H(Y|X~)", "H(Y|X-)"};
  for (int k = 0; k < 3; ++k) {
    c.mi[k] = mutual_information(*all[k]);
    c.cond_entropy[k] = conditional_entropy(*all[k]);
  }
  c.class_entropy = class_entropy(m.full);
  c.selector_mil = mil(m.full, study_pre_encoder());
  if (check) *check = c;
  for (int k = 0; k < 3; ++k) {
    expect_close(names[k], c.mi[k], kStudyMI[k]);
    expect_close(hnames[k], c.cond_entropy[k], kStudyCondEntropy[k]);
  }
  expect_close("H(Y)", c.class_entropy, kStudyClassEntropy);
  expect_close("MIL(selector 1..5)", c.selector_mil, 0.0);
  return m;
}

Encoder study_pre_encoder() { return Encoder::selector({0, 1, 2, 3, 4}); }

Fig2Spec desk_fig2_spec() { return Fig2Spec{}; }

Fig2Spec full_fig2_spec() {
  Fig2Spec s;
  s.ns = {2780, 21500, 59900, 464000, 1290000};
  s.validation_size = 800000;
  return s;
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Fig2Result run_fig2(const Fig2Spec& spec, const ProgressFn& progress) {
  if (spec.seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "spec needs at least one seed");
  if (spec.models.empty() || spec.archs.empty() || spec.ns.empty() || spec.pre_encoder.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "spec has an empty axis");
  }
  build_study_models();  // gate on the self-check before any training

  std::map<std::string, HistogramModel> models;
  std::map<std::string, double> href;
  for (const auto& id : spec.models) {
    if (models.count(id)) continue;
    models.emplace(id, load_model(id));
    href[id] = conditional_entropy(models.at(id));
  }
  for (const auto& a : spec.archs) MLPArch::preset(a, 1, 2);  // validate names early

  Fig2Result result;
  for (const auto& id : spec.models) {
    for (const auto& arch : spec.archs) {
      for (std::size_t n : spec.ns) {
        for (bool pre : spec.pre_encoder) {
          for (std::uint64_t seed : spec.seeds) {
            Fig2Run r;
            r.model_id = id;
            r.arch = arch;
            r.n = n;
            r.pre_encoder = pre;
            r.seed = seed;
            r.href_bits = href.at(id);
            result.runs.push_back(std::move(r));
          }
        }
      }
    }
  }

  std::mutex progress_mu;
  parallel_for(result.runs.size(), spec.workers, [&](std::size_t i) {
    Fig2Run& r = result.runs[i];
    const HistogramModel& model = models.at(r.model_id);
    TrainConfig cfg;
    cfg.epochs = spec.epochs;
    cfg.seed = r.seed;
    cfg.validation_size = spec.validation_size;
    cfg.batch_size = spec.batch_size;
    std::size_t in = model.dim();
    if (r.pre_encoder) {
      cfg.pre_encoder = study_pre_encoder();
      in = 5;
    }
    const MLPArch arch = MLPArch::preset(r.arch, in, model.classes());
    r.epochs = train(model, r.n, arch, cfg).epochs;
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mu);
      progress(r);
    }
  });

  result.runs_csv = "model_id,arch,n,pre_encoder,seed,epoch,train_loss_bits,val_risk_bits,val_se_bits\n";
  for (const auto& r : result.runs) {
    for (const auto& e : r.epochs) {
      result.runs_csv += join_row({r.model_id, r.arch, std::to_string(r.n), pre_name(r.pre_encoder),
                                   std::to_string(r.seed), std::to_string(e.epoch),
                                   format_double(e.train_loss_bits), format_double(e.val_risk_bits),
                                   format_double(e.val_se_bits)});
    }
  }

  result.fig2_csv = "model,arch,n,pre_encoder,seed_avg,epoch,val_risk_bits,href_bits\n";
  const std::size_t s = spec.seeds.size();
  for (std::size_t g = 0; g < result.runs.size(); g += s) {
    const Fig2Run& head = result.runs[g];
    for (std::size_t e = 0; e < spec.epochs; ++e) {
      double sum = 0.0;
      for (std::size_t k = 0; k < s; ++k) sum += result.runs[g + k].epochs[e].val_risk_bits;
      result.fig2_csv += join_row({head.model_id, head.arch, std::to_string(head.n),
                                   pre_name(head.pre_encoder), std::to_string(s),
                                   std::to_string(e + 1), format_double(sum / static_cast<double>(s)),
                                   format_double(head.href_bits)});
    }
  }
  return result;
}

double cell_entropy(const HistogramModel& model) {
  std::vector<double> mass;
  for (std::size_t c = 0; c < model.grid().total_cells(); ++c) {
    const double p = model.joint().cell_mass(c);
    if (p > 0.0) mass.push_back(p);
  }
  return entropy(mass);
}

HistogramModel sweep_model(const std::string& id) {
  if (id == "study-marginal") {
    const std::vector<std::size_t> axes{0, 1, 2, 3, 4};
    return marginal_model(builtin_model("study"), axes);
  }
  return load_model(id);
}

SweepResult run_expressiveness_sweeps(const SweepSpec& spec) {
  if (spec.dyadic_max_level < 1 || spec.ib_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sweep needs max level >= 1 and at least one B step");
  }
  SweepResult out;
  out.dyadic_csv = "model,m,alphabet_size,mi_bits,mi_x_bits,loss_bits,coverage\n";
  const Label outer{std::numeric_limits<std::int64_t>::min()};
  for (const auto& id : spec.dyadic_models) {
    const HistogramModel model = sweep_model(id);
    const double ix = mutual_information(model);
    for (const Encoder& enc : dyadic_family(model.dim(), spec.dyadic_max_level)) {
      const auto& dy = std::get<DyadicEnc>(enc.variant());
      const JointPMF q = pushforward(model, enc);
      const auto pu = q.symbol_marginal();
      double outside = 0.0;
      for (std::size_t u = 0; u < q.symbols.size(); ++u) {
        if (q.symbols[u] == outer) outside += pu[u];
      }
      const double iu = mi(q);
      out.dyadic_csv += join_row({id, std::to_string(dy.level), std::to_string(dy.alphabet_size()),
                                  format_double(iu), format_double(ix), format_double(ix - iu),
                                  format_double(std::max(0.0, 1.0 - outside))});
    }
  }

  out.ib_csv = "B_bits,H_U_bits,I_UY_bits,loss_bits,solver,groups,model\n";
  for (const auto& id : spec.ib_models) {
    const HistogramModel model = sweep_model(id);
    const double hi = cell_entropy(model);
    std::vector<double> bounds;
    for (std::size_t k = 0; k <= spec.ib_steps; ++k) {
      bounds.push_back(hi * static_cast<double>(k) / static_cast<double>(spec.ib_steps));
    }
    bounds.back() = hi;
    std::size_t positive = 0;
    for (std::size_t c = 0; c < model.grid().total_cells(); ++c) {
      if (model.joint().cell_mass(c) > 0.0) ++positive;
    }
    std::vector<IBSolver> solvers{IBSolver::kGreedy};
    if (positive <= kExhaustiveLimit) solvers.push_back(IBSolver::kExhaustive);
    for (IBSolver s : solvers) {
      for (const IBPoint& p : ib_curve(model, bounds, s).points) {
        out.ib_csv += join_row({format_double(p.bound), format_double(p.h_u), format_double(p.i_uy),
                                format_double(p.loss), solver_name(s), std::to_string(p.groups),
                                id});
      }
    }
  }
  return out;
}

std::string measures_csv() {
  std::string out = "model_id,measure,encoder_id,value_bits\n";
  auto row = [&](const std::string& model, const std::string& measure, const std::string& enc,
                 double v) { out += join_row({model, measure, enc, format_double(v)}); };
  for (const auto& id : builtin_names()) {
    const HistogramModel m = builtin_model(id);
    row(id, "H(Y)", "identity", class_entropy(m));
    row(id, "H(Y|X)", "identity", conditional_entropy(m));
    row(id, "I(X;Y)", "identity", mutual_information(m));
    if (m.dim() <= 3) {
      for (std::size_t mask_bits = 1; mask_bits < (1u << m.dim()); ++mask_bits) {
        std::vector<std::size_t> coords;
        for (std::size_t k = 0; k < m.dim(); ++k) {
          if (mask_bits & (1u << k)) coords.push_back(k);
        }
        const Encoder sel = Encoder::selector(coords);
        row(id, "I(U;Y)", sel.describe(), mi_selector(m, coords));
      }
    } else {
      for (const Encoder& e : {study_pre_encoder(), Encoder::mask({0}), Encoder::mask({0, 2, 4})}) {
        row(id, "I(U;Y)", e.describe(), mi(pushforward(m, e)));
        row(id, "MIL", e.describe(), mil(m, e));
      }
    }
  }
  return out;
}

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw Error(ErrorCode::kParse, "unknown experiment field '" + it.key() + "'");
    }
  }
}

json parse_spec_object(const std::string& text, const char* kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("experiment spec: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "experiment spec must be an object");
  if (j.contains("kind") && j["kind"] != kind) {
    throw Error(ErrorCode::kParse, std::string("experiment spec kind must be '") + kind + "'");
  }
  return j;
}

}  // namespace

Fig2Spec parse_fig2_spec(const std::string& json_text, bool full_defaults) {
  const json j = parse_spec_object(json_text, "fig2");
  reject_unknown(j, {"kind", "models", "archs", "n", "pre_encoder", "seeds", "epochs",
                     "validation", "batch_size", "workers"});
  Fig2Spec s = full_defaults ? full_fig2_spec() : desk_fig2_spec();
  try {
    if (j.contains("models")) s.models = j["models"].get<std::vector<std::string>>();
    if (j.contains("archs")) s.archs = j["archs"].get<std::vector<std::string>>();
    if (j.contains("n")) s.ns = j["n"].get<std::vector<std::size_t>>();
    if (j.contains("pre_encoder")) s.pre_encoder = j["pre_encoder"].get<std::vector<bool>>();
    if (j.contains("seeds")) s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("epochs")) s.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("validation")) s.validation_size = j["validation"].get<std::size_t>();
    if (j.contains("batch_size")) s.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("workers")) s.workers = j["workers"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("experiment spec: ") + e.what());
  }
  for (const auto& id : s.models) {
    if (id != "study" && id != "study-masked1" && id != "study-masked135") {
      throw Error(ErrorCode::kInvalidArgument, "training models must be study models, got '" + id + "'");
    }
  }
  if (s.seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "seeds must be non-empty");
  return s;
}

SweepSpec parse_sweep_spec(const std::string& json_text) {
  const json j = parse_spec_object(json_text, "sweeps");
  reject_unknown(j, {"kind", "dyadic_models", "dyadic_max_level", "ib_models", "ib_steps"});
  SweepSpec s;
  try {
    if (j.contains("dyadic_models")) s.dyadic_models = j["dyadic_models"].get<std::vector<std::string>>();
    if (j.contains("dyadic_max_level")) s.dyadic_max_level = j["dyadic_max_level"].get<unsigned>();
    if (j.contains("ib_models")) s.ib_models = j["ib_models"].get<std::vector<std::string>>();
    if (j.contains("ib_steps")) s.ib_steps = j["ib_steps"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("experiment spec: ") + e.what());
  }
  return s;
}

}  // namespace infolab
