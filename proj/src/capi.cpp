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

#include "infolab/infolab.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "infolab/error.hpp"
#include "infolab/harness.hpp"
#include "infolab/ib_solver.hpp"
#include "infolab/infocalc.hpp"
#include "infolab/learner.hpp"
#include "infolab/model.hpp"
#include "infolab/model_io.hpp"

struct il_model {
  infolab::HistogramModel model;
};

struct il_encoder {
  infolab::Encoder enc;
};

namespace {

using infolab::Error;
using infolab::ErrorCode;

thread_local std::string g_last_error;

il_status fail(il_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

template <class F>
il_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return IL_OK;
  } catch (const Error& e) {
    return fail(static_cast<il_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(IL_TOO_LARGE, "TooLarge: out of memory");
  } catch (const std::exception& e) {
    return fail(IL_INTERNAL, std::string("Internal: ") + e.what());
  } catch (...) {
    return fail(IL_INTERNAL, "Internal: unknown failure");
  }
}

void need(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put_string(char** out, const std::string& s) {
  need(out, "output");
  *out = dup_string(s);
}

std::vector<std::size_t> zero_based(const size_t* coords, size_t count, const char* what) {
  if (count > 0) need(coords, what);
  std::vector<std::size_t> v;
  for (size_t i = 0; i < count; ++i) {
    if (coords[i] == 0) throw Error(ErrorCode::kIndexOutOfRange, std::string(what) + " are 1-based");
    v.push_back(coords[i] - 1);
  }
  return v;
}

il_model* wrap(infolab::HistogramModel m) { return new il_model{std::move(m)}; }

}  // namespace

extern "C" {

IL_API const char* il_version(void) { return "0.1.0"; }

IL_API const char* il_status_name(il_status status) {
  if (status == IL_OK) return "Ok";
  if (status == IL_INTERNAL) return "Internal";
  return infolab::error_code_name(static_cast<ErrorCode>(status));
}

IL_API const char* il_last_error(void) { return g_last_error.c_str(); }

IL_API void il_string_free(char* s) { std::free(s); }

IL_API il_status il_set_units(const char* units) {
  return guarded([&] {
    need(units, "units");
    const std::string u(units);
    if (u == "bits") {
      infolab::set_output_units(infolab::Units::kBits);
    } else if (u == "nats") {
      infolab::set_output_units(infolab::Units::kNats);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "units must be 'bits' or 'nats'");
    }
  });
}

IL_API double il_to_units(double bits) { return infolab::to_output_units(bits); }

IL_API const char* il_units_suffix(void) { return infolab::units_suffix(); }

IL_API il_status il_model_load(const char* name_or_path, il_model** out) {
  return guarded([&] {
    need(name_or_path, "name_or_path");
    need(out, "output");
    *out = wrap(infolab::load_model(name_or_path));
  });
}

IL_API il_status il_model_parse(const char* json, il_model** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "output");
    *out = wrap(infolab::parse_model(json));
  });
}

IL_API il_status il_model_builtin_names(char** out) {
  return guarded([&] {
    std::string s;
    for (const auto& n : infolab::builtin_names()) s += n + "\n";
    put_string(out, s);
  });
}

IL_API void il_model_free(il_model* model) { delete model; }

IL_API il_status il_model_to_json(const il_model* model, char** out) {
  return guarded([&] {
    need(model, "model");
    put_string(out, infolab::model_to_json(model->model));
  });
}

IL_API il_status il_model_dim(const il_model* model, size_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "output");
    *out = model->model.dim();
  });
}

IL_API il_status il_model_classes(const il_model* model, size_t* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "output");
    *out = model->model.classes();
  });
}

IL_API il_status il_model_pdf(const il_model* model, const double* x, size_t dim, size_t y,
                              double* out) {
  return guarded([&] {
    need(model, "model");
    need(x, "x");
    need(out, "output");
    if (y == 0) throw Error(ErrorCode::kIndexOutOfRange, "classes are 1-based");
    *out = infolab::pdf(model->model, std::span<const double>(x, dim), y - 1);
  });
}

IL_API il_status il_model_posterior(const il_model* model, const double* x, size_t dim,
                                    double* out, size_t classes) {
  return guarded([&] {
    need(model, "model");
    need(x, "x");
    need(out, "output");
    if (classes != model->model.classes()) {
      throw Error(ErrorCode::kDimensionMismatch, "output buffer size differs from the class count");
    }
    const auto p = infolab::true_posterior(model->model, std::span<const double>(x, dim));
    std::copy(p.begin(), p.end(), out);
  });
}

IL_API il_status il_model_sample_csv(const il_model* model, uint64_t seed, size_t n, char** out) {
  return guarded([&] {
    need(model, "model");
    put_string(out, infolab::dataset_csv(infolab::sample(model->model, seed, n)));
  });
}

IL_API il_status il_model_mask(const il_model* model, const size_t* coords, size_t count,
                               il_model** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "output");
    *out = wrap(infolab::mask(model->model, zero_based(coords, count, "mask coordinates")));
  });
}

IL_API il_status il_model_rotate(const il_model* model, const double* u, size_t dim,
                                 il_model** out) {
  return guarded([&] {
    need(model, "model");
    need(u, "u");
    need(out, "output");
    const auto d = static_cast<Eigen::Index>(dim);
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) m(r, c) = u[r * d + c];
    }
    *out = wrap(infolab::rotate(model->model, m));
  });
}

IL_API il_status il_model_symmetrize(const il_model* model, il_model** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "output");
    *out = wrap(infolab::symmetrize(model->model));
  });
}

IL_API il_status il_model_sparsify(const il_model* model, const size_t* positions, size_t count,
                                   il_model** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "output");
    std::vector<infolab::NoiseDim> noise;
    for (std::size_t p : zero_based(positions, count, "noise positions")) {
      infolab::NoiseDim v;
      v.position = p;
      noise.push_back(v);
    }
    *out = wrap(infolab::sparsify(model->model, std::move(noise)));
  });
}

IL_API il_status il_encoder_parse(const char* json_or_path, const il_model* model,
                                  il_encoder** out) {
  return guarded([&] {
    need(json_or_path, "encoder spec");
    need(model, "model");
    need(out, "output");
    *out = new il_encoder{infolab::load_encoder(json_or_path, model->model)};
  });
}

IL_API void il_encoder_free(il_encoder* enc) { delete enc; }

IL_API il_status il_encoder_describe(const il_encoder* enc, char** out) {
  return guarded([&] {
    need(enc, "encoder");
    put_string(out, enc->enc.describe());
  });
}

IL_API il_status il_encoder_prefixes(const il_encoder* enc, il_encoder** out, size_t capacity,
                                     size_t* count) {
  return guarded([&] {
    need(enc, "encoder");
    need(count, "count");
    const auto pre = infolab::prefixes(enc->enc);
    *count = pre.size();
    if (capacity > 0) need(out, "output");
    for (std::size_t i = 0; i < pre.size() && i < capacity; ++i) out[i] = new il_encoder{pre[i]};
  });
}

#define IL_MODEL_MEASURE(name, fn)                        \
  IL_API il_status name(const il_model* model, double* out) { \
    return guarded([&] {                                  \
      need(model, "model");                               \
      need(out, "output");                                \
      *out = infolab::fn(model->model);                   \
    });                                                   \
  }

IL_MODEL_MEASURE(il_class_entropy, class_entropy)
IL_MODEL_MEASURE(il_conditional_entropy, conditional_entropy)
IL_MODEL_MEASURE(il_mutual_information, mutual_information)
#undef IL_MODEL_MEASURE

IL_API il_status il_encoder_mi(const il_model* model, const il_encoder* enc, double* out) {
  return guarded([&] {
    need(model, "model");
    need(enc, "encoder");
    need(out, "output");
    *out = infolab::mi(infolab::pushforward(model->model, enc->enc));
  });
}

IL_API il_status il_mil(const il_model* model, const il_encoder* enc, double* out) {
  return guarded([&] {
    need(model, "model");
    need(enc, "encoder");
    need(out, "output");
    *out = infolab::mil(model->model, enc->enc);
  });
}

IL_API il_status il_ip_error(const il_model* model, const il_encoder* enc, double* out) {
  return guarded([&] {
    need(model, "model");
    need(enc, "encoder");
    need(out, "output");
    *out = infolab::ip_error(model->model, enc->enc);
  });
}

IL_API il_status il_decompose(const il_model* model, const il_encoder* enc, double alpha,
                              il_decomposition* out) {
  return guarded([&] {
    need(model, "model");
    need(enc, "encoder");
    need(out, "output");
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0,1]");
    }
    infolab::DecoderTable dec = infolab::optimal_decoder(model->model, enc->enc);
    const double uni = 1.0 / static_cast<double>(dec.classes);
    for (auto& [label, row] : dec.rows) {
      for (double& v : row) v = (1.0 - alpha) * v + alpha * uni;
    }
    const auto r = infolab::risk_exact(model->model, enc->enc, dec);
    *out = il_decomposition{r.total, r.conditional_entropy, r.encoder_effect, r.decoder_effect,
                            r.support_violation ? 1 : 0};
  });
}

IL_API il_status il_layer_losses(const il_model* model, const il_encoder* const* chain,
                                 size_t count, double* out) {
  return guarded([&] {
    need(model, "model");
    need(chain, "chain");
    need(out, "output");
    std::vector<infolab::Encoder> encs;
    for (size_t i = 0; i < count; ++i) {
      need(chain[i], "chain element");
      encs.push_back(chain[i]->enc);
    }
    const auto losses = infolab::layer_losses(model->model, encs);
    std::copy(losses.begin(), losses.end(), out);
  });
}

IL_API il_status il_mc_risk(const il_model* model, double alpha, size_t n, uint64_t seed,
                            double* value, double* std_error) {
  return guarded([&] {
    need(model, "model");
    need(value, "output");
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0,1]");
    }
    const auto post = infolab::posterior_predictor(model->model);
    const std::size_t m = model->model.classes();
    infolab::BatchPredictor pred = [&](std::span<const double> xs, std::size_t rows,
                                       std::span<double> o) {
      post(xs, rows, o);
      for (double& v : o) v = (1.0 - alpha) * v + alpha / static_cast<double>(m);
    };
    const auto est = infolab::mc_risk(model->model, pred, n, seed);
    *value = est.value;
    if (std_error) *std_error = est.std_error;
  });
}

IL_API il_status il_ib_curve_csv(const il_model* model, const double* bounds, size_t count,
                                 const char* solver, char** out) {
  return guarded([&] {
    need(model, "model");
    need(solver, "solver");
    if (count == 0) throw Error(ErrorCode::kInvalidArgument, "bound list is empty");
    need(bounds, "bounds");
    const std::string s(solver);
    infolab::IBSolver kind;
    if (s == "greedy") {
      kind = infolab::IBSolver::kGreedy;
    } else if (s == "exhaustive") {
      kind = infolab::IBSolver::kExhaustive;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "solver must be 'greedy' or 'exhaustive'");
    }
    const auto curve =
        infolab::ib_curve(model->model, std::vector<double>(bounds, bounds + count), kind);
    std::string csv = "B_bits,H_U_bits,I_UY_bits,loss_bits,solver,groups\n";
    for (const auto& p : curve.points) {
      csv += infolab::format_double(p.bound) + "," + infolab::format_double(p.h_u) + "," +
             infolab::format_double(p.i_uy) + "," + infolab::format_double(p.loss) + "," + s + "," +
             std::to_string(p.groups) + "\n";
    }
    put_string(out, csv);
  });
}

IL_API il_status il_dyadic_sweep_csv(const il_model* model, unsigned max_level, char** out) {
  return guarded([&] {
    need(model, "model");
    if (max_level == 0) throw Error(ErrorCode::kInvalidArgument, "max level must be >= 1");
    const double ix = infolab::mutual_information(model->model);
    const infolab::Label outer{std::numeric_limits<std::int64_t>::min()};
    std::string csv = "m,alphabet_size,mi_bits,mi_x_bits,loss_bits,coverage\n";
    for (const auto& enc : infolab::dyadic_family(model->model.dim(), max_level)) {
      const auto& dy = std::get<infolab::DyadicEnc>(enc.variant());
      const auto q = infolab::pushforward(model->model, enc);
      const auto pu = q.symbol_marginal();
      double outside = 0.0;
      for (std::size_t u = 0; u < q.symbols.size(); ++u) {
        if (q.symbols[u] == outer) outside += pu[u];
      }
      const double iu = infolab::mi(q);
      csv += std::to_string(dy.level) + "," + std::to_string(dy.alphabet_size()) + "," +
             infolab::format_double(iu) + "," + infolab::format_double(ix) + "," +
             infolab::format_double(ix - iu) + "," +
             infolab::format_double(std::max(0.0, 1.0 - outside)) + "\n";
    }
    put_string(out, csv);
  });
}

IL_API il_status il_train_csv(const il_model* model, const char* model_id, const char* arch,
                              size_t n, size_t epochs, uint64_t seed,
                              const il_encoder* pre_encoder, size_t validation, char** out) {
  return guarded([&] {
    need(model, "model");
    need(model_id, "model_id");
    need(arch, "arch");
    infolab::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = seed;
    if (validation > 0) cfg.validation_size = validation;
    std::size_t in = model->model.dim();
    std::string pre_name = "none";
    if (pre_encoder) {
      cfg.pre_encoder = pre_encoder->enc;
      pre_name = pre_encoder->enc.describe();
      const auto od = pre_encoder->enc.output_dim(in);
      if (!od || pre_encoder->enc.discrete_output()) {
        throw Error(ErrorCode::kShapeMismatch, "pre-encoder must have real-vector output");
      }
      in = *od;
    }
    const auto a = infolab::MLPArch::preset(arch, in, model->model.classes());
    const auto hist = infolab::train(model->model, n, a, cfg);
    std::string csv =
        "model_id,arch,n,pre_encoder,seed,epoch,train_loss_bits,val_risk_bits,val_se_bits\n";
    for (const auto& e : hist.epochs) {
      csv += infolab::csv_field(model_id) + "," + arch + "," + std::to_string(n) + "," +
             infolab::csv_field(pre_name) + "," +
             std::to_string(seed) + "," + std::to_string(e.epoch) + "," +
             infolab::format_double(e.train_loss_bits) + "," +
             infolab::format_double(e.val_risk_bits) + "," + infolab::format_double(e.val_se_bits) +
             "\n";
    }
    put_string(out, csv);
  });
}

IL_API il_status il_study_self_check(il_study_check* out) {
  infolab::StudyCheck c;
  const il_status s = guarded([&] { infolab::build_study_models(&c); });
  if (out) {
    for (int k = 0; k < 3; ++k) {
      out->mi[k] = c.mi[k];
      out->cond_entropy[k] = c.cond_entropy[k];
    }
    out->class_entropy = c.class_entropy;
    out->selector_mil = c.selector_mil;
  }
  return s;
}

IL_API il_status il_reproduce(const char* kind, const char* spec_json, int full, size_t workers,
                              const char* out_dir, char** summary) {
  return guarded([&] {
    need(kind, "kind");
    need(out_dir, "out_dir");
    const std::string k(kind);
    const std::filesystem::path dir(out_dir);
    auto path = [&](const char* name) { return (dir / name).string(); };
    std::string text;
    if (k == "fig2") {
      infolab::StudyCheck c;
      infolab::build_study_models(&c);
      infolab::Fig2Spec spec = spec_json ? infolab::parse_fig2_spec(spec_json, full != 0)
                                         : (full ? infolab::full_fig2_spec()
                                                 : infolab::desk_fig2_spec());
      if (workers > 0) spec.workers = workers;
      const auto r = infolab::run_fig2(spec);
      infolab::write_file_atomic(path("fig2.csv"), r.fig2_csv);
      infolab::write_file_atomic(path("fig2_runs.csv"), r.runs_csv);
      text = "self-check: I = " + infolab::format_double(c.mi[0]) + " / " +
             infolab::format_double(c.mi[1]) + " / " + infolab::format_double(c.mi[2]) +
             " bits; H(Y|.) = " + infolab::format_double(c.cond_entropy[0]) + " / " +
             infolab::format_double(c.cond_entropy[1]) + " / " +
             infolab::format_double(c.cond_entropy[2]) + " bits\n" + "wrote " + path("fig2.csv") +
             " (" + std::to_string(r.runs.size()) + " runs)\n";
    } else if (k == "sweeps") {
      const infolab::SweepSpec spec =
          spec_json ? infolab::parse_sweep_spec(spec_json) : infolab::SweepSpec{};
      const auto r = infolab::run_expressiveness_sweeps(spec);
      infolab::write_file_atomic(path("dyadic.csv"), r.dyadic_csv);
      infolab::write_file_atomic(path("ib.csv"), r.ib_csv);
      text = "wrote " + path("dyadic.csv") + " and " + path("ib.csv") + "\n";
    } else if (k == "measures") {
      infolab::write_file_atomic(path("measures.csv"), infolab::measures_csv());
      text = "wrote " + path("measures.csv") + "\n";
    } else {
      throw Error(ErrorCode::kInvalidArgument, "reproduce kind must be fig2, sweeps or measures");
    }
    if (summary) *summary = dup_string(text);
  });
}

}  // extern "C"
