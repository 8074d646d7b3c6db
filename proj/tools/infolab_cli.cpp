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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "infolab/infolab.h"

namespace {

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(il_status s) {
  if (s != IL_OK) throw DomainError(il_last_error());
}

struct ModelDeleter {
  void operator()(il_model* m) const { il_model_free(m); }
};
struct EncoderDeleter {
  void operator()(il_encoder* e) const { il_encoder_free(e); }
};
using ModelPtr = std::unique_ptr<il_model, ModelDeleter>;
using EncoderPtr = std::unique_ptr<il_encoder, EncoderDeleter>;

std::string take(char* s) {
  std::string out(s ? s : "");
  il_string_free(s);
  return out;
}

ModelPtr load_model(const std::string& ref) {
  il_model* m = nullptr;
  check(il_model_load(ref.c_str(), &m));
  return ModelPtr(m);
}

EncoderPtr load_encoder(const std::string& ref, const il_model* model) {
  il_encoder* e = nullptr;
  check(il_encoder_parse(ref.c_str(), model, &e));
  return EncoderPtr(e);
}

std::string describe(const il_encoder* e) {
  char* s = nullptr;
  check(il_encoder_describe(e, &s));
  return take(s);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("Io: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write to a temporary sibling, then rename over the target.
void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  fs::path tmp = target;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out.flush()) {
      fs::remove(tmp, ec);
      throw DomainError("Io: cannot write '" + path + "'");
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DomainError("Io: cannot rename into '" + path + "'");
  }
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
  } else {
    write_atomic(out, content);
  }
}

std::string fmt(double bits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f %s", il_to_units(bits), il_units_suffix());
  return buf;
}

struct Options {
  std::string model;
  std::string encoder;
  std::string out;
  std::string units = "bits";
  std::uint64_t seed = 0;
  std::size_t n = 1000;
  std::string arch = "mlp32";
  std::size_t epochs = 30;
  std::size_t workers = 1;
  bool full = false;
  std::size_t validation = 0;
  double alpha = 0.0;
  std::string solver = "greedy";
  std::size_t steps = 20;
  std::vector<double> bounds;
  unsigned max_level = 4;
  std::string kind;
  std::string spec;
  bool seed_given = false;
};

int cmd_validate(const Options& o) {
  ModelPtr m = load_model(o.model);
  std::size_t d = 0, classes = 0;
  check(il_model_dim(m.get(), &d));
  check(il_model_classes(m.get(), &classes));
  double h = 0, hc = 0, i = 0;
  check(il_class_entropy(m.get(), &h));
  check(il_conditional_entropy(m.get(), &hc));
  check(il_mutual_information(m.get(), &i));
  std::cout << "valid model: d = " << d << ", classes = " << classes << "\n"
            << "H(Y)   = " << fmt(h) << "\n"
            << "H(Y|X) = " << fmt(hc) << "\n"
            << "I(X;Y) = " << fmt(i) << "\n";
  if (!o.out.empty()) {
    char* json = nullptr;
    check(il_model_to_json(m.get(), &json));
    write_atomic(o.out, take(json));
  }
  return 0;
}

int cmd_sample(const Options& o) {
  ModelPtr m = load_model(o.model);
  char* csv = nullptr;
  check(il_model_sample_csv(m.get(), o.seed, o.n, &csv));
  emit(o.out, take(csv));
  return 0;
}

int cmd_measure(const Options& o) {
  ModelPtr m = load_model(o.model);
  double h = 0, hc = 0, i = 0;
  check(il_class_entropy(m.get(), &h));
  check(il_conditional_entropy(m.get(), &hc));
  check(il_mutual_information(m.get(), &i));
  nlohmann::json records = nlohmann::json::array();
  auto record = [&](const char* measure, double v, const std::string& enc) {
    records.push_back(
        {{"measure", measure}, {"value_bits", v}, {"model_id", o.model}, {"encoder_id", enc}});
  };
  std::cout << "I(X;Y) = " << fmt(i) << "\n";
  record("I(X;Y)", i, "identity");
  if (!o.encoder.empty()) {
    EncoderPtr e = load_encoder(o.encoder, m.get());
    const std::string id = describe(e.get());
    double iu = 0, loss = 0;
    check(il_encoder_mi(m.get(), e.get(), &iu));
    check(il_mil(m.get(), e.get(), &loss));
    std::cout << "encoder: " << id << "\n"
              << "I(U;Y) = " << fmt(iu) << "\n"
              << "MIL    = " << fmt(loss) << "\n";
    record("I(U;Y)", iu, id);
    record("MIL", loss, id);
  }
  std::cout << "H(Y|X) = " << fmt(hc) << "\n"
            << "H(Y)   = " << fmt(h) << "\n";
  record("H(Y|X)", hc, "identity");
  record("H(Y)", h, "identity");
  if (!o.out.empty()) write_atomic(o.out, records.dump(2) + "\n");
  return 0;
}

int cmd_decompose(const Options& o) {
  ModelPtr m = load_model(o.model);
  EncoderPtr e = load_encoder(o.encoder, m.get());
  il_decomposition d{};
  check(il_decompose(m.get(), e.get(), o.alpha, &d));
  std::ostringstream ss;
  ss << "encoder: " << describe(e.get()) << "\n"
     << "decoder: " << (o.alpha == 0.0 ? "optimal" : "optimal mixed with uniform") << "\n"
     << "risk           = " << fmt(d.total) << "\n"
     << "H(Y|X)         = " << fmt(d.conditional_entropy) << "\n"
     << "encoder effect = " << fmt(d.encoder_effect) << "\n"
     << "decoder effect = " << fmt(d.decoder_effect) << "\n";
  if (d.support_violation) ss << "decoder assigns zero probability to a possible class\n";
  emit(o.out, ss.str());
  return 0;
}

int cmd_layers(const Options& o) {
  ModelPtr m = load_model(o.model);
  EncoderPtr e = load_encoder(o.encoder, m.get());
  std::size_t count = 0;
  check(il_encoder_prefixes(e.get(), nullptr, 0, &count));
  std::vector<il_encoder*> raw(count, nullptr);
  check(il_encoder_prefixes(e.get(), raw.data(), raw.size(), &count));
  std::vector<EncoderPtr> owned;
  for (il_encoder* p : raw) owned.emplace_back(p);
  std::vector<double> losses(count);
  check(il_layer_losses(m.get(), raw.data(), raw.size(), losses.data()));
  std::ostringstream ss;
  double total = 0;
  for (std::size_t k = 0; k < count; ++k) {
    ss << "layer " << k + 1 << " (" << describe(raw[k]) << "): " << fmt(losses[k]) << "\n";
    total += losses[k];
  }
  ss << "total: " << fmt(total) << "\n";
  emit(o.out, ss.str());
  return 0;
}

int cmd_ib(const Options& o) {
  ModelPtr m = load_model(o.model);
  std::vector<double> bounds = o.bounds;
  if (bounds.empty()) {
    // Grid over [0, H(I)], where H(I) is read off the unconstrained endpoint.
    double top = 0.0;
    char* probe = nullptr;
    const double big = 1e9;
    check(il_ib_curve_csv(m.get(), &big, 1, "greedy", &probe));
    std::istringstream in(take(probe));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    top = std::stod(line.substr(line.find(',') + 1));
    for (std::size_t k = 0; k <= o.steps; ++k) {
      bounds.push_back(top * static_cast<double>(k) / static_cast<double>(o.steps));
    }
    bounds.back() = top;
  }
  char* csv = nullptr;
  check(il_ib_curve_csv(m.get(), bounds.data(), bounds.size(), o.solver.c_str(), &csv));
  emit(o.out, take(csv));
  return 0;
}

int cmd_dyadic(const Options& o) {
  ModelPtr m = load_model(o.model);
  char* csv = nullptr;
  check(il_dyadic_sweep_csv(m.get(), o.max_level, &csv));
  emit(o.out, take(csv));
  return 0;
}

int cmd_train(const Options& o) {
  ModelPtr m = load_model(o.model);
  EncoderPtr pre;
  if (!o.encoder.empty()) pre = load_encoder(o.encoder, m.get());
  char* csv = nullptr;
  check(il_train_csv(m.get(), o.model.c_str(), o.arch.c_str(), o.n, o.epochs, o.seed, pre.get(),
                     o.validation, &csv));
  emit(o.out, take(csv));
  return 0;
}

int cmd_reproduce(const Options& o) {
  il_study_check c{};
  check(il_study_self_check(&c));
  std::cout << "study self-check: I = " << fmt(c.mi[0]) << ", " << fmt(c.mi[1]) << ", "
            << fmt(c.mi[2]) << "\n"
            << "                  H(Y|.) = " << fmt(c.cond_entropy[0]) << ", "
            << fmt(c.cond_entropy[1]) << ", " << fmt(c.cond_entropy[2]) << "\n";
  std::string spec;
  if (!o.spec.empty()) spec = read_text(o.spec);
  if (o.seed_given) {
    // Base seed for the training runs: seed, seed+1, ... with the spec's seed count.
    if (o.kind != "fig2") throw DomainError("--seed only applies to 'reproduce fig2'");
    nlohmann::json j = spec.empty() ? nlohmann::json::object() : nlohmann::json::parse(spec, nullptr, false);
    if (!j.is_object()) throw DomainError("experiment spec must be a JSON object");
    const std::size_t count = j.contains("seeds") && j["seeds"].is_array() ? j["seeds"].size() : 3;
    nlohmann::json seeds = nlohmann::json::array();
    for (std::size_t k = 0; k < count; ++k) seeds.push_back(o.seed + k);
    j["seeds"] = seeds;
    spec = j.dump();
  }
  char* summary = nullptr;
  check(il_reproduce(o.kind.c_str(), spec.empty() ? nullptr : spec.c_str(), o.full ? 1 : 0,
                     o.workers, o.out.empty() ? "results" : o.out.c_str(), &summary));
  std::cout << take(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infolab: exact information measures for encoder-decoder learning"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--units", o.units, "Units for printed values")
      ->check(CLI::IsMember({"bits", "nats"}));

  auto model_opt = [&](CLI::App* sub) {
    sub->add_option("--model", o.model, "Model JSON path or built-in name")->required();
  };
  auto out_opt = [&](CLI::App* sub, const char* help) {
    sub->add_option("--out", o.out, help);
  };

  auto* validate = app.add_subcommand("validate", "Check a model file and print its entropies");
  model_opt(validate);
  out_opt(validate, "Write the normalized model JSON here");

  auto* sample = app.add_subcommand("sample", "Draw an i.i.d. dataset as CSV");
  model_opt(sample);
  sample->add_option("--n", o.n, "Number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--seed", o.seed, "Random seed");
  out_opt(sample, "CSV output path (default stdout)");

  auto* measure = app.add_subcommand("measure", "Exact I(X;Y), H(Y|X) and encoder losses");
  model_opt(measure);
  measure->add_option("--encoder", o.encoder, "Encoder JSON or path");
  out_opt(measure, "Write measure records as JSON");

  auto* decompose = app.add_subcommand("decompose", "Risk decomposition for an encoder");
  model_opt(decompose);
  decompose->add_option("--encoder", o.encoder, "Encoder JSON or path")->required();
  decompose->add_option("--alpha", o.alpha, "Weight of the uniform pmf in the decoder")
      ->check(CLI::Range(0.0, 1.0));
  out_opt(decompose, "Output path (default stdout)");

  auto* layers = app.add_subcommand("layers", "Per-layer losses of a chain encoder");
  model_opt(layers);
  layers->add_option("--encoder", o.encoder, "Chain encoder JSON or path")->required();
  out_opt(layers, "Output path (default stdout)");

  auto* ib = app.add_subcommand("ib", "Deterministic information bottleneck curve");
  model_opt(ib);
  ib->add_option("--solver", o.solver, "greedy or exhaustive")
      ->check(CLI::IsMember({"greedy", "exhaustive"}));
  ib->add_option("--steps", o.steps, "Grid steps over [0, H(I)]")->check(CLI::PositiveNumber);
  ib->add_option("--bounds", o.bounds, "Explicit list of bounds B (bits)");
  out_opt(ib, "CSV output path (default stdout)");

  auto* dyadic = app.add_subcommand("dyadic", "Dyadic quantizer sweep");
  model_opt(dyadic);
  dyadic->add_option("--max-level", o.max_level, "Largest level m")->check(CLI::Range(1, 24));
  out_opt(dyadic, "CSV output path (default stdout)");

  auto* train = app.add_subcommand("train", "Train an MLP and report per-epoch risks");
  model_opt(train);
  train->add_option("--arch", o.arch, "Architecture")
      ->check(CLI::IsMember({"mlp32", "mlp256", "mlp1024"}));
  train->add_option("--n", o.n, "Training set size")->check(CLI::PositiveNumber);
  train->add_option("--epochs", o.epochs, "Epochs")->check(CLI::PositiveNumber);
  train->add_option("--seed", o.seed, "Random seed");
  train->add_option("--encoder", o.encoder, "Pre-encoder applied before the network");
  train->add_option("--validation", o.validation, "Validation sample size");
  out_opt(train, "CSV output path (default stdout)");

  auto* reproduce = app.add_subcommand("reproduce", "Run a packaged experiment");
  reproduce->add_option("kind", o.kind, "fig2, sweeps or measures")
      ->required()
      ->check(CLI::IsMember({"fig2", "sweeps", "measures"}));
  reproduce->add_option("--out", o.out, "Output directory (default results)");
  reproduce->add_option("--workers", o.workers, "Concurrent training runs")
      ->check(CLI::PositiveNumber);
  reproduce->add_option("--spec", o.spec, "Experiment spec JSON file");
  auto* full = reproduce->add_flag("--full", o.full, "Large matrix: n up to 1290000, 800000 validation samples");
  reproduce->add_flag("--desk", "Desk-scale matrix (default)")->excludes(full);
  reproduce->add_option("--seed", o.seed, "Base seed of the training runs (fig2)")
      ->each([&](const std::string&) { o.seed_given = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    check(il_set_units(o.units.c_str()));
    if (*validate) return cmd_validate(o);
    if (*sample) return cmd_sample(o);
    if (*measure) return cmd_measure(o);
    if (*decompose) return cmd_decompose(o);
    if (*layers) return cmd_layers(o);
    if (*ib) return cmd_ib(o);
    if (*dyadic) return cmd_dyadic(o);
    if (*train) return cmd_train(o);
    if (*reproduce) return cmd_reproduce(o);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
