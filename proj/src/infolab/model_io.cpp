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

#include "infolab/model_io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <utility>

#include <json.hpp>

#include "infolab/error.hpp"

namespace infolab {
namespace {

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

std::size_t one_based(const json& v, const char* what) {
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw Error(ErrorCode::kIndexOutOfRange, std::string(what) + " must be an integer >= 1");
  }
  return static_cast<std::size_t>(v.get<long long>() - 1);
}

std::vector<std::size_t> index_list(const json& v, const char* what) {
  if (!v.is_array()) throw Error(ErrorCode::kParse, std::string(what) + " must be an array");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(one_based(e, what));
  return out;
}

std::vector<double> number_list(const json& v, const char* what) {
  if (!v.is_array()) throw Error(ErrorCode::kParse, std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw Error(ErrorCode::kParse, std::string(what) + " must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Eigen::MatrixXd matrix(const json& v, const char* what) {
  if (!v.is_array() || v.empty()) {
    throw Error(ErrorCode::kParse, std::string(what) + " must be a non-empty array of rows");
  }
  const std::size_t rows = v.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = number_list(v[r], what);
    if (row.size() != rows) {
      throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " must be square");
    }
    for (std::size_t c = 0; c < rows; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
  }
  return m;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::kParse, std::string("missing field '") + key + "'");
  return *it;
}

// ---------------------------------------------------------------------------
// Built-in models

ModelSpec two_d_singular() {
  ModelSpec s;
  s.edges = {{-1.0, 0.0, 1.0}, {-1.0, 0.0, 1.0}};
  s.prior = {0.5, 0.5};
  s.cells = {{{0, 0}, 0, 0.5}, {{1, 1}, 0, 0.5}, {{0, 1}, 1, 0.5}, {{1, 0}, 1, 0.5}};
  return s;
}

ModelSpec three_d_equiprobable() {
  ModelSpec s;
  s.edges.assign(3, {-1.0, 0.0, 1.0});
  s.prior.assign(8, 1.0 / 8.0);
  for (std::size_t y = 0; y < 8; ++y) {
    s.cells.push_back({{(y >> 2) & 1u, (y >> 1) & 1u, y & 1u}, y, 1.0});
  }
  return s;
}

// p(i, j | y) of the two-dimensional demonstration model, 0-based indices.
const std::vector<CellEntry>& demo_cells() {
  static const std::vector<CellEntry> cells = {
      {{0, 0}, 0, 0.4}, {{0, 1}, 0, 0.05}, {{1, 0}, 0, 0.3}, {{2, 0}, 0, 0.2},
      {{3, 0}, 0, 0.05}, {{0, 1}, 1, 0.2}, {{1, 1}, 1, 0.3}, {{2, 0}, 1, 0.3},
      {{3, 0}, 1, 0.2},  {{2, 1}, 2, 0.7}, {{3, 0}, 2, 0.3}};
  return cells;
}

ModelSpec two_d_demonstration() {
  ModelSpec s;
  s.edges = {{-0.5, 0.5, 1.5, 2.0, 3.5}, {1.0, 1.5, 2.5}};
  s.prior = {0.2, 0.5, 0.3};
  s.cells = demo_cells();
  return s;
}

ModelSpec three_d_demonstration() {
  ModelSpec s;
  s.edges = {{-0.5, 0.5, 1.5, 2.0, 3.5}, {-1.0, 0.0, 0.3, 1.0, 3.0}, {1.0, 1.5, 2.5}};
  s.prior = {0.2, 0.5, 0.3};
  for (const CellEntry& e : demo_cells()) {
    for (std::size_t l = 0; l < 4; ++l) {
      if (l == e.cls + 1) continue;  // middle cell l+1 is empty for class l
      s.cells.push_back({{e.index[0], l, e.index[1]}, e.cls, e.p / 3.0});
    }
  }
  return s;
}

ModelSpec study(std::vector<std::size_t> masked) {
  ModelSpec s = three_d_demonstration();
  for (std::size_t pos : {1, 3, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14}) {
    NoiseDim v;
    v.position = pos;
    s.noise.push_back(v);
  }
  s.mask = std::move(masked);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Models

ModelSpec parse_model_spec(const std::string& json_text) {
  const json j = parse_json(json_text, "model");
  try {
    if (!j.is_object()) throw Error(ErrorCode::kParse, "model must be a JSON object");
    ModelSpec s;
    for (const auto& a : require(j, "dims")) s.edges.push_back(number_list(a, "dims"));
    s.prior = number_list(require(j, "prior"), "prior");
    if (j.contains("classes")) {
      const json& m = j["classes"];
      if (!m.is_number_integer() || m.get<long long>() != static_cast<long long>(s.prior.size())) {
        throw Error(ErrorCode::kDimensionMismatch, "'classes' disagrees with the prior length");
      }
    }
    for (const auto& c : require(j, "cells")) {
      CellEntry e;
      e.index = index_list(require(c, "index"), "cell index");
      e.cls = one_based(require(c, "class"), "class");
      const json& p = require(c, "p");
      if (!p.is_number()) throw Error(ErrorCode::kParse, "'p' must be a number");
      e.p = p.get<double>();
      s.cells.push_back(std::move(e));
    }
    if (j.contains("rotation") && !j["rotation"].is_null()) {
      s.rotation = matrix(j["rotation"], "rotation");
    }
    if (j.contains("mask")) s.mask = index_list(j["mask"], "mask");
    if (j.contains("noise")) {
      for (const auto& v : j["noise"]) {
        NoiseDim n;
        if (v.is_object()) {
          n.position = one_based(require(v, "position"), "noise position");
          if (v.contains("edges")) n.edges = number_list(v["edges"], "noise edges");
          if (v.contains("pmf")) n.pmf = number_list(v["pmf"], "noise pmf");
        } else {
          n.position = one_based(v, "noise position");
        }
        s.noise.push_back(std::move(n));
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model: ") + e.what());
  }
}

HistogramModel parse_model(const std::string& json_text) {
  return build_model(parse_model_spec(json_text));
}

std::vector<std::string> builtin_names() {
  return {"2d-singular",  "3d-equiprobable", "2d-demonstration", "3d-demonstration",
          "study",        "study-masked1",   "study-masked135"};
}

bool is_builtin(const std::string& name) {
  for (const auto& n : builtin_names()) {
    if (n == name) return true;
  }
  return false;
}

HistogramModel builtin_model(const std::string& name) {
  if (name == "2d-singular") return build_model(two_d_singular());
  if (name == "3d-equiprobable") return build_model(three_d_equiprobable());
  if (name == "2d-demonstration") return build_model(two_d_demonstration());
  if (name == "3d-demonstration") return build_model(three_d_demonstration());
  if (name == "study") return build_model(study({}));
  if (name == "study-masked1") return build_model(study({0}));
  if (name == "study-masked135") return build_model(study({0, 2, 4}));
  throw Error(ErrorCode::kInvalidArgument, "unknown built-in model '" + name + "'");
}

HistogramModel load_model(const std::string& name_or_path) {
  if (is_builtin(name_or_path)) return builtin_model(name_or_path);
  return parse_model(read_file(name_or_path));
}

std::string model_to_json(const HistogramModel& model) {
  const BoundaryGrid& g = model.grid();
  const DiscreteJoint& jt = model.joint();
  json j;
  j["dims"] = g.all_edges();
  j["classes"] = model.classes();
  j["prior"] = jt.prior();
  json cells = json::array();
  for (std::size_t c = 0; c < g.total_cells(); ++c) {
    for (std::size_t y = 0; y < model.classes(); ++y) {
      const double p = jt.conditional(c, y);
      if (p == 0.0) continue;
      json idx = json::array();
      for (std::size_t i : g.unflatten(c)) idx.push_back(i + 1);
      cells.push_back({{"index", idx}, {"class", y + 1}, {"p", p}});
    }
  }
  j["cells"] = cells;
  if (model.rotation()) j["rotation"] = matrix_json(*model.rotation());
  if (!model.masked().empty()) {
    json m = json::array();
    for (std::size_t k : model.masked()) m.push_back(k + 1);
    j["mask"] = m;
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Encoders

namespace {

struct LayerContext {
  std::size_t dim = 0;
  std::optional<BoundaryGrid> grid;  // grid coordinates of this layer's input
};

Encoder parse_layer(const json& j, LayerContext& ctx, const HistogramModel& model);

BoundaryGrid grid_field(const json& j, const LayerContext& ctx, const char* what) {
  if (j.contains("dims")) {
    std::vector<std::vector<double>> edges;
    for (const auto& a : j["dims"]) edges.push_back(number_list(a, "dims"));
    return BoundaryGrid(std::move(edges));
  }
  if (!ctx.grid) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " needs explicit 'dims' at this position");
  }
  return *ctx.grid;
}

Encoder parse_layer(const json& j, LayerContext& ctx, const HistogramModel& model) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "encoder must be a JSON object");
  const std::string type = require(j, "type").get<std::string>();
  if (type == "selector") {
    auto coords = index_list(require(j, "coords"), "selector coordinate");
    for (std::size_t k : coords) {
      if (k >= ctx.dim) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    "selector coordinate " + std::to_string(k + 1) + " exceeds dimension " +
                        std::to_string(ctx.dim));
      }
    }
    Encoder e = Encoder::selector(coords);
    if (ctx.grid) ctx.grid = ctx.grid->restrict_to(coords);
    ctx.dim = coords.size();
    return e;
  }
  if (type == "mask") {
    auto coords = index_list(require(j, "coords"), "mask coordinate");
    for (std::size_t k : coords) {
      if (k >= ctx.dim) {
        throw Error(ErrorCode::kIndexOutOfRange,
                    "mask coordinate " + std::to_string(k + 1) + " exceeds dimension " +
                        std::to_string(ctx.dim));
      }
    }
    return Encoder::mask(std::move(coords));
  }
  if (type == "cells") {
    BoundaryGrid grid = grid_field(j, ctx, "cells");
    std::map<CellIndex, std::int64_t> groups;
    if (j.contains("groups")) {
      for (const auto& g : j["groups"]) {
        const json& lab = require(g, "group");
        if (!lab.is_number_integer()) throw Error(ErrorCode::kParse, "'group' must be an integer");
        groups[index_list(require(g, "index"), "cell index")] = lab.get<std::int64_t>();
      }
    }
    return Encoder::cells(std::move(grid), std::move(groups));
  }
  if (type == "dyadic") {
    const json& m = require(j, "m");
    if (!m.is_number_integer() || m.get<long long>() < 1) {
      throw Error(ErrorCode::kInvalidArgument, "dyadic level 'm' must be an integer >= 1");
    }
    std::size_t d = ctx.dim;
    if (j.contains("d")) {
      d = j["d"].get<std::size_t>();
      if (d != ctx.dim) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "dyadic d=" + std::to_string(d) + " but the input has dimension " +
                        std::to_string(ctx.dim));
      }
    }
    return Encoder::dyadic(static_cast<unsigned>(m.get<long long>()), d);
  }
  if (type == "orbit") return Encoder::orbit(grid_field(j, ctx, "orbit"));
  if (type == "transform") {
    Eigen::MatrixXd u;
    if (j.contains("u")) {
      u = matrix(j["u"], "transform u");
    } else if (model.rotation()) {
      u = *model.rotation();
    } else {
      u = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(ctx.dim),
                                    static_cast<Eigen::Index>(ctx.dim));
    }
    if (static_cast<std::size_t>(u.rows()) != ctx.dim) {
      throw Error(ErrorCode::kDimensionMismatch, "transform size does not match the input");
    }
    auto coords = index_list(require(j, "coords"), "transform coordinate");
    Encoder e = Encoder::transform(std::move(u), coords);
    ctx.grid = ctx.dim == model.dim() ? std::optional<BoundaryGrid>(model.grid().restrict_to(coords))
                                      : std::nullopt;
    ctx.dim = coords.size();
    return e;
  }
  if (type == "constant") return Encoder::constant();
  if (type == "chain") {
    std::vector<Encoder> layers;
    for (const auto& l : require(j, "layers")) layers.push_back(parse_layer(l, ctx, model));
    if (layers.empty()) throw Error(ErrorCode::kShapeMismatch, "chain needs at least one layer");
    return compose(std::move(layers));
  }
  throw Error(ErrorCode::kParse, "unknown encoder type '" + type + "'");
}

}  // namespace

Encoder parse_encoder(const std::string& json_text, const HistogramModel& model) {
  const json j = parse_json(json_text, "encoder");
  try {
    LayerContext ctx{model.dim(), model.grid()};
    return parse_layer(j, ctx, model);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("encoder: ") + e.what());
  }
}

Encoder load_encoder(const std::string& json_or_path, const HistogramModel& model) {
  const auto first = json_or_path.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && json_or_path[first] == '{') {
    return parse_encoder(json_or_path, model);
  }
  return parse_encoder(read_file(json_or_path), model);
}

// ---------------------------------------------------------------------------
// Text output

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string dataset_csv(const Dataset& data) {
  std::string out;
  for (std::size_t k = 0; k < data.dim; ++k) out += "x" + std::to_string(k + 1) + ",";
  out += "y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) {
      out += format_double(v);
      out += ',';
    }
    out += std::to_string(data.y[i] + 1);
    out += '\n';
  }
  return out;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string measure_records_json(const std::vector<MeasureRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) {
    json o = {{"measure", r.measure},
              {"value_bits", r.value_bits},
              {"model_id", r.model_id},
              {"encoder_id", r.encoder_id}};
    if (r.std_error) o["stderr"] = *r.std_error;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(reinterpret_cast<std::uintptr_t>(&content));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIo, "short write to '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into '" + path + "'");
  }
}

}  // namespace infolab
