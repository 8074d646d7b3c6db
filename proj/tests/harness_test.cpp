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

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "infolab/error.hpp"
#include "infolab/infocalc.hpp"
#include "infolab/model_io.hpp"

namespace infolab {
namespace {

using Row = std::map<std::string, std::string>;

std::vector<Row> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  // Quoted fields may hold commas; doubled quotes stand for one quote.
  auto split = [](const std::string& s) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (quoted && c == '"' && i + 1 < s.size() && s[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        out.emplace_back();
      } else {
        out.back() += c;
      }
    }
    return out;
  };
  const auto header = split(line);
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    const auto f = split(line);
    EXPECT_EQ(f.size(), header.size()) << line;
    Row r;
    for (std::size_t i = 0; i < header.size() && i < f.size(); ++i) r[header[i]] = f[i];
    rows.push_back(r);
  }
  return rows;
}

Fig2Spec tiny_spec() {
  Fig2Spec s;
  s.models = {"study-masked135"};
  s.archs = {"mlp32"};
  s.ns = {200};
  s.pre_encoder = {false, true};
  s.seeds = {1, 2};
  s.epochs = 2;
  s.validation_size = 500;
  return s;
}

TEST(Study, SelfCheckValues) {
  StudyCheck c;
  const auto m = build_study_models(&c);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(c.cond_entropy[k], kStudyCondEntropy[k], 1e-3);
    EXPECT_NEAR(c.mi[k], kStudyMI[k], 1e-3);
  }
  EXPECT_NEAR(c.class_entropy, kStudyClassEntropy, 1e-6);
  EXPECT_NEAR(c.selector_mil, 0.0, 1e-12);
  EXPECT_EQ(m.full.dim(), 15u);
  EXPECT_EQ(m.masked135.masked().size(), 3u);
}

TEST(Fig2, TinyMatrixShapeAndDeterminism) {
  auto spec = tiny_spec();
  std::size_t seen = 0;
  const auto a = run_fig2(spec, [&](const Fig2Run&) { ++seen; });
  EXPECT_EQ(seen, 4u);
  ASSERT_EQ(a.runs.size(), 4u);
  const auto runs = parse_csv(a.runs_csv);
  EXPECT_EQ(runs.size(), 8u);
  const auto avg = parse_csv(a.fig2_csv);
  ASSERT_EQ(avg.size(), 4u);
  for (const auto& r : avg) {
    EXPECT_EQ(r.at("model"), "study-masked135");
    EXPECT_EQ(r.at("seed_avg"), "2");
    EXPECT_NEAR(std::stod(r.at("href_bits")), 1.485475, 1e-5);
    EXPECT_TRUE(r.at("pre_encoder") == "none" || r.at("pre_encoder") == "selector(1,2,3,4,5)");
  }
  // The averaged row equals the mean of the seed rows.
  const double mean = (a.runs[0].epochs[1].val_risk_bits + a.runs[1].epochs[1].val_risk_bits) / 2;
  EXPECT_NEAR(std::stod(avg[1].at("val_risk_bits")), mean, 1e-12);

  spec.workers = 2;
  const auto b = run_fig2(spec);
  EXPECT_EQ(a.runs_csv, b.runs_csv);
  EXPECT_EQ(a.fig2_csv, b.fig2_csv);
}

TEST(Fig2, SpecParsing) {
  const auto s = parse_fig2_spec(R"({"kind":"fig2","archs":["mlp32"],"n":[100],"epochs":3})",
                                 false);
  EXPECT_EQ(s.archs, std::vector<std::string>({"mlp32"}));
  EXPECT_EQ(s.ns, std::vector<std::size_t>({100}));
  EXPECT_EQ(s.epochs, 3u);
  EXPECT_EQ(parse_fig2_spec("{}", true).ns.size(), 5u);
  EXPECT_THROW(parse_fig2_spec(R"({"epoch":3})", false), Error);
  EXPECT_THROW(parse_fig2_spec(R"({"models":["2d-singular"]})", false), Error);
  EXPECT_THROW(parse_sweep_spec(R"({"dyadic_levels":3})"), Error);
  EXPECT_EQ(parse_sweep_spec(R"({"ib_steps":4})").ib_steps, 4u);
}

TEST(Sweeps, DyadicRowsAreConsistent) {
  SweepSpec s;
  s.dyadic_max_level = 3;
  s.ib_models = {"2d-singular"};
  s.ib_steps = 4;
  const auto r = run_expressiveness_sweeps(s);
  const auto rows = parse_csv(r.dyadic_csv);
  EXPECT_EQ(rows.size(), 4u * 3u);
  std::map<std::string, double> prev;
  for (const auto& row : rows) {
    const double mi = std::stod(row.at("mi_bits"));
    const double ix = std::stod(row.at("mi_x_bits"));
    EXPECT_LE(mi, ix + 1e-9);
    EXPECT_NEAR(std::stod(row.at("loss_bits")), ix - mi, 1e-12);
    const auto& id = row.at("model");
    if (prev.count(id)) {
      EXPECT_GE(mi, prev[id] - 1e-9) << id;
    }
    prev[id] = mi;
    if (id.rfind("2d", 0) == 0) {
      const int m = std::stoi(row.at("m"));
      EXPECT_EQ(std::stoull(row.at("alphabet_size")),
                static_cast<unsigned long long>(std::pow(m * (1 << (m + 1)), 2)) + 1);
    }
  }
  EXPECT_NEAR(prev["2d-singular"], 1.0, 1e-12);
}

TEST(Sweeps, IBRowsRespectBounds) {
  SweepSpec s;
  s.dyadic_models = {};
  s.ib_steps = 5;
  const auto rows = parse_csv(run_expressiveness_sweeps(s).ib_csv);
  ASSERT_FALSE(rows.empty());
  std::map<std::string, std::size_t> per_solver;
  for (const auto& row : rows) {
    EXPECT_LE(std::stod(row.at("H_U_bits")), std::stod(row.at("B_bits")) + 1e-9);
    EXPECT_GE(std::stod(row.at("loss_bits")), -1e-12);
    ++per_solver[row.at("model") + "/" + row.at("solver")];
  }
  EXPECT_EQ(per_solver["2d-singular/greedy"], 6u);
  EXPECT_EQ(per_solver["2d-singular/exhaustive"], 6u);
  EXPECT_EQ(per_solver.count("study-marginal/greedy"), 1u);
}

TEST(Sweeps, StudyMarginalModel) {
  const auto m = sweep_model("study-marginal");
  EXPECT_EQ(m.dim(), 5u);
  EXPECT_NEAR(mutual_information(m), mutual_information(builtin_model("study")), 1e-12);
  EXPECT_NEAR(cell_entropy(builtin_model("2d-singular")), 2.0, 1e-12);
}

TEST(Measures, TableContainsReferenceValues) {
  const auto rows = parse_csv(measures_csv());
  bool found = false;
  for (const auto& r : rows) {
    if (r.at("model_id") == "study" && r.at("measure") == "I(X;Y)") {
      EXPECT_NEAR(std::stod(r.at("value_bits")), 1.182, 1e-3);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Parallel, CoversEveryIndexAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

}  // namespace
}  // namespace infolab
