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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

namespace {

struct ModelDel {
  void operator()(il_model* m) const { il_model_free(m); }
};
struct EncDel {
  void operator()(il_encoder* e) const { il_encoder_free(e); }
};
using ModelPtr = std::unique_ptr<il_model, ModelDel>;
using EncPtr = std::unique_ptr<il_encoder, EncDel>;

ModelPtr load(const char* name) {
  il_model* m = nullptr;
  EXPECT_EQ(il_model_load(name, &m), IL_OK) << il_last_error();
  return ModelPtr(m);
}

EncPtr encoder(const char* json, const il_model* m) {
  il_encoder* e = nullptr;
  EXPECT_EQ(il_encoder_parse(json, m, &e), IL_OK) << il_last_error();
  return EncPtr(e);
}

std::string take(char* s) {
  std::string out = s ? s : "";
  il_string_free(s);
  return out;
}

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(il_version(), "0.1.0");
  EXPECT_STREQ(il_status_name(IL_OK), "Ok");
  EXPECT_STREQ(il_status_name(IL_PARSE), "Parse");
  EXPECT_STREQ(il_status_name(static_cast<il_status>(42)), "Unknown");
}

TEST(CApi, ModelBasics) {
  auto m = load("2d-singular");
  size_t d = 0, c = 0;
  ASSERT_EQ(il_model_dim(m.get(), &d), IL_OK);
  ASSERT_EQ(il_model_classes(m.get(), &c), IL_OK);
  EXPECT_EQ(d, 2u);
  EXPECT_EQ(c, 2u);
  const double x[2] = {-0.5, -0.5};
  double pdf = 0.0;
  ASSERT_EQ(il_model_pdf(m.get(), x, 2, 1, &pdf), IL_OK);
  EXPECT_DOUBLE_EQ(pdf, 0.5);
  double post[2];
  ASSERT_EQ(il_model_posterior(m.get(), x, 2, post, 2), IL_OK);
  EXPECT_DOUBLE_EQ(post[0], 1.0);
  EXPECT_EQ(il_model_pdf(m.get(), x, 2, 3, &pdf), IL_INDEX_OUT_OF_RANGE);
  const double far[2] = {5.0, 5.0};
  EXPECT_EQ(il_model_posterior(m.get(), far, 2, post, 2), IL_OUTSIDE_SUPPORT);
  EXPECT_NE(std::string(il_last_error()), "");
}

TEST(CApi, LoadErrorsSetStatusAndMessage) {
  il_model* m = nullptr;
  EXPECT_EQ(il_model_load("/no/such/model.json", &m), IL_IO);
  EXPECT_EQ(m, nullptr);
  EXPECT_NE(std::string(il_last_error()).find("no/such"), std::string::npos);
  EXPECT_EQ(il_model_parse("{", &m), IL_PARSE);
  EXPECT_EQ(il_model_load(nullptr, &m), IL_INVALID_ARGUMENT);
}

TEST(CApi, JsonRoundTripAndSampling) {
  auto m = load("2d-demonstration");
  const std::string json = take([&] {
    char* s = nullptr;
    EXPECT_EQ(il_model_to_json(m.get(), &s), IL_OK);
    return s;
  }());
  il_model* back = nullptr;
  ASSERT_EQ(il_model_parse(json.c_str(), &back), IL_OK);
  ModelPtr b(back);
  double a1 = 0, a2 = 0;
  il_mutual_information(m.get(), &a1);
  il_mutual_information(b.get(), &a2);
  EXPECT_DOUBLE_EQ(a1, a2);

  char* c1 = nullptr;
  char* c2 = nullptr;
  ASSERT_EQ(il_model_sample_csv(m.get(), 3, 10, &c1), IL_OK);
  ASSERT_EQ(il_model_sample_csv(m.get(), 3, 10, &c2), IL_OK);
  const std::string s1 = take(c1), s2 = take(c2);
  EXPECT_EQ(s1, s2);
  EXPECT_EQ(s1.rfind("x1,x2,y\n", 0), 0u);
}

TEST(CApi, StudyMeasures) {
  auto m = load("study");
  double v = 0.0;
  ASSERT_EQ(il_mutual_information(m.get(), &v), IL_OK);
  EXPECT_NEAR(v, 1.182, 1e-3);
  ASSERT_EQ(il_conditional_entropy(m.get(), &v), IL_OK);
  EXPECT_NEAR(v, 0.303532, 1e-5);
  ASSERT_EQ(il_class_entropy(m.get(), &v), IL_OK);
  EXPECT_NEAR(v, 1.485475, 1e-6);
  auto sel = encoder(R"({"type":"selector","coords":[1,2,3,4,5]})", m.get());
  ASSERT_EQ(il_mil(m.get(), sel.get(), &v), IL_OK);
  EXPECT_NEAR(v, 0.0, 1e-12);
  auto mask = encoder(R"({"type":"chain","layers":[{"type":"mask","coords":[1]},{"type":"cells"}]})",
                      m.get());
  double mil = 0.0, ip = 0.0, imi = 0.0;
  ASSERT_EQ(il_mil(m.get(), mask.get(), &mil), IL_OK);
  ASSERT_EQ(il_ip_error(m.get(), mask.get(), &ip), IL_OK);
  ASSERT_EQ(il_encoder_mi(m.get(), mask.get(), &imi), IL_OK);
  EXPECT_NEAR(mil, ip, 1e-12);
  EXPECT_NEAR(imi, 0.532, 1e-3);
}

TEST(CApi, DecompositionAndLayers) {
  auto m = load("3d-demonstration");
  auto chain = encoder(R"({"type":"chain","layers":[
      {"type":"selector","coords":[1,2]},{"type":"selector","coords":[2]},{"type":"cells"}]})",
                       m.get());
  il_decomposition d{};
  ASSERT_EQ(il_decompose(m.get(), chain.get(), 0.25, &d), IL_OK);
  EXPECT_NEAR(d.total, d.conditional_entropy + d.encoder_effect + d.decoder_effect, 1e-9);
  EXPECT_GT(d.decoder_effect, 0.0);
  EXPECT_EQ(il_decompose(m.get(), chain.get(), 1.5, &d), IL_INVALID_ARGUMENT);

  size_t count = 0;
  ASSERT_EQ(il_encoder_prefixes(chain.get(), nullptr, 0, &count), IL_OK);
  ASSERT_EQ(count, 3u);
  il_encoder* raw[3] = {nullptr, nullptr, nullptr};
  ASSERT_EQ(il_encoder_prefixes(chain.get(), raw, 3, &count), IL_OK);
  EncPtr p0(raw[0]), p1(raw[1]), p2(raw[2]);
  const il_encoder* layers[3] = {raw[0], raw[1], raw[2]};
  double losses[3];
  ASSERT_EQ(il_layer_losses(m.get(), layers, 3, losses), IL_OK);
  double total = 0.0;
  ASSERT_EQ(il_mil(m.get(), chain.get(), &total), IL_OK);
  EXPECT_NEAR(losses[0] + losses[1] + losses[2], total, 1e-9);
  const std::string desc = take([&] {
    char* s = nullptr;
    il_encoder_describe(raw[1], &s);
    return s;
  }());
  EXPECT_NE(desc.find("selector"), std::string::npos);
}

TEST(CApi, ModelTransforms) {
  auto m = load("2d-demonstration");
  double base = 0.0, v = 0.0;
  il_mutual_information(m.get(), &base);
  const double c = std::cos(0.4), s = std::sin(0.4);
  const double u[4] = {c, -s, s, c};
  il_model* r = nullptr;
  ASSERT_EQ(il_model_rotate(m.get(), u, 2, &r), IL_OK);
  ModelPtr rp(r);
  il_mutual_information(r, &v);
  EXPECT_NEAR(v, base, 1e-12);
  const double bad[4] = {1, 1, 0, 1};
  EXPECT_EQ(il_model_rotate(m.get(), bad, 2, &r), IL_NOT_ORTHONORMAL);

  const size_t pos[2] = {1, 4};
  il_model* sp = nullptr;
  ASSERT_EQ(il_model_sparsify(m.get(), pos, 2, &sp), IL_OK);
  ModelPtr spp(sp);
  size_t d = 0;
  il_model_dim(sp, &d);
  EXPECT_EQ(d, 4u);
  il_mutual_information(sp, &v);
  EXPECT_NEAR(v, base, 1e-12);

  const size_t coords[1] = {1};
  il_model* mk = nullptr;
  ASSERT_EQ(il_model_mask(m.get(), coords, 1, &mk), IL_OK);
  ModelPtr mkp(mk);
  il_mutual_information(mk, &v);
  EXPECT_LE(v, base + 1e-12);

  auto sing = load("2d-singular");
  il_model* sym = nullptr;
  ASSERT_EQ(il_model_symmetrize(sing.get(), &sym), IL_OK);
  il_model_free(sym);
}

TEST(CApi, MonteCarloAndSweeps) {
  auto m = load("2d-singular");
  double value = 0.0, se = 1.0;
  ASSERT_EQ(il_mc_risk(m.get(), 0.0, 1000, 1, &value, &se), IL_OK);
  EXPECT_NEAR(value, 0.0, 1e-12);
  ASSERT_EQ(il_mc_risk(m.get(), 1.0, 1000, 1, &value, &se), IL_OK);
  EXPECT_NEAR(value, 1.0, 1e-12);

  const double bounds[3] = {0.0, 1.0, 2.0};
  const std::string ib = take([&] {
    char* s = nullptr;
    EXPECT_EQ(il_ib_curve_csv(m.get(), bounds, 3, "exhaustive", &s), IL_OK);
    return s;
  }());
  EXPECT_EQ(ib.rfind("B_bits,H_U_bits,I_UY_bits,loss_bits,solver,groups\n", 0), 0u);
  char* s = nullptr;
  EXPECT_EQ(il_ib_curve_csv(m.get(), bounds, 3, "annealing", &s), IL_INVALID_ARGUMENT);
  const std::string dy = take([&] {
    char* out = nullptr;
    EXPECT_EQ(il_dyadic_sweep_csv(m.get(), 2, &out), IL_OK);
    return out;
  }());
  EXPECT_NE(dy.find("\n2,257,"), std::string::npos);
}

TEST(CApi, TrainAndSelfCheck) {
  il_study_check c{};
  ASSERT_EQ(il_study_self_check(&c), IL_OK);
  EXPECT_NEAR(c.mi[1], 0.532, 1e-3);
  auto m = load("study-masked135");
  auto pre = encoder(R"({"type":"selector","coords":[1,2,3,4,5]})", m.get());
  const std::string csv = take([&] {
    char* s = nullptr;
    EXPECT_EQ(il_train_csv(m.get(), "study-masked135", "mlp32", 100, 2, 1, pre.get(), 200, &s),
              IL_OK)
        << il_last_error();
    return s;
  }());
  EXPECT_NE(csv.find("\"selector(1,2,3,4,5)\""), std::string::npos);
  char* s = nullptr;
  EXPECT_EQ(il_train_csv(m.get(), "x", "mlp9", 100, 1, 1, nullptr, 100, &s),
            IL_INVALID_ARGUMENT);
}

TEST(CApi, ReproduceMeasuresWritesFile) {
  const auto dir = std::filesystem::temp_directory_path() / "infolab_capi_test";
  std::filesystem::remove_all(dir);
  char* summary = nullptr;
  ASSERT_EQ(il_reproduce("measures", nullptr, 0, 1, dir.string().c_str(), &summary), IL_OK)
      << il_last_error();
  take(summary);
  std::ifstream in(dir / "measures.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "model_id,measure,encoder_id,value_bits");
  std::filesystem::remove_all(dir);
  EXPECT_EQ(il_reproduce("bogus", nullptr, 0, 1, dir.string().c_str(), &summary),
            IL_INVALID_ARGUMENT);
}

TEST(CApi, Units) {
  ASSERT_EQ(il_set_units("nats"), IL_OK);
  EXPECT_NEAR(il_to_units(1.0), std::log(2.0), 1e-15);
  EXPECT_STREQ(il_units_suffix(), "nats");
  ASSERT_EQ(il_set_units("bits"), IL_OK);
  EXPECT_EQ(il_set_units("bytes"), IL_INVALID_ARGUMENT);
}

}  // namespace
