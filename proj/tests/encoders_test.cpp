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

#include "infolab/encoders.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "infolab/error.hpp"
#include "infolab/infocalc.hpp"
#include "infolab/model_io.hpp"
#include "support/random_models.hpp"

namespace infolab {
namespace {

constexpr std::int64_t kOuter = std::numeric_limits<std::int64_t>::min();

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

TEST(Selector, ProjectsCoordinates) {
  std::vector<double> x(15);
  for (std::size_t k = 0; k < 15; ++k) x[k] = static_cast<double>(k + 1);
  const auto r = apply_continuous(Encoder::selector({0, 2, 4}), x);
  EXPECT_EQ(r, (std::vector<double>{1, 3, 5}));
  EXPECT_EQ(code_of([] { Encoder::selector({2, 1}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { Encoder::selector({}); }), ErrorCode::kInvalidArgument);
  const std::vector<double> small{1.0};
  EXPECT_EQ(code_of([&] { infolab::apply(Encoder::selector({3}), small); }), ErrorCode::kDimensionMismatch);
}

TEST(Mask, ZeroesCoordinates) {
  const std::vector<double> x{1.5, -2.0, 3.0};
  EXPECT_EQ(apply_continuous(Encoder::mask({1}), x), (std::vector<double>{1.5, 0.0, 3.0}));
}

TEST(Dyadic, LabelsByFloorOfScaledCoordinate) {
  const auto enc = Encoder::dyadic(1, 2);
  // [0, 0.5) x [-1, -0.5) carries the label (floor(0.25*2), floor(-0.75*2)).
  const std::vector<double> x{0.25, -0.75};
  EXPECT_EQ(std::get<Label>(infolab::apply(enc, x)), (Label{0, -2}));
  const std::vector<double> far{5.0, 5.0};
  EXPECT_EQ(std::get<Label>(infolab::apply(enc, far)), (Label{kOuter}));
  const std::vector<double> edge{1.0, 0.0};
  EXPECT_EQ(std::get<Label>(infolab::apply(enc, edge)), (Label{kOuter}));
  const std::vector<double> corner{-1.0, -1.0};
  EXPECT_EQ(std::get<Label>(infolab::apply(enc, corner)), (Label{-2, -2}));
}

TEST(Dyadic, AlphabetSizes) {
  const auto fam = dyadic_family(2, 3);
  ASSERT_EQ(fam.size(), 3u);
  // (m * 2^(m+1))^d + 1 per level.
  const std::size_t expect[3] = {17, 257, 2305};
  for (int m = 0; m < 3; ++m) {
    EXPECT_EQ(std::get<DyadicEnc>(fam[m].variant()).alphabet_size(), expect[m]);
  }
}

TEST(Dyadic, AlphabetSizeMatchesObservedLabels) {
  // Count distinct labels on a fine lattice covering [-m-1, m+1)^2.
  for (unsigned m = 1; m <= 2; ++m) {
    const auto enc = Encoder::dyadic(m, 2);
    std::set<Label> seen;
    const double step = std::ldexp(1.0, -static_cast<int>(m) - 1);
    for (double a = -static_cast<double>(m) - 1; a < m + 1; a += step) {
      for (double b = -static_cast<double>(m) - 1; b < m + 1; b += step) {
        seen.insert(std::get<Label>(infolab::apply(enc, std::vector<double>{a, b})));
      }
    }
    EXPECT_EQ(seen.size(), std::get<DyadicEnc>(enc.variant()).alphabet_size());
  }
}

TEST(Dyadic, LevelsAreNested) {
  testing::Rng rng(4);
  for (unsigned m = 1; m <= 4; ++m) {
    const auto coarse = Encoder::dyadic(m, 2);
    const auto fine = Encoder::dyadic(m + 1, 2);
    std::map<Label, Label> parent;
    for (int t = 0; t < 4000; ++t) {
      const std::vector<double> x{-m + 2.0 * m * testing::unit(rng), -m + 2.0 * m * testing::unit(rng)};
      const auto f = std::get<Label>(infolab::apply(fine, x));
      const auto c = std::get<Label>(infolab::apply(coarse, x));
      auto [it, fresh] = parent.emplace(f, c);
      if (!fresh) {
        EXPECT_EQ(it->second, c);
      }
    }
  }
}

TEST(Orbit, IdentifiesPermutedIndices) {
  const auto m = builtin_model("2d-singular");
  const auto enc = orbit_encoder(m);
  const std::vector<double> a{-0.5, 0.5}, b{0.5, -0.5}, c{0.5, 0.5};
  EXPECT_EQ(infolab::apply(enc, a), infolab::apply(enc, b));
  EXPECT_NE(infolab::apply(enc, a), infolab::apply(enc, c));
  EXPECT_EQ(code_of([] { orbit_encoder(builtin_model("2d-demonstration")); }),
            ErrorCode::kHeterogeneousGrids);
}

TEST(Orbit, ConstantOnPermutationOrbits) {
  testing::Rng rng(8);
  const auto m = builtin_model("3d-equiprobable");
  const auto enc = orbit_encoder(m);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> x{-1.5 + 3 * testing::unit(rng), -1.5 + 3 * testing::unit(rng),
                          -1.5 + 3 * testing::unit(rng)};
    const auto ref = infolab::apply(enc, x);
    std::sort(x.begin(), x.end());
    do {
      EXPECT_EQ(infolab::apply(enc, x), ref);
    } while (std::next_permutation(x.begin(), x.end()));
  }
}

TEST(CellQuantizer, GroupingMustBeTotal) {
  BoundaryGrid g(std::vector<std::vector<double>>{{0, 1, 2}});
  std::map<CellIndex, std::int64_t> partial{{CellIndex{0}, 1}};
  EXPECT_EQ(code_of([&] { Encoder::cells(g, partial); }), ErrorCode::kInvalidArgument);
}

TEST(Compose, FlattensAndChecksShapes) {
  const auto a = Encoder::selector({0, 1, 2, 3, 4});
  const auto b = Encoder::selector({0, 2});
  const auto c = compose({a, compose({b, Encoder::constant()})});
  EXPECT_EQ(c.describe(), "chain[selector(1,2,3,4,5)>selector(1,3)>constant]");
  EXPECT_EQ(prefixes(c).size(), 3u);
  EXPECT_EQ(code_of([&] { compose({Encoder::constant(), a}); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([&] { compose({b, a}); }), ErrorCode::kShapeMismatch);
}

TEST(Compose, SingleLayerEqualsLayer) {
  const auto m = builtin_model("2d-demonstration");
  const auto enc = Encoder::selector({1});
  const auto q1 = pushforward(m, enc);
  const auto q2 = pushforward(m, compose({enc}));
  ASSERT_EQ(q1.table.size(), q2.table.size());
  for (std::size_t i = 0; i < q1.table.size(); ++i) EXPECT_EQ(q1.table[i], q2.table[i]);
}

TEST(Compose, StudyCellChainIsSufficient) {
  const auto m = builtin_model("study");
  const auto sel = Encoder::selector({0, 1, 2, 3, 4});
  const std::vector<std::size_t> axes{0, 1, 2, 3, 4};
  const auto chain = compose({sel, Encoder::cells(m.grid().restrict_to(axes))});
  EXPECT_NEAR(mil(m, chain), 0.0, 1e-12);
  EXPECT_NEAR(mil(m, compose({sel, Encoder::constant()})), mutual_information(m), 1e-12);
}

TEST(CellImage, PiecesPartitionEachCellAndAgreeWithApply) {
  testing::Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    const auto m = testing::random_model(rng);
    const auto enc = testing::random_discrete_encoder(rng, m);
    const auto& g = m.grid();
    for (std::size_t c = 0; c < g.total_cells(); ++c) {
      const auto pieces = cell_image(enc, m, c);
      const Box box = cell_box(g, c);
      double vol = 0.0;
      for (const auto& p : pieces) {
        vol += volume_fraction(p.preimage, box);
        // A point drawn inside the piece maps to the piece's label.
        std::vector<double> x;
        for (const auto& iv : p.preimage) x.push_back(iv.lo + (iv.hi - iv.lo) * testing::unit(rng));
        EXPECT_EQ(std::get<Label>(infolab::apply(enc, x)), p.label) << enc.describe();
      }
      EXPECT_NEAR(vol, 1.0, 1e-12);
    }
  }
}

TEST(TransformSelector, MatchesSelectorOnLatentModel) {
  testing::Rng rng(21);
  const auto base = builtin_model("3d-demonstration");
  const auto u = testing::random_rotation(rng, 3);
  const auto rotated = rotate(base, u);
  for (const std::vector<std::size_t>& coords :
       {std::vector<std::size_t>{0}, {1}, {0, 2}, {0, 1, 2}}) {
    const auto a = pushforward(rotated, Encoder::transform(u, coords));
    const auto b = pushforward(base, Encoder::selector(coords));
    ASSERT_EQ(a.table.size(), b.table.size());
    for (std::size_t i = 0; i < a.table.size(); ++i) EXPECT_NEAR(a.table[i], b.table[i], 1e-12);
    EXPECT_NEAR(mi(a), mi_selector(base, coords), 1e-12);
  }
  // Pointwise: (U^T x)_j equals the latent coordinate.
  const Dataset d = sample(rotated, 1, 50);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto z = rotated.to_latent(d.row(i));
    const auto r = apply_continuous(Encoder::transform(u, {1}), d.row(i));
    EXPECT_NEAR(r[0], z[1], 1e-12);
  }
}

TEST(Pushforward, SelectorOnRotatedModelIsNotExact) {
  testing::Rng rng(3);
  const auto rotated = rotate(builtin_model("2d-demonstration"), testing::random_rotation(rng, 2));
  EXPECT_EQ(code_of([&] { pushforward(rotated, Encoder::selector({0})); }),
            ErrorCode::kNotExactlyComputable);
}

}  // namespace
}  // namespace infolab
