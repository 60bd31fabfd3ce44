#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "systems.hpp"

using namespace selfconf;

namespace {

bool has_condition(const ValidationReport& r, const std::string& name) {
  for (const auto& v : r.violations)
    if (v.condition == name) return true;
  return false;
}

Word random_word(std::mt19937_64& rng, std::size_t m, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(1, max_len), letter(0, m - 1);
  Word w(len(rng));
  for (auto& c : w) c = letter(rng);
  return w;
}

}  // namespace

TEST(Validate, CantorIsClean) { EXPECT_TRUE(validate(fixtures::cantor()).ok()); }

TEST(Validate, EveryFixtureIsClean) {
  for (const auto& s : fixtures::all()) {
    const auto r = validate(s);
    EXPECT_TRUE(r.ok()) << (r.ok() ? "" : r.lines().front());
  }
}

TEST(Validate, HalvesViolateConditionThree) {
  const IFSystem s({Affine{0.5, 0.0}, Affine{0.5, 0.5}}, {0.5, 0.5});
  const auto r = validate(s);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].condition, "condition-3");
}

TEST(Validate, WeightSum) {
  const IFSystem s({Affine{1.0 / 3.0, 0.0}, Affine{1.0 / 3.0, 2.0 / 3.0}}, {0.6, 0.5});
  EXPECT_TRUE(has_condition(validate(s), "weight-sum"));
}

TEST(Validate, MalformedInputsBecomeViolations) {
  EXPECT_TRUE(has_condition(validate(IFSystem({Affine{0.3, 0.0}}, {1.0})), "map-count"));
  EXPECT_TRUE(has_condition(validate(IFSystem({Affine{0.3, 0.0}, Affine{0.3, 0.7}}, {1.0})), "weight-count"));
  EXPECT_TRUE(has_condition(validate(IFSystem({Affine{0.3, 0.0}, Affine{0.3, 0.7}}, {1.5, -0.5})),
                            "weight-positive"));
  EXPECT_TRUE(has_condition(validate(IFSystem({Affine{NAN, 0.0}, Affine{0.3, 0.7}}, {0.5, 0.5})), "finite"));
  EXPECT_TRUE(has_condition(validate(IFSystem({Moebius{1.0, 2.0, 2.0, 4.0}, Affine{0.3, 0.7}}, {0.5, 0.5})),
                            "diffeomorphism"));
  EXPECT_TRUE(has_condition(validate(IFSystem({Moebius{1.0, 0.0, 2.0, -1.0}, Affine{0.3, 0.7}}, {0.5, 0.5})),
                            "diffeomorphism"));
  EXPECT_TRUE(has_condition(validate(IFSystem({Affine{0.3, 0.5}, Affine{0.3, 0.1}}, {0.5, 0.5})), "ordering"));
  EXPECT_TRUE(has_condition(validate(IFSystem({Affine{0.3, 0.0}, Affine{0.3, 0.8}}, {0.5, 0.5})),
                            "maps-into-unit"));
}

TEST(Validate, MoebiusSOneIsRejected) {
  EXPECT_TRUE(has_condition(validate(fixtures::deformed_cantor(1.0)), "condition-3"));
}

TEST(Compose, CantorWordOneTwo) {
  const auto s = fixtures::cantor();
  const auto phi = compose(s, {0, 1});
  ASSERT_TRUE(phi.has_closed_form());
  for (double x : {0.0, 0.3, 1.0}) EXPECT_NEAR(phi(x), x / 9.0 + 2.0 / 9.0, 1e-16);
  EXPECT_NEAR(phi.image().lo, 2.0 / 9.0, 1e-16);
  EXPECT_NEAR(phi.image().hi, 3.0 / 9.0, 1e-16);
}

TEST(Compose, EmptyWordIsIdentity) {
  const auto s = fixtures::mixed();
  const auto phi = compose(s, {});
  EXPECT_EQ(phi(0.42), 0.42);
  EXPECT_EQ(phi.derivative(0.42), 1.0);
  EXPECT_EQ(phi.image().lo, 0.0);
  EXPECT_EQ(phi.image().hi, 1.0);
}

TEST(Compose, DeformedFirstMapAtSOne) {
  const auto s = fixtures::deformed_cantor(1.0);
  const auto phi = compose(s, {0});
  for (double x : {0.0, 0.25, 0.5, 1.0}) EXPECT_NEAR(phi(x), x / (3.0 + 2.0 * x), 1e-15);
}

TEST(Compose, ClosedFormMatchesNesting) {
  std::mt19937_64 rng(7);
  for (const auto& s : {fixtures::deformed_cantor(), fixtures::mixed()}) {
    for (int t = 0; t < 50; ++t) {
      const auto phi = compose(s, random_word(rng, s.size(), 10));
      for (double x : {0.0, 0.2, 0.7, 1.0}) {
        EXPECT_NEAR(phi(x), phi.nested_value(x), 1e-15);
        EXPECT_NEAR(phi.derivative(x), phi.nested_derivative(x), 1e-12 * std::abs(phi.nested_derivative(x)));
      }
    }
  }
}

TEST(FixedPoint, CantorExamples) {
  const auto s = fixtures::cantor();
  EXPECT_NEAR(fixed_point(s, {0}), 0.0, 1e-15);
  EXPECT_NEAR(fixed_point(s, {1}), 1.0, 1e-15);
  EXPECT_NEAR(fixed_point(s, {0, 1}), 0.25, 1e-15);
  EXPECT_THROW(fixed_point(s, {}), std::invalid_argument);
}

TEST(FixedPoint, RandomWordsAreFixed) {
  std::mt19937_64 rng(11);
  for (const auto& s : fixtures::all()) {
    for (int t = 0; t < 100; ++t) {
      const Word w = random_word(rng, s.size(), 8);
      const double x = fixed_point(s, w);
      EXPECT_LT(std::abs(compose(s, w)(x) - x), 1e-13);
    }
  }
}

TEST(Gaps, CantorThreeMapTouching) {
  const auto g = gaps(fixtures::cantor());
  ASSERT_EQ(g.size(), 1u);
  EXPECT_NEAR(g[0].c, 1.0 / 3.0, 1e-16);
  EXPECT_NEAR(g[0].d, 2.0 / 3.0, 1e-16);

  const auto h = gaps(IFSystem({Affine{0.25, 0.0}, Affine{0.25, 0.375}, Affine{0.25, 0.75}}, {0.3, 0.3, 0.4}));
  ASSERT_EQ(h.size(), 2u);
  EXPECT_DOUBLE_EQ(h[0].c, 0.25);
  EXPECT_DOUBLE_EQ(h[0].d, 0.375);
  EXPECT_DOUBLE_EQ(h[1].c, 0.625);
  EXPECT_DOUBLE_EQ(h[1].d, 0.75);

  const auto t = gaps(fixtures::touching());
  EXPECT_TRUE(t[0].empty());
  EXPECT_FALSE(t[1].empty());
}

TEST(ImageUnionLength, CantorLevels) {
  const auto s = fixtures::cantor();
  EXPECT_DOUBLE_EQ(image_union_length(s, 0), 1.0);
  EXPECT_NEAR(image_union_length(s, 1), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(image_union_length(s, 3), 8.0 / 27.0, 1e-15);
}

TEST(ImageUnionLength, ShrinksByAlpha) {
  for (const auto& s : fixtures::all()) {
    const double alpha = alpha_sum(s);
    double prev = image_union_length(s, 0);
    const int top = s.size() == 2 ? 12 : 9;
    for (int k = 1; k <= top; ++k) {
      const double cur = image_union_length(s, k);
      EXPECT_LE(cur, alpha * prev * (1.0 + 1e-12));
      EXPECT_LT(cur, prev);
      prev = cur;
    }
  }
}

TEST(Words, DerivativeAndNesting) {
  for (const auto& s : fixtures::all()) {
    const int max_len = s.size() == 2 ? 8 : 5;
    std::vector<Word> frontier{{}};
    for (int len = 1; len <= max_len; ++len) {
      std::vector<Word> next;
      for (const auto& w : frontier)
        for (std::size_t i = 0; i < s.size(); ++i) {
          Word v = w;
          v.push_back(i);
          next.push_back(v);
        }
      frontier = std::move(next);
      for (const auto& w : frontier) {
        const auto phi = compose(s, w);
        const Interval outer = s.image(w.front()), img = phi.image();
        EXPECT_GE(img.lo, outer.lo - 1e-15);
        EXPECT_LE(img.hi, outer.hi + 1e-15);
        for (int k = 0; k <= 32; k += 8) {
          const double d = std::abs(phi.derivative(k / 32.0));
          EXPECT_GT(d, 0.0);
          EXPECT_LT(d, 1.0);
        }
      }
    }
  }
}

TEST(Orientation, BitMatchesEndpointOrder) {
  for (const auto& s : fixtures::all())
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.reverses(i), s.map(i)(0.0) > s.map(i)(1.0));
  EXPECT_TRUE(fixtures::reversing().reverses(0));
}

TEST(LevelCells, CapIsEnforced) {
  EXPECT_THROW(level_cells(fixtures::cantor(), 10, 1000), ResourceError);
  EXPECT_EQ(level_cells(fixtures::cantor(), 10, 1024).size(), 1024u);
}
