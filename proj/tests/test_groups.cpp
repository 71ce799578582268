#include <gtest/gtest.h>

#include <random>

#include "coarse/groups.hpp"
#include "support.hpp"

using namespace coarse;
using testing_support::kSeed;
using testing_support::random_element;

namespace {

Element ut3(std::int64_t x, std::int64_t y, std::int64_t z) {
  // Packed entries (0,1), (0,2), (1,2): H(x,y,z) has x at (0,1), z at (1,2), y at (0,2).
  return Element{{x, y, z}};
}

}  // namespace

TEST(Groups, ParseDescriptors) {
  EXPECT_EQ(Group::parse("Z^2").factor_count(), 2u);
  EXPECT_EQ(Group::parse("Z^2 + Z_3 + Z_9").to_string(), "Z^2 + Z_3 + Z_9");
  EXPECT_EQ(Group::parse("Z + Z_2^inf").to_string(), "Z + Z_2^inf");
  EXPECT_EQ(Group::parse("Q/Z").to_string(), "Q/Z");
  EXPECT_EQ(Group::parse("UT3").to_string(), "UT3");
  EXPECT_EQ(Group::parse("Z_6^2").to_string(), "Z_6^2");
  EXPECT_TRUE(Group::parse("0").factors().empty());
}

TEST(Groups, ParseErrorsCarryPosition) {
  try {
    Group::parse("Z^2 + W");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 6u);
  }
  EXPECT_THROW(Group::parse("Z_4^inf"), ParseError);
  EXPECT_THROW(Group::parse("UT7"), Error);
  EXPECT_THROW(Group::parse("Z +"), ParseError);
}

TEST(Groups, Examples) {
  Group z2 = Group::parse("Z^2");
  EXPECT_EQ(z2.mul(Element{{1, 2}}, Element{{3, 4}}), (Element{{4, 6}}));
  EXPECT_EQ(z2.inv(Element{{1, -2}}), (Element{{-1, 2}}));

  Group h = Group::parse("UT3");
  EXPECT_EQ(h.mul(ut3(1, 0, 0), ut3(0, 0, 1)), ut3(1, 1, 1));
  EXPECT_EQ(h.inv(ut3(1, 0, 1)), ut3(-1, 1, -1));
  EXPECT_EQ(h.commutator(ut3(1, 0, 0), ut3(0, 0, 1)), ut3(0, 1, 0));
  EXPECT_EQ(h.commutator(h.pow(ut3(1, 0, 0), 2), h.pow(ut3(0, 0, 1), 2)), ut3(0, 4, 0));
  EXPECT_EQ(z2.commutator(Element{{5, -3}}, Element{{2, 7}}), z2.identity());

  Group q = Group::parse("Q/Z");
  EXPECT_EQ(q.mul(q.parse_element("(1/2)"), q.parse_element("(2/3)")), q.parse_element("(1/6)"));
  EXPECT_EQ(q.level(q.parse_element("(1/2)")), 2);
  EXPECT_EQ(q.level(q.identity()), 0);

  Group c3 = Group::parse("Z_3");
  EXPECT_EQ(c3.inv(Element{{2}}), (Element{{1}}));

  Group z2inf = Group::parse("Z_2^inf");
  EXPECT_EQ(z2inf.level(z2inf.make({{0, 0, 1}})), 3);
}

TEST(Groups, UtFormulas) {
  Group h = Group::parse("UT3");
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 1000; ++i) {
    Element a = random_element(h, rng, 50), b = random_element(h, rng, 50);
    auto [x1, y1, z1] = std::tuple(a.c[0], a.c[1], a.c[2]);
    auto [x2, y2, z2] = std::tuple(b.c[0], b.c[1], b.c[2]);
    EXPECT_EQ(h.mul(a, b), ut3(x1 + x2, y1 + y2 + x1 * z2, z1 + z2));
    EXPECT_EQ(h.inv(a), ut3(-x1, x1 * z1 - y1, -z1));
  }
}

TEST(Groups, UtAgreesWithMatrixProduct) {
  std::mt19937_64 rng(kSeed + 1);
  for (std::int64_t n : {3, 4, 5}) {
    Group g({Factor::unitriangular(n)});
    for (int i = 0; i < 1000; ++i) {
      Element a = random_element(g, rng, 30), b = random_element(g, rng, 30);
      auto prod = testing_support::matmul(n, testing_support::ut_matrix(n, a.c), testing_support::ut_matrix(n, b.c));
      EXPECT_EQ(testing_support::ut_matrix(n, g.mul(a, b).c), prod);
      auto id = testing_support::matmul(n, testing_support::ut_matrix(n, a.c), testing_support::ut_matrix(n, g.inv(a).c));
      EXPECT_EQ(testing_support::ut_matrix(n, g.identity().c), id);
    }
  }
}

class GroupAxioms : public ::testing::TestWithParam<const char*> {};

TEST_P(GroupAxioms, TenThousandTriples) {
  Group g = Group::parse(GetParam());
  std::mt19937_64 rng(kSeed);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    Element a = random_element(g, rng), b = random_element(g, rng), c = random_element(g, rng);
    if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c))) ++violations;
    if (g.mul(a, g.identity()) != a || g.mul(g.identity(), a) != a) ++violations;
    if (!g.is_identity(g.mul(a, g.inv(a)))) ++violations;
    if (g.inv(g.mul(a, b)) != g.mul(g.inv(b), g.inv(a))) ++violations;
    if (!g.contains(a) || g.make(g.parts(a)) != a) ++violations;
    if (g.parse_element(g.format(a)) != a) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

INSTANTIATE_TEST_SUITE_P(Families, GroupAxioms,
                         ::testing::Values("Z^2", "Z^2 + Z_3 + Z_9", "Z_2^inf", "Z_3^inf", "Q/Z", "UT3", "UT4",
                                           "UT5", "Z + Z_2^inf", "Z^inf", "Z + Q/Z + Z_6"));

TEST(Groups, Canonicalization) {
  Group g = Group::parse("Z_2^inf + Q/Z + Z_5");
  Element x = g.make({{1, 0, 3, 0, 0}, {4, 6}, {12}});
  EXPECT_EQ(x, g.make(g.parts(x)));
  EXPECT_EQ(g.format(x), "([1,0,1]; 2/3; 2)");
  EXPECT_EQ(g.make({{0, 0}, {0, 5}, {0}}), g.identity());
}

TEST(Groups, StructuralFlags) {
  EXPECT_EQ(Group::parse("Z^2 + Z_6").torsion_free_rank(), 2);
  EXPECT_TRUE(Group::parse("Z^2 + Z_6").finitely_generated());
  EXPECT_FALSE(Group::parse("Z + Z_2^inf").finitely_generated());
  EXPECT_EQ(Group::parse("Z^inf").torsion_free_rank(), std::nullopt);
  EXPECT_TRUE(Group::parse("Q/Z + Z_3^inf").locally_finite());
  EXPECT_EQ(Group::parse("Z_6 + Z_5").order(), 30);
  EXPECT_THROW((void)Group::parse("UT3").torsion_free_rank(), Error);
}

TEST(Groups, DescriptorMismatchAndOverflow) {
  Group z2 = Group::parse("Z^2");
  EXPECT_THROW(z2.mul(Element{{1}}, Element{{1, 2}}), DescriptorMismatch);
  EXPECT_THROW(z2.mul(Element{{INT64_MAX, 0}}, Element{{1, 0}}), ArithmeticOverflow);
}

TEST(Groups, StandardGenerators) {
  EXPECT_EQ(Group::parse("Z^2").standard_generators().size(), 4u);
  EXPECT_EQ(Group::parse("UT3").standard_generators().size(), 4u);
  EXPECT_EQ(Group::parse("Z_2").standard_generators().size(), 1u);
}
