#include <gtest/gtest.h>

#include <random>

#include "coarse/quotients.hpp"
#include "support.hpp"

using namespace coarse;
using testing_support::kSeed;
using testing_support::random_element;

namespace {

Element e(std::initializer_list<std::int64_t> c) { return Element{std::vector<std::int64_t>(c)}; }

}  // namespace

TEST(Quotients, QuasiNormality) {
  Group h = Group::parse("UT3");
  NormScheme s = NormScheme::standard(h);
  auto center = quasi_normality_witness(s, ut3_center(), e({3, -2, 5}));
  EXPECT_TRUE(center.found);
  ASSERT_EQ(center.classes.size(), 1u);
  EXPECT_EQ(center.classes[0], e({0, 0, 0}));

  Group z = Group::parse("Z");
  auto abel = quasi_normality_witness(NormScheme::standard(z), chain_base(SubgroupChain(z, {FactorChain::multiples(3)})),
                                      e({5}));
  EXPECT_TRUE(abel.found);
  EXPECT_EQ(abel.classes.size(), 1u);

  // b^-1 a^k b = H(k,k,0), whose <a>-cosets H(0,k,0)<a> are pairwise distinct.
  auto grow = quasi_normality_witness(s, ut3_cyclic_a(), e({0, 0, 1}), 5000);
  EXPECT_FALSE(grow.found);
  ASSERT_GE(grow.trace.size(), 3u);
  EXPECT_LT(grow.trace.front(), grow.trace.back());
}

TEST(Quotients, ChainUltrametric) {
  Group q = Group::parse("Q/Z");
  SubgroupChain ch = SubgroupChain::exhaustion(q);
  EXPECT_EQ(chain_ultrametric(ch, q.parse_element("(1/2)"), q.identity()), 2);
  EXPECT_EQ(chain_ultrametric(ch, q.parse_element("(1/6)"), q.parse_element("(1/2)")), 3);
  EXPECT_EQ(chain_ultrametric(ch, q.parse_element("(5/7)"), q.parse_element("(5/7)")), 0);
}

TEST(Quotients, HausdorffExamples) {
  Group z = Group::parse("Z");
  NormScheme s = NormScheme::standard(z);
  Subgroup H = chain_base(SubgroupChain(z, {FactorChain::multiples(3)}));
  EXPECT_EQ(hausdorff_metric(s, H, e({0}), e({1})).value, 1);
  EXPECT_EQ(hausdorff_metric(s, H, e({0}), e({2})).value, 1);
  EXPECT_EQ(hausdorff_metric(s, H, e({4}), e({4})).value, 0);
  EXPECT_EQ(hausdorff_metric(s, H, e({0}), e({6})).value, 0);

  // UT3 over the center is Z^2 with the l1 norm of (x, z).
  Group h = Group::parse("UT3");
  NormScheme hs = NormScheme::standard(h);
  auto r = hausdorff_metric(hs, ut3_center(), e({0, 0, 0}), e({2, 7, -1}), 5000);
  EXPECT_TRUE(r.finite);
  EXPECT_EQ(r.value, 3);

  // <a> is not quasi-normal: one-sided distances grow without bound.
  auto bad = hausdorff_metric(hs, ut3_cyclic_a(), e({0, 0, 0}), e({0, 0, 1}), 3000);
  EXPECT_FALSE(bad.finite);
}

TEST(Quotients, GInvariance) {
  std::mt19937_64 rng(kSeed);
  // Chain ultra-metric on (Z + Z_2^inf) / (Z + first coordinate).
  Group g = Group::parse("Z + Z_2^inf + Q/Z");
  SubgroupChain ch(g, {FactorChain::whole(), FactorChain::coordinates(1), FactorChain::trivial()});
  CosetSpace chain_space(ch);
  // Hausdorff metric on Z^2 / 3Z x 0.
  Group z2 = Group::parse("Z^2");
  SubgroupChain ch2(z2, {FactorChain::multiples(3), FactorChain::whole()});
  CosetSpace haus(NormScheme::standard(z2), chain_base(ch2), false);
  Group h = Group::parse("UT3");
  CosetSpace center(NormScheme::standard(h), ut3_center(), false, 3000);

  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    Element a = random_element(g, rng), x = random_element(g, rng), y = random_element(g, rng);
    if (chain_space.distance(g.mul(a, x), g.mul(a, y)) != chain_space.distance(x, y)) ++violations;
    Element b = random_element(z2, rng), u = random_element(z2, rng), v = random_element(z2, rng);
    if (haus.distance(z2.mul(b, u), z2.mul(b, v)) != haus.distance(u, v)) ++violations;
  }
  for (int i = 0; i < 300; ++i) {
    Element a = random_element(h, rng, 3), x = random_element(h, rng, 3), y = random_element(h, rng, 3);
    if (center.distance(h.mul(a, x), h.mul(a, y)) != center.distance(x, y)) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Quotients, HausdorffTriangle) {
  Group z2 = Group::parse("Z^2");
  SubgroupChain ch2(z2, {FactorChain::multiples(4), FactorChain::whole()});
  CosetSpace haus(NormScheme::standard(z2), chain_base(ch2), false);
  auto pts = ch2.cosets(1);
  int violations = 0;
  for (const auto& x : pts)
    for (const auto& y : pts) {
      if (haus.distance(x, y) != haus.distance(y, x)) ++violations;
      for (const auto& z : pts)
        if (haus.distance(x, z) > haus.distance(x, y) + haus.distance(y, z)) ++violations;
    }
  EXPECT_EQ(violations, 0);
}

TEST(Quotients, CosetSpaceNear) {
  Group z = Group::parse("Z");
  CosetSpace q(SubgroupChain(z, {FactorChain::multiples(3)}));
  EXPECT_EQ(q.near(q.base(), 0).size(), 1u);
  EXPECT_EQ(q.near(q.base(), 5).size(), 3u);
  auto qs = std::make_shared<CosetSpace>(q);
  PointMap pi = quotient_map(group_space("Z"), qs);
  EXPECT_EQ(pi(e({7})), e({1}));
  EXPECT_EQ(pi(e({0})), e({0}));

  Group qz = Group::parse("Q/Z");
  auto qq = std::make_shared<CosetSpace>(SubgroupChain::exhaustion(qz));
  PointMap id = quotient_map(group_space("Q/Z"), qq);
  Element x = qz.parse_element("(5/12)");
  EXPECT_EQ(id(x), x);
}

TEST(Quotients, SectionOnZOver2Z) {
  Group z = Group::parse("Z");
  SubgroupChain ch(z, {FactorChain::multiples(2)});
  Section s(ch, NormScheme::standard(z), whole_group(), [](std::int64_t, const Element&) -> std::optional<Element> {
    return Element{{1}};
  });
  EXPECT_EQ(s(e({0})), e({0}));
  EXPECT_EQ(s(e({1})), e({1}));
  EXPECT_EQ(s(e({-7})), e({1}));

  // Default alpha: least norm, then coordinate order picks -1 over 1.
  Section d(ch, NormScheme::standard(z), whole_group());
  EXPECT_EQ(d(e({1})), e({-1}));
  auto chk = check_section(d, 8, 6);
  EXPECT_TRUE(chk.section_property);
  EXPECT_TRUE(chk.bound_holds);
}

TEST(Quotients, SectionOnZ2InfOverFirstCoordinate) {
  Group g = Group::parse("Z_2^inf");
  SubgroupChain ch(g, {FactorChain::coordinates(1)});
  Semigroup S{"first coordinate zero", [](const Element& x) { return x.c[0] < 2 || x.c[1] == 0; }};
  Section s(ch, NormScheme::standard(g), S);
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 1000; ++i) {
    Element x = random_element(g, rng);
    auto p = g.parts(x)[0];
    if (!p.empty()) p[0] = 0;
    EXPECT_EQ(s(x), g.make({p}));
  }
  s.check_transversals(8);
  EXPECT_EQ(s.checked_horizon(), 8);
  auto chk = check_section(s, 8, 6);
  EXPECT_EQ(chk.cosets_checked, 256);
  EXPECT_TRUE(chk.section_property);
  EXPECT_TRUE(chk.bound_holds);
  EXPECT_GT(chk.pairs_checked, 0);
}

TEST(Quotients, SectionMissingTransversal) {
  Group g = Group::parse("Z_2^inf");
  SubgroupChain ch = SubgroupChain::exhaustion(g);
  Semigroup S{"trivial", [&](const Element& x) { return g.is_identity(x); }};
  Section s(ch, NormScheme::standard(g, 5000), S, {}, 5000);
  try {
    s.check_transversals(2);
    FAIL();
  } catch (const ConstructionError& ex) {
    EXPECT_NE(std::string(ex.what()).find("level 1"), std::string::npos);
  }
}

TEST(Quotients, SectionMemoIsPure) {
  Group g = Group::parse("Z_3^inf");
  SubgroupChain ch = SubgroupChain::exhaustion(g);
  Section a(ch, NormScheme::standard(g), whole_group());
  Section b(ch, NormScheme::standard(g), whole_group());
  std::mt19937_64 rng(kSeed);
  std::vector<Element> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(random_element(g, rng));
  for (const auto& x : xs) (void)a(x);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) EXPECT_EQ(a(*it), b(*it));
}
