#include <gtest/gtest.h>

#include <random>
#include <set>

#include "coarse/chain.hpp"
#include "support.hpp"

using namespace coarse;

TEST(Chain, QmodZLevels) {
  Group q = Group::parse("Q/Z");
  SubgroupChain ch = SubgroupChain::exhaustion(q);
  EXPECT_EQ(ch.size(3), 6);
  EXPECT_EQ(ch.index(4), 4);
  EXPECT_EQ(ch.level(q.parse_element("(1/2)")), 2);
  EXPECT_EQ(ch.ultra_distance(q.parse_element("(1/6)"), q.parse_element("(1/2)")), 3);
  EXPECT_EQ(ch.level(q.parse_element("(1/7)")), 7);
  EXPECT_EQ(ch.depth(), -1);
  auto c3 = ch.cosets(3);
  std::set<Element> s(c3.begin(), c3.end());
  EXPECT_EQ(s.size(), 6u);
  for (const auto& e : c3) EXPECT_EQ(e.c[1] % 6 == 0 || 6 % e.c[1] == 0, true);
}

TEST(Chain, CoordinateChain) {
  Group g = Group::parse("Z_2^inf");
  SubgroupChain ch = SubgroupChain::exhaustion(g);
  EXPECT_EQ(ch.level(g.make({{0, 0, 1}})), 3);
  EXPECT_EQ(ch.size(6), 64);

  SubgroupChain first(g, {FactorChain::coordinates(1)});
  Element x = g.make({{1, 1}});
  EXPECT_EQ(first.coset(x), g.make({{0, 1}}));
  EXPECT_EQ(first.level(g.make({{1}})), 0);
  EXPECT_EQ(first.level(x), 1);
}

TEST(Chain, MultiplesChain) {
  Group z = Group::parse("Z");
  SubgroupChain ch(z, {FactorChain::multiples(3)});
  EXPECT_EQ(ch.coset(Element{{7}}), (Element{{1}}));
  EXPECT_EQ(ch.coset(Element{{-1}}), (Element{{2}}));
  EXPECT_EQ(ch.depth(), 1);
  EXPECT_EQ(ch.transversal(1).size(), 3u);
  EXPECT_THROW(SubgroupChain(z, {FactorChain::trivial()}), ConstructionError);
}

TEST(Chain, EncodeDecodeBlocks) {
  for (const char* d : {"Q/Z", "Z_2^inf", "Z_3^inf + Z_2", "Z_2 + Q/Z"}) {
    Group g = Group::parse(d);
    SubgroupChain ch = SubgroupChain::exhaustion(g);
    const std::int64_t top = 5;
    auto all = ch.cosets(top);
    for (std::size_t i = 0; i < all.size(); ++i) {
      ASSERT_EQ(ch.encode(all[i]), i) << d;
      ASSERT_EQ(ch.coset(all[i]), all[i]);
      for (std::size_t j = 0; j < all.size(); j += 7) {
        std::int64_t lvl = ch.ultra_distance(all[i], all[j]);
        // Same G_n coset iff same block of size size(n).
        for (std::int64_t n = 0; n <= top; ++n) {
          bool same = (i / static_cast<std::size_t>(ch.size(n))) == (j / static_cast<std::size_t>(ch.size(n)));
          ASSERT_EQ(same, lvl <= n) << d << " " << i << " " << j << " " << n;
        }
      }
    }
  }
}

TEST(Chain, KeyIsCanonical) {
  Group g = Group::parse("Z + Z_2^inf + Q/Z");
  SubgroupChain ch(g, {FactorChain::whole(), FactorChain::coordinates(1), FactorChain::trivial()});
  std::mt19937_64 rng(testing_support::kSeed);
  for (int i = 0; i < 10000; ++i) {
    Element x = testing_support::random_element(g, rng);
    Element h = g.make({{static_cast<std::int64_t>(i % 17) - 8}, {i % 2}, {0, 1}});
    for (std::int64_t n = 0; n < 5; ++n) {
      Element k = ch.key(n, x);
      ASSERT_EQ(ch.key(n, k), k);
      ASSERT_EQ(ch.key(n, g.mul(x, h)), k);
      ASSERT_TRUE(ch.in_level(n, g.mul(g.inv(x), k)));
    }
  }
}
