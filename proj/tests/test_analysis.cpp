#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "coarse/analysis.hpp"
#include "support.hpp"

using namespace coarse;

namespace {

Element H(std::int64_t x, std::int64_t y, std::int64_t z) { return Group::parse("UT3").make({{x, y, z}}); }

// <a> = {H(k,0,0)} and <b> = {H(0,0,k)}.
SetSpec a_powers() {
  return {"<a>", [](const Element& x) { return x.c[1] == 0 && x.c[2] == 0; }};
}
SetSpec b_powers() {
  return {"<b>", [](const Element& x) { return x.c[0] == 0 && x.c[1] == 0; }};
}

GrowthProfile exact_profile(const std::vector<std::int64_t>& sizes) {
  GrowthProfile p;
  p.sizes = sizes;
  p.max_n = static_cast<std::int64_t>(sizes.size()) - 1;
  return p;
}

// Oracle: closed form of ||n-ball|| in Z^d with the l1 norm,
// sum_k 2^k C(d,k) C(n,k).
std::int64_t l1_ball(std::int64_t d, std::int64_t n) {
  auto binom = [](std::int64_t a, std::int64_t b) {
    if (b < 0 || b > a) return std::int64_t{0};
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  std::int64_t s = 0;
  for (std::int64_t k = 0; k <= d; ++k) s += (std::int64_t{1} << k) * binom(d, k) * binom(n, k);
  return s;
}

// Oracle: word length in UT3 by enumerating all words of length <= n over
// {a, a^-1, b, b^-1} with explicit 3x3 matrices.
std::set<std::vector<std::int64_t>> ut3_words(int n) {
  using M = std::vector<std::int64_t>;
  std::vector<M> gens;
  for (auto [i, j] : {std::pair{0, 1}, std::pair{1, 2}})
    for (int s : {1, -1}) {
      M g(9, 0);
      g[0] = g[4] = g[8] = 1;
      g[static_cast<std::size_t>(i * 3 + j)] = s;
      gens.push_back(g);
    }
  std::set<M> seen{testing_support::ut_matrix(3, {0, 0, 0})};
  std::set<M> frontier = seen;
  for (int k = 0; k < n; ++k) {
    std::set<M> next;
    for (const auto& w : frontier)
      for (const auto& g : gens) next.insert(testing_support::matmul(3, w, g));
    frontier.clear();
    for (const auto& w : next)
      if (seen.insert(w).second) frontier.insert(w);
  }
  return seen;
}

}  // namespace

TEST(Analysis, OrbitExamples) {
  Group u = Group::parse("UT3");
  NormScheme s = NormScheme::standard(u);
  auto central = conjugacy_orbit(s, H(0, 1, 0), whole_set(), 1000);
  EXPECT_EQ(central.verdict, OrbitVerdict::Stabilized);
  EXPECT_EQ(central.orbit, std::vector<Element>{H(0, 1, 0)});

  auto grow = conjugacy_orbit(s, H(1, 0, 0), b_powers(), 2000);
  EXPECT_EQ(grow.verdict, OrbitVerdict::GrowingAtBudget);
  // b^-k a b^k = H(1,k,0) and b^k has norm |k|, so the orbit is an interval.
  std::int64_t r = grow.radius;
  std::vector<Element> expect;
  for (std::int64_t k = -r; k <= r; ++k) expect.push_back(H(1, k, 0));
  std::sort(expect.begin(), expect.end());
  EXPECT_EQ(grow.orbit, expect);

  Group z = Group::parse("Z^2 + Z_6");
  NormScheme zs = NormScheme::standard(z);
  std::mt19937_64 rng(testing_support::kSeed);
  for (int i = 0; i < 20; ++i) {
    Element x = testing_support::random_element(z, rng, 5);
    auto o = conjugacy_orbit(zs, x, whole_set(), 500);
    EXPECT_EQ(o.verdict, OrbitVerdict::Stabilized);
    EXPECT_EQ(o.orbit, std::vector<Element>{x});
  }
}

TEST(Analysis, OrbitStabilizedIsMonotone) {
  Group u = Group::parse("UT3");
  NormScheme s = NormScheme::standard(u);
  for (const Element& x : {H(0, 1, 0), H(0, -3, 0), H(2, 0, 0), H(0, 0, 1)}) {
    auto a = conjugacy_orbit(s, x, a_powers(), 300);
    if (a.verdict != OrbitVerdict::Stabilized) continue;
    auto b = conjugacy_orbit(s, x, a_powers(), 600);
    EXPECT_EQ(b.verdict, OrbitVerdict::Stabilized);
    EXPECT_EQ(a.orbit, b.orbit);
  }
}

TEST(Analysis, QuasiCentralizer) {
  Group u = Group::parse("UT3");
  NormScheme s = NormScheme::standard(u);
  EXPECT_EQ(quasi_centralizer_test(s, H(0, 5, 0), whole_set(), 200).verdict, QVerdict::InQ);
  auto q = quasi_centralizer_test(s, H(1, 0, 0), whole_set(), 500);
  EXPECT_EQ(q.verdict, QVerdict::EvidenceAgainst);
  ASSERT_EQ(q.counts.size(), 6u);
  for (std::size_t i = 1; i < q.counts.size(); ++i) EXPECT_GT(q.counts[i], q.counts[i - 1]);

  Group fin = Group::parse("Z_4 + Z_6");
  NormScheme fs = NormScheme::standard(fin);
  for (const auto& x : fs.ball(5).elements)
    EXPECT_EQ(quasi_centralizer_test(fs, x, whole_set(), 10).verdict, QVerdict::InQ);
}

TEST(Analysis, FcTest) {
  for (const char* d : {"Z", "Z^3", "Z + Z_4", "Z_2^inf", "Q/Z", "Z_5", "0"}) {
    auto r = fc_test(Group::parse(d), 200);
    EXPECT_TRUE(r.fc) << d;
    EXPECT_EQ(r.counterexamples, 0) << d;
    EXPECT_EQ(r.verdict, "FC at scale") << d;
  }
  auto ut = fc_test(Group::parse("UT3"), 500);
  EXPECT_FALSE(ut.fc);
  EXPECT_EQ(ut.verdict, "not FC");
  ASSERT_TRUE(ut.witness.has_value());
  EXPECT_EQ(*ut.witness, H(1, 0, 0));
}

TEST(Analysis, GrowthFitExactSequences) {
  for (std::int64_t d = 1; d <= 3; ++d) {
    std::vector<std::int64_t> sizes;
    for (std::int64_t n = 0; n <= 80; ++n) sizes.push_back(l1_ball(d, n));
    auto f = growth_fit(exact_profile(sizes), 0.75);  // tail starts at n = 20
    EXPECT_EQ(f.from, 20);
    EXPECT_NEAR(f.exponent, static_cast<double>(d), 0.05) << d;
    for (std::int64_t n = f.from; n <= f.to; ++n)
      EXPECT_LE(static_cast<double>(sizes[static_cast<std::size_t>(n)]), f.C * std::pow(n, f.exponent) * (1 + 1e-9));
  }
  // Random polynomials whose lower coefficients do not exceed the leading one.
  std::mt19937_64 rng(testing_support::kSeed);
  for (int trial = 0; trial < 50; ++trial) {
    std::int64_t d = 1 + trial % 5;
    std::vector<std::int64_t> coef(static_cast<std::size_t>(d + 1));
    coef[static_cast<std::size_t>(d)] = std::uniform_int_distribution<std::int64_t>(1, 9)(rng);
    for (std::int64_t k = 0; k < d; ++k)
      coef[static_cast<std::size_t>(k)] =
          std::uniform_int_distribution<std::int64_t>(0, coef[static_cast<std::size_t>(d)])(rng);
    std::vector<std::int64_t> sizes;
    for (std::int64_t n = 0; n <= 80; ++n) {
      std::int64_t v = 0;
      for (std::int64_t k = d; k >= 0; --k) v = v * n + coef[static_cast<std::size_t>(k)];
      sizes.push_back(std::max<std::int64_t>(v, 1));
    }
    EXPECT_NEAR(growth_fit(exact_profile(sizes), 0.75).exponent, static_cast<double>(d), 0.05) << trial;
  }
  std::vector<std::int64_t> pure;
  for (std::int64_t n = 0; n <= 40; ++n) pure.push_back(3 * n * n * n + (n == 0));
  auto p = growth_fit(exact_profile(pure));
  EXPECT_NEAR(p.exponent, 3, 1e-9);
  EXPECT_NEAR(p.C, 3, 1e-6);
  EXPECT_LT(p.residual, 1e-9);

  EXPECT_EQ(growth_fit(exact_profile(std::vector<std::int64_t>(10, 6))).exponent, 0);
  EXPECT_THROW(growth_fit(exact_profile({1, 3, 5})), Error);
}

TEST(Analysis, GrowthFitGroups) {
  auto z = growth_sequence(NormScheme::standard(Group::parse("Z")), 40);
  auto f1 = growth_fit(z);
  EXPECT_EQ(f1.from, 20);
  EXPECT_NEAR(f1.exponent, 1.0, 0.05);
  for (std::int64_t n = 0; n <= 40; ++n) EXPECT_EQ(z.sizes[static_cast<std::size_t>(n)], 2 * n + 1);

  auto z2 = growth_sequence(NormScheme::standard(Group::parse("Z^2")), 40);
  EXPECT_NEAR(growth_fit(z2).exponent, 2.0, 0.1);
  for (std::int64_t n = 0; n <= 40; ++n) EXPECT_EQ(z2.sizes[static_cast<std::size_t>(n)], 2 * n * n + 2 * n + 1);

  auto ut = growth_sequence(NormScheme::standard(Group::parse("UT3")), 12);
  for (int n = 0; n <= 5; ++n)
    EXPECT_EQ(ut.sizes[static_cast<std::size_t>(n)], static_cast<std::int64_t>(ut3_words(n).size())) << n;
  EXPECT_EQ(ut.sizes[2], 17);
}

TEST(Analysis, DistortionIsometric) {
  Group z2 = Group::parse("Z^2");
  NormScheme s = NormScheme::standard(z2);
  auto p = distortion_profile({z2.make({{1}, {0}})}, s, 30);
  ASSERT_EQ(p.table.size(), 30u);
  for (const auto& r : p.table) {
    EXPECT_EQ(r.min, static_cast<double>(r.n));
    EXPECT_EQ(r.max, static_cast<double>(r.n));
    EXPECT_EQ(r.count, 2);
  }
  EXPECT_NEAR(p.fit.exponent, 1.0, 0.02);

  Group z3 = Group::parse("Z^3");
  auto diag = distortion_profile({z3.make({{1}, {0}, {0}}), z3.make({{0}, {1}, {0}})}, NormScheme::standard(z3), 12);
  EXPECT_NEAR(diag.fit.exponent, 1.0, 0.02);

  Group u = Group::parse("UT3");
  NormScheme us = NormScheme::standard(u);
  auto whole = distortion_profile(u.standard_generators(), us, 6);
  for (const auto& r : whole.table) EXPECT_EQ(r.max, static_cast<double>(r.n));
  EXPECT_NEAR(whole.fit.exponent, 1.0, 0.02);
}

TEST(Analysis, HeisenbergCenter) {
  Group u = Group::parse("UT3");
  NormScheme s = NormScheme::word(u, u.standard_generators(), 2'000'000);
  auto p = distortion_profile({H(0, 1, 0)}, s, 60);
  for (std::size_t i = 1; i < p.table.size(); ++i) EXPECT_GE(p.table[i].max, p.table[i - 1].max);
  EXPECT_NEAR(p.fit.exponent, 0.5, 0.1);
  for (std::int64_t m = 1; m <= 7; ++m) {
    auto w = heisenberg_commutator(u, m);
    EXPECT_EQ(w.product, H(0, m * m, 0));
    EXPECT_EQ(w.length, 4 * m);
    EXPECT_LE(s.norm(w.product).value(), static_cast<double>(4 * m));
  }
  // BFS norms agree with explicit word enumeration on the center.
  auto words = ut3_words(8);
  for (std::int64_t n = 1; n <= 16; ++n) {
    auto target = testing_support::ut_matrix(3, {0, n, 0});
    bool in = words.count(target) > 0;
    EXPECT_EQ(in, s.norm(H(0, n, 0)).raw <= 8) << n;
  }
}

TEST(Analysis, UndistortedChains) {
  Group z3 = Group::parse("Z^3");
  Element e1 = z3.make({{1}, {0}, {0}}), e2 = z3.make({{0}, {1}, {0}}), e3 = z3.make({{0}, {0}, {1}});
  auto v = undistorted_chain_check(z3, {{e1}, {e1, e2}, {e1, e2, e3}}, 6);
  ASSERT_EQ(v.size(), 2u);
  for (const auto& i : v) {
    EXPECT_TRUE(i.undistorted);
    EXPECT_EQ(i.fit.L, 1);
    EXPECT_EQ(i.fit.C, 0);
  }
  EXPECT_TRUE(undistorted_chain_check(z3, {{e1}}, 6).empty());

  // The generator c has ambient norm 4, which pins L at 4 on these windows;
  // the distortion shows in the lower ratio, which grows like sqrt(R).
  Group u = Group::parse("UT3");
  std::vector<double> lower;
  for (double R : {25.0, 50.0}) {
    auto c = undistorted_chain_check(u, {{H(0, 1, 0)}, u.standard_generators()}, R, 3'000'000);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_FALSE(c[0].undistorted);
    EXPECT_TRUE(c[0].fit.degrading);
    EXPECT_GT(c[0].fit.lower_ratio, c[0].fit.lower_ratio_half);
    lower.push_back(c[0].fit.lower_ratio);
  }
  EXPECT_NEAR(lower[1] / lower[0], std::sqrt(2.0), 0.15);
}
