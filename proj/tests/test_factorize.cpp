#include <gtest/gtest.h>

#include <random>
#include <set>

#include "coarse/factorize.hpp"
#include "support.hpp"

using namespace coarse;
using testing_support::kSeed;

namespace {

Element e(std::initializer_list<std::int64_t> c) { return Element{std::vector<std::int64_t>(c)}; }

std::shared_ptr<const CosetSpace> chain_space(const std::string& d) {
  return std::make_shared<const CosetSpace>(SubgroupChain::exhaustion(Group::parse(d)));
}

}  // namespace

TEST(Factorize, ZTimesZnExamples) {
  auto w = z_times_zn_witness(3);
  EXPECT_EQ(w.certificate.f(e({0, 0})), e({0}));
  EXPECT_EQ(w.certificate.f(e({2, 1})), e({7}));
  EXPECT_EQ(w.certificate.g(e({-5})), e({-2, 1}));
  EXPECT_THROW(z_times_zn_witness(1), Error);
}

TEST(Factorize, ZTimesZnVerified) {
  for (std::int64_t n : {2, 3, 7}) {
    auto w = z_times_zn_witness(n, 10'000);
    auto rep = verify_recipe(w);
    EXPECT_TRUE(rep.pass) << n << " " << rep.reason;
    EXPECT_LE(rep.f_modulus.omega[0], 2 * n - 1);
    EXPECT_EQ(rep.f_round_trip, 0);
    EXPECT_EQ(rep.g_round_trip, 0);
    EXPECT_EQ(embedding_multiplicity(w.certificate.f, 50), 1);
  }
}

// witness(n) then witness(m) on the Z factor equals witness(nm) after
// relabeling (r1, r2) -> m r1 + r2.
TEST(Factorize, ZTimesZnComposition) {
  for (auto [n, m] : {std::pair<std::int64_t, std::int64_t>{2, 3}, {3, 2}, {4, 5}}) {
    auto wn = z_times_zn_witness(n), wm = z_times_zn_witness(m), wnm = z_times_zn_witness(n * m);
    for (std::int64_t k = -20; k <= 20; ++k)
      for (std::int64_t r1 = 0; r1 < n; ++r1)
        for (std::int64_t r2 = 0; r2 < m; ++r2) {
          Element u = wn.certificate.f(e({k, r1}));
          Element two = wm.certificate.f(e({u.c[0], r2}));
          EXPECT_EQ(two, wnm.certificate.f(e({k, m * r1 + r2})));
        }
  }
}

TEST(Factorize, T4Abelian) {
  Group g = Group::parse("Z + Z_3");
  NormScheme s = NormScheme::standard(g);
  SubgroupChain ch(g, {FactorChain::whole(), FactorChain::trivial()});
  Subgroup H = chain_base(ch);
  auto Q = std::make_shared<CosetSpace>(ch);
  SectionFn sec{"c -> c", [](const Element& c) { return c; }};
  auto w = t4_witness(s, H, Q, sec);
  EXPECT_EQ(w.certificate.f(ProductSpace::pair(e({5, 0}), e({0, 2}))), e({5, 2}));
  auto rep = verify_recipe(w);
  EXPECT_TRUE(rep.pass) << rep.reason;
  EXPECT_EQ(rep.f_round_trip, 0);

  // H = G: a single coset, f is the identity on it.
  SubgroupChain whole(g, {FactorChain::whole(), FactorChain::whole()});
  auto one = t4_witness(s, chain_base(whole), std::make_shared<CosetSpace>(whole), sec);
  EXPECT_EQ(one.certificate.f(ProductSpace::pair(e({-4, 1}), e({0, 0}))), e({-4, 1}));
  EXPECT_TRUE(verify_recipe(one).pass);
}

TEST(Factorize, T4RejectsNonSection) {
  Group g = Group::parse("Z + Z_3");
  NormScheme s = NormScheme::standard(g);
  SubgroupChain ch(g, {FactorChain::whole(), FactorChain::trivial()});
  SectionFn bad{"shift", [](const Element& c) { return Element{{c.c[0], (c.c[1] + 1) % 3}}; }};
  try {
    t4_witness(s, chain_base(ch), std::make_shared<CosetSpace>(ch), bad);
    FAIL();
  } catch (const ConstructionError& ex) {
    EXPECT_NE(std::string(ex.what()).find("not a section"), std::string::npos);
  }
}

// s(x, z) = H(x, 0, z) is accepted pointwise (the center is central) but the
// pair s(x, z+1), s(x, z) differs by H(0, -x, 1), whose norm grows with x.
TEST(Factorize, T4HeisenbergCenterFails) {
  NormScheme s = NormScheme::standard(Group::parse("UT3"), 2'000'000);
  auto Q = ut3_center_quotient(2'000'000);
  SectionFn sec{"H(x,0,z)", [](const Element& c) { return Element{{c.c[0], 0, c.c[2]}}; }};
  FactorizationOptions opt;
  opt.R_x = opt.R_y = 12;
  opt.deltas = {1};
  auto w = t4_witness(s, ut3_center(), Q, sec, opt);
  Group g = s.group();
  Element diff = g.mul(g.inv(sec.eval(e({5, 0, 1}))), sec.eval(e({5, 0, 2})));
  EXPECT_EQ(diff, g.mul(e({0, 0, 1}), e({0, -5, 0})));
  auto rep = verify_recipe(w);
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.f_bounded[0]);
  EXPECT_TRUE(rep.f_modulus.witness[0].has_value());
}

TEST(Factorize, T5ZOver2Z) {
  Group g = Group::parse("Z");
  NormScheme s = NormScheme::standard(g);
  SubgroupChain ch(g, {FactorChain::multiples(2)});
  Subgroup H = chain_base(ch);
  auto Q = std::make_shared<CosetSpace>(s, H, true);
  SetSpec A{"{-1,0,1}", [](const Element& x) { return x.c[0] >= -1 && x.c[0] <= 1; }};
  SectionFn sec{"canonical", [H](const Element& c) { return H.canonical(c); }};
  auto w = t5_witness(s, H, Q, sec, A);
  auto rep = verify_recipe(w);
  EXPECT_TRUE(rep.pass) << rep.reason;
  for (std::int64_t z = -10; z <= 10; ++z) EXPECT_EQ(w.certificate.f(w.certificate.g(e({z}))), e({z}));

  SetSpec lopsided{"{0,1}", [](const Element& x) { return x.c[0] == 0 || x.c[0] == 1; }};
  EXPECT_THROW(t5_witness(s, H, Q, sec, lopsided), ConstructionError);
}

TEST(Factorize, T5FiniteGroup) {
  Group g = Group::parse("Z_2 + Z_3");
  NormScheme s = NormScheme::standard(g);
  SubgroupChain ch(g, {FactorChain::trivial(), FactorChain::whole()});
  Subgroup H = chain_base(ch);
  auto Q = std::make_shared<CosetSpace>(s, H, true);
  SectionFn sec{"canonical", [H](const Element& c) { return H.canonical(c); }};
  auto w = t5_witness(s, H, Q, sec, whole_set());
  EXPECT_TRUE(verify_recipe(w).pass);
}

TEST(Factorize, T5WithTorsionQuotient) {
  Group g = Group::parse("Z + Z_2^inf");
  NormScheme s = NormScheme::standard(g);
  SubgroupChain ch(g, {FactorChain::whole(), FactorChain::trivial()});
  Subgroup H = chain_base(ch);
  auto Q = std::make_shared<CosetSpace>(ch);
  SetSpec A{"0 + Z_2^inf", [](const Element& x) { return x.c[0] == 0; }};
  SectionFn sec{"torsion part", [](const Element& c) { return c; }};
  FactorizationOptions opt;
  opt.R_x = opt.R_y = 8;
  auto w = t5_witness(s, H, Q, sec, A, std::nullopt, opt);
  auto rep = verify_recipe(w);
  EXPECT_TRUE(rep.pass) << rep.reason;
}

TEST(Factorize, InterleaveIdentity) {
  SpacePtr z = group_space("Z");
  SpacePtr z2 = group_space("Z_2^inf");
  auto w = interleave_witness({identity_witness(z), identity_witness(z2)});
  std::mt19937_64 rng(kSeed);
  Group g = Group::parse("Z + Z_2^inf");
  for (int i = 0; i < 200; ++i) {
    Element x = testing_support::random_element(g, rng);
    EXPECT_EQ(w.certificate.f(x), x);
  }
  EXPECT_TRUE(verify_recipe(w).pass);

  auto empty = interleave_witness({});
  EXPECT_EQ(empty.name, "singleton");
  Group zero = Group(std::vector<Factor>{});
  EXPECT_EQ(empty.certificate.f(zero.identity()), zero.identity());
}

TEST(Factorize, InterleaveZTimesZp) {
  auto w = interleave_witness({z_times_zn_witness(2), z_times_zn_witness(3), z_times_zn_witness(5)});
  Group dom = Group::parse("Z + Z_2 + Z + Z_3 + Z + Z_5");
  EXPECT_EQ(w.certificate.f(dom.make({{1}, {1}, {-1}, {2}, {0}, {4}})), e({3, -1, 4}));
  auto rep = verify_recipe(w);
  EXPECT_TRUE(rep.pass) << rep.reason;
  EXPECT_EQ(rep.f_round_trip, 0);
}

TEST(Factorize, InterleaveRejectsMovedIdentity) {
  SpacePtr z = group_space("Z");
  WitnessRecipe shift = identity_witness(z);
  shift.certificate.f.eval = [](const Element& x) { return Element{{x.c[0] + 1}}; };
  shift.certificate.g.eval = [](const Element& x) { return Element{{x.c[0] - 1}}; };
  try {
    interleave_witness({identity_witness(z), shift});
    FAIL();
  } catch (const ConstructionError& ex) {
    EXPECT_NE(std::string(ex.what()).find("identity"), std::string::npos);
  }
}

TEST(Factorize, ChainMatchSameSizes) {
  auto z2 = chain_space("Z_2^inf");
  auto w = chain_match_witness(z2, z2);
  EXPECT_TRUE(w.bijective);
  EXPECT_EQ(w.certificate.K, 0);
  auto rep = verify_recipe(w);
  EXPECT_TRUE(rep.pass) << rep.reason;
  EXPECT_EQ(rep.f_modulus.omega, w.deltas);
}

TEST(Factorize, ChainMatchZ2InfQmodZ) {
  auto w = chain_match_witness(chain_space("Z_2^inf"), chain_space("Q/Z"));
  EXPECT_FALSE(w.bijective);
  EXPECT_EQ(w.R_x, 12);
  EXPECT_EQ(w.R_y, 7);
  // Merged levels alternate sides, each at least four times the last.
  ASSERT_GE(w.table.size(), 5u);
  EXPECT_EQ(w.table[0], (std::vector<std::int64_t>{0, 0, 0, 1, 1}));
  EXPECT_EQ(w.table[1], (std::vector<std::int64_t>{1, 1, 3, 6, 6}));
  EXPECT_EQ(w.table[2], (std::vector<std::int64_t>{2, 0, 5, 32, 5}));
  EXPECT_EQ(w.table[3], (std::vector<std::int64_t>{3, 1, 6, 720, 23}));
  EXPECT_EQ(w.table[4], (std::vector<std::int64_t>{4, 0, 12, 4096, 6}));
  EXPECT_EQ(w.certificate.K, 5);
  auto rep = verify_recipe(w);
  EXPECT_TRUE(rep.pass) << rep.reason;
  for (std::size_t k = 0; k < w.deltas.size(); ++k) {
    EXPECT_TRUE(std::isfinite(rep.f_modulus.omega[k]));
    EXPECT_LE(rep.f_modulus.omega[k], w.certificate.f_bound(w.deltas[k]));
    EXPECT_LE(rep.g_modulus.omega[k], w.certificate.g_bound(w.deltas[k]));
  }
}

// Each map is K-dense: every point shares a level-K block with an image point.
TEST(Factorize, ChainMatchCoarselyOnto) {
  auto X = chain_space("Z_2^inf"), Y = chain_space("Q/Z");
  auto w = chain_match_witness(X, Y);
  const auto& cx = *X->chain();
  const auto& cy = *Y->chain();
  const auto K = static_cast<std::int64_t>(w.certificate.K);
  auto bx = static_cast<std::uint64_t>(cx.size(K)), by = static_cast<std::uint64_t>(cy.size(K));
  std::set<std::uint64_t> hit_y, hit_x;
  for (std::uint64_t i = 0; i < 4096; ++i) hit_y.insert(cy.encode(w.certificate.f(cx.decode(i))) / by);
  for (std::uint64_t j = 0; j < 720; ++j) EXPECT_TRUE(hit_y.count(j / by)) << j;
  for (std::uint64_t j = 0; j < 5040; ++j) hit_x.insert(cx.encode(w.certificate.g(cy.decode(j))) / bx);
  for (std::uint64_t i = 0; i < 4096; ++i) EXPECT_TRUE(hit_x.count(i / bx)) << i;
}

TEST(Factorize, ChainMatchNotMatchable) {
  try {
    chain_match_witness(chain_space("Z_2^inf"), chain_space("Z_6"));
    FAIL();
  } catch (const ConstructionError& ex) {
    EXPECT_NE(std::string(ex.what()).find("not matchable"), std::string::npos);
  }
  auto finite = chain_match_witness(chain_space("Z_6"), chain_space("Z_2 + Z_3"));
  EXPECT_TRUE(verify_recipe(finite).pass);
}

TEST(Factorize, ClassificationTargets) {
  EXPECT_EQ(classification_witness("Z^2 + Z_6").target, "Z^2");
  EXPECT_EQ(classification_witness("Z^2 + Z_6").stages.at(0).tag, Construction::Projection);
  EXPECT_EQ(classification_witness("Z + Z_2^inf").target, "Z + Q/Z");
  EXPECT_EQ(classification_witness("Z_2^inf").target, "Q/Z");
  EXPECT_EQ(classification_witness("Q/Z").target, "Q/Z");
  EXPECT_EQ(classification_witness("Z_6").target, "0");
  EXPECT_EQ(classification_witness("Z^inf + Z_3").target, "Z^inf");
  EXPECT_EQ(classification_witness("Z_2^inf").stages.back().tag, Construction::ChainMatch);
  auto c = classification_witness("Z + Z_2^inf");
  ASSERT_TRUE(c.r0.has_value());
  EXPECT_EQ(*c.r0, 1);
  EXPECT_FALSE(c.finitely_generated);
  EXPECT_THROW(classification_witness("UT3"), DescriptorMismatch);
}

// Equal rank and equal finite generation give equal targets.
TEST(Factorize, ClassificationInvariance) {
  std::vector<std::vector<std::string>> classes{
      {"Z^2", "Z^2 + Z_6", "Z + Z_5 + Z"},
      {"Z_2^inf", "Q/Z", "Z_3^inf + Z_4", "Z_2^inf + Q/Z"},
      {"Z + Z_2^inf", "Z + Q/Z", "Z_5^inf + Z"},
      {"Z^inf", "Z^inf + Z_2^inf", "Z + Z^inf"},
  };
  std::set<std::string> seen;
  for (const auto& cls : classes) {
    std::string t = classification_witness(cls[0]).target;
    for (const auto& d : cls) {
      auto c = classification_witness(d);
      EXPECT_EQ(c.target, t) << d;
      EXPECT_EQ(c.r0, classification_witness(cls[0]).r0) << d;
    }
    EXPECT_TRUE(seen.insert(t).second) << t;
  }
}

TEST(Factorize, ClassificationStagesVerify) {
  for (const char* d : {"Z^2 + Z_6", "Z + Z_2^inf", "Z^inf + Z_3", "Z_3^inf + Z_4"}) {
    auto c = classification_witness(d);
    for (const auto& st : c.stages) {
      auto rep = verify_recipe(st);
      EXPECT_TRUE(rep.pass) << d << ": " << st.name << ": " << rep.reason;
    }
  }
}

TEST(Factorize, PairingRoundTrip) {
  auto c = classification_witness("Z + Z^inf + Z_2^inf + Z_3");
  const auto& w = c.stages.at(0);
  Group g = Group::parse("Z + Z^inf + Z_2^inf + Z_3");
  std::mt19937_64 rng(kSeed);
  for (int i = 0; i < 500; ++i) {
    Element x = testing_support::random_element(g, rng);
    EXPECT_EQ(w.certificate.g(w.certificate.f(x)), x) << g.format(x);
  }
  Group zi = Group::parse("Z^inf");
  for (int i = 0; i < 500; ++i) {
    Element y = testing_support::random_element(zi, rng);
    EXPECT_EQ(w.certificate.f(w.certificate.g(y)), y) << zi.format(y);
  }
}
