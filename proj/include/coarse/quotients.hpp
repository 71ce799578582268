#pragma once

// Coset spaces G/H: quasi-normality witnesses, the Hausdorff and chain
// ultra-metrics, and sections G/H -> S built by the recursion
//   s_n(xH) = a * s_{n-1}(a^{-1} x H),   a = alpha_n(x G_{n-1}).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coarse/chain.hpp"
#include "coarse/error.hpp"
#include "coarse/groups.hpp"
#include "coarse/metrics.hpp"
#include "coarse/spaces.hpp"

namespace coarse {

/// A subgroup H given by membership and left-coset canonicalization.
struct Subgroup {
  std::string name;
  std::function<bool(const Element&)> contains;
  std::function<Element(const Element&)> canonical;  // representative of xH
};

/// H = G_0 of a chain.
inline Subgroup chain_base(const SubgroupChain& chain) {
  auto ch = std::make_shared<SubgroupChain>(chain);
  return {"G_0", [ch](const Element& x) { return ch->in_level(0, x); },
          [ch](const Element& x) { return ch->coset(x); }};
}

/// The center {H(0,k,0)} of UT3: xH is represented with y = 0.
inline Subgroup ut3_center() {
  return {"center", [](const Element& x) { return x.c[0] == 0 && x.c[2] == 0; },
          [](const Element& x) { return Element{{x.c[0], 0, x.c[2]}}; }};
}

/// <a> = {H(k,0,0)}: H(x,y,z) H(k,0,0) = H(x+k,y,z), represented with x = 0.
inline Subgroup ut3_cyclic_a() {
  return {"<a>", [](const Element& x) { return x.c[1] == 0 && x.c[2] == 0; },
          [](const Element& x) { return Element{{0, x.c[1], x.c[2]}}; }};
}

/// <b> = {H(0,0,k)}: H(x,y,z) H(0,0,k) = H(x,y+xk,z+k), represented with z = 0.
inline Subgroup ut3_cyclic_b() {
  return {"<b>", [](const Element& x) { return x.c[0] == 0 && x.c[1] == 0; },
          [](const Element& x) {
            return Element{{x.c[0], checked::sub(x.c[1], checked::mul(x.c[0], x.c[2])), 0}};
          }};
}

namespace detail {

inline bool ball_within(const NormScheme& s, double r, std::int64_t budget) {
  try {
    return s.ball_size(r) <= budget;
  } catch (const BudgetExceeded&) {
    return false;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct QuasiNormalityReport {
  bool found = false;              // F_x returned
  std::vector<Element> classes;    // coset representatives of x^{-1} h x found so far
  std::int64_t radius = 0;         // last ball radius scanned
  std::vector<std::size_t> trace;  // class count after each radius doubling
  std::string detail;
};

/// Finite F_x with x^{-1} H x inside F_x H, found by scanning H by norm. The
/// class set must stay unchanged across two doublings that added new elements
/// of H; otherwise the scan continues until the ball budget.
inline QuasiNormalityReport quasi_normality_witness(const NormScheme& scheme, const Subgroup& H, const Element& x,
                                                    std::int64_t budget = 20000) {
  const Group& g = scheme.group();
  QuasiNormalityReport rep;
  if (g.is_abelian()) {
    rep.found = true;
    rep.classes = {H.canonical(g.identity())};
    rep.detail = "abelian group: x^-1 h x = h";
    return rep;
  }
  std::set<Element> classes;
  std::size_t last_h = 0;
  int stable = 0;
  Element xi = g.inv(x);
  for (std::int64_t r = 1;; r *= 2) {
    if (!detail::ball_within(scheme, static_cast<double>(r), budget)) {
      rep.detail = "class set still changing at the ball budget";
      break;
    }
    Ball b = scheme.ball(static_cast<double>(r));
    rep.radius = r;
    std::size_t before = classes.size();
    std::size_t hs = 0;
    for (const auto& h : b.elements)
      if (H.contains(h)) {
        ++hs;
        classes.insert(H.canonical(g.mul(g.mul(xi, h), x)));
      }
    rep.trace.push_back(classes.size());
    if (hs > last_h) {
      stable = classes.size() == before ? stable + 1 : 0;
      last_h = hs;
    }
    if (stable >= 2) {
      rep.found = true;
      rep.detail = "class set unchanged over two growing sweeps of H";
      break;
    }
  }
  rep.classes.assign(classes.begin(), classes.end());
  return rep;
}

/// min ||u|| over u in wH.
inline std::int64_t coset_min_norm(const NormScheme& scheme, const Subgroup& H, const Element& w) {
  const Element target = H.canonical(w);
  const std::int64_t bound = scheme.norm(target).raw;
  for (std::int64_t r = 1;; r = std::min(2 * r, bound)) {
    Ball b = scheme.ball(scheme.snowflaked() ? std::sqrt(static_cast<double>(r)) : static_cast<double>(r));
    for (std::size_t i = 0; i < b.size(); ++i)
      if (H.canonical(b.elements[i]) == target) return b.norms[i].raw;
    if (r >= bound) return bound;
  }
}

/// Chain ultra-metric on G/H: min{n : x G_n = y G_n}.
inline std::int64_t chain_ultrametric(const SubgroupChain& chain, const Element& x, const Element& y) {
  return chain.ultra_distance(x, y);
}

struct HausdorffReport {
  double value = 0;
  bool finite = true;
  std::int64_t window = 0;  // radius of the H-window scanned
  std::string detail;
};

/// Hausdorff distance between xH and yH for a left-invariant base norm.
/// By invariance it equals the distance between H and zH, z = x^{-1}y; the
/// one-sided sups are taken over growing windows of H.
inline HausdorffReport hausdorff_metric(const NormScheme& scheme, const Subgroup& H, const Element& x,
                                        const Element& y, std::int64_t budget = 20000) {
  const Group& g = scheme.group();
  const Element z = g.mul(g.inv(x), y);
  const Element zi = g.inv(z);
  auto val = [&](std::int64_t raw) { return NormValue{raw, scheme.snowflaked()}.value(); };
  HausdorffReport rep;
  if (g.is_abelian()) {
    // d(h, zH) = d(1, zH) for every h in H.
    rep.value = val(coset_min_norm(scheme, H, z));
    rep.detail = "abelian: one-sided distances are constant along H";
    return rep;
  }
  std::int64_t sup = 0;
  std::size_t last_h = 0;
  int stable = 0;
  for (std::int64_t r = 1;; r *= 2) {
    if (!detail::ball_within(scheme, static_cast<double>(r), budget)) {
      rep.finite = false;
      rep.detail = "infinite Hausdorff distance: one-sided distances still growing at the budget";
      break;
    }
    Ball b = scheme.ball(static_cast<double>(r));
    rep.window = r;
    std::int64_t before = sup;
    std::size_t hs = 0;
    for (const auto& h : b.elements) {
      if (!H.contains(h)) continue;
      ++hs;
      Element hi = g.inv(h);
      sup = std::max(sup, coset_min_norm(scheme, H, g.mul(hi, z)));   // d(h, zH)
      sup = std::max(sup, coset_min_norm(scheme, H, g.mul(hi, zi)));  // d(zh, H)
    }
    if (hs > last_h) {
      stable = sup == before ? stable + 1 : 0;
      last_h = hs;
    }
    if (stable >= 2) {
      rep.detail = "one-sided sups unchanged over two growing windows of H";
      break;
    }
  }
  rep.value = val(sup);
  return rep;
}

// ---------------------------------------------------------------------------

/// G/H as a metric space. Points are canonical coset representatives.
class CosetSpace : public MetricSpace {
 public:
  enum class Variant { ChainUltra, Hausdorff };

  /// Chain ultra-metric over a chain with H = G_0.
  explicit CosetSpace(SubgroupChain chain)
      : variant_(Variant::ChainUltra),
        group_(chain.group()),
        chain_(std::make_shared<SubgroupChain>(std::move(chain))),
        H_(chain_base(*chain_)) {}

  /// Hausdorff metric over a base norm. H must be quasi-normal; `declared`
  /// records whether that was verified or asserted by the caller.
  CosetSpace(NormScheme base, Subgroup H, bool declared, std::int64_t budget = 20000)
      : variant_(Variant::Hausdorff),
        group_(base.group()),
        base_(std::make_shared<NormScheme>(std::move(base))),
        H_(std::move(H)),
        declared_(declared),
        budget_(budget) {}

  Variant variant() const { return variant_; }
  const Group& group() const { return group_; }
  const Subgroup& subgroup() const { return H_; }
  const SubgroupChain* chain() const { return chain_.get(); }
  bool quasi_normality_declared() const { return declared_; }

  Element canonical(const Element& x) const { return H_.canonical(x); }

  std::string name() const override {
    return group_.to_string() + " / " + H_.name + (variant_ == Variant::ChainUltra ? " [chain]" : " [Hausdorff]");
  }
  Element base() const override { return canonical(group_.identity()); }
  std::string format(const Element& p) const override { return group_.format(p) + "H"; }

  double distance(const Element& x, const Element& y) const override {
    if (variant_ == Variant::ChainUltra) return static_cast<double>(chain_->ultra_distance(x, y));
    HausdorffReport r = hausdorff_metric(*base_, H_, x, y, budget_);
    if (!r.finite) throw Error(r.detail);
    return r.value;
  }

  std::vector<Element> near(const Element& p, double r) const override {
    std::vector<Element> out;
    if (variant_ == Variant::ChainUltra) {
      std::int64_t n = static_cast<std::int64_t>(std::floor(r + 1e-9));
      if (chain_->bounded()) n = std::min(n, chain_->depth());
      auto level = level_cosets(n);
      out.reserve(level->size());
      for (const auto& g : *level) out.push_back(canonical(group_.mul(p, g)));
      return out;
    }
    // Every coset within Hausdorff distance r meets p B_r.
    std::set<Element> seen;
    Ball b = base_->ball(r);
    for (const auto& u : b.elements) {
      Element c = canonical(group_.mul(p, u));
      if (seen.insert(c).second && distance(p, c) <= r + 1e-12) out.push_back(c);
    }
    return out;
  }

  /// Cosets of G_n, memoized (chain variant only).
  std::shared_ptr<const std::vector<Element>> level_cosets(std::int64_t n) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->levels.find(n);
    if (it != cache_->levels.end()) return it->second;
    auto v = std::make_shared<const std::vector<Element>>(chain_->cosets(n));
    cache_->levels.emplace(n, v);
    return v;
  }

 private:
  struct LevelCache {
    std::mutex mu;
    std::map<std::int64_t, std::shared_ptr<const std::vector<Element>>> levels;
  };

  Variant variant_;
  Group group_;
  std::shared_ptr<SubgroupChain> chain_;
  std::shared_ptr<NormScheme> base_;
  Subgroup H_;
  bool declared_ = false;
  std::int64_t budget_ = 20000;
  std::shared_ptr<LevelCache> cache_ = std::make_shared<LevelCache>();
};

/// q: G -> G/H, x -> xH.
inline PointMap quotient_map(const SpacePtr& G, const std::shared_ptr<const CosetSpace>& Q) {
  PointMap q;
  q.name = "quotient";
  q.domain = G;
  q.codomain = Q;
  q.eval = [Q](const Element& x) { return Q->canonical(x); };
  return q;
}

// ---------------------------------------------------------------------------

/// Target set S of a section, given by membership. It must be closed under
/// products for the recursion to land in S.
struct Semigroup {
  std::string name;
  std::function<bool(const Element&)> contains;
};

inline Semigroup whole_group() {
  return {"G", [](const Element&) { return true; }};
}

/// Caller choice of alpha_n(x G_{n-1}); nullopt falls back to the default.
using AlphaChoice = std::function<std::optional<Element>(std::int64_t n, const Element& x)>;

struct AlphaEntry {
  std::int64_t level;
  Element coset_key;  // canonical form of x G_{n-1}
  Element value;
};

/// Section s: G/H -> S built lazily from per-level transversal choices.
/// Default alpha_n(C) is the element of S in C of least norm, ties broken by
/// the ball order (norm, then coordinates).
class Section {
 public:
  Section(SubgroupChain chain, NormScheme scheme, Semigroup S, AlphaChoice custom = {},
          std::int64_t budget = kDefaultBudget)
      : state_(std::make_shared<State>(std::move(chain), std::move(scheme), std::move(S), std::move(custom), budget)) {
    if (!(state_->chain.group() == state_->scheme.group()))
      throw DescriptorMismatch("chain and norm live on different groups");
  }

  const SubgroupChain& chain() const { return state_->chain; }
  const NormScheme& scheme() const { return state_->scheme; }
  const Semigroup& target() const { return state_->S; }

  /// s(xH).
  Element operator()(const Element& x) const {
    const Group& g = state_->chain.group();
    Element prefix = g.identity();
    Element rest = x;
    for (std::int64_t n = state_->chain.level(rest); n > 0; n = state_->chain.level(rest)) {
      Element a = alpha(n, rest);
      prefix = g.mul(prefix, a);
      rest = g.mul(g.inv(a), rest);
    }
    return prefix;
  }

  /// alpha_n(x G_{n-1}) for x in G_n.
  Element alpha(std::int64_t n, const Element& x) const {
    const SubgroupChain& ch = state_->chain;
    const Group& g = ch.group();
    Element key = ch.key(n - 1, x);
    {
      std::lock_guard<std::mutex> lock(state_->mu);
      auto it = state_->alpha.find({n, key});
      if (it != state_->alpha.end()) return it->second;
    }
    Element a;
    if (ch.in_level(n - 1, x)) {
      a = g.identity();
    } else if (auto c = state_->custom ? state_->custom(n, x) : std::nullopt) {
      if (ch.key(n - 1, *c) != key || !state_->S.contains(*c))
        throw ConstructionError("supplied alpha at level " + std::to_string(n) + " is not in S and the coset " +
                                g.format(key));
      a = *c;
    } else {
      a = search(n, key, x);
    }
    std::lock_guard<std::mutex> lock(state_->mu);
    state_->alpha.emplace(std::make_pair(n, key), a);
    return a;
  }

  /// Forces every alpha up to level N, i.e. checks S.H = G level by level.
  /// Throws ConstructionError naming the first level and coset without a
  /// representative in S.
  void check_transversals(std::int64_t N) const {
    const SubgroupChain& ch = state_->chain;
    for (std::int64_t n = 1; n <= N; ++n) {
      if (ch.bounded() && n > ch.depth()) break;
      for (const auto& t : ch.transversal(n)) (void)alpha(n, t);
    }
    std::lock_guard<std::mutex> lock(state_->mu);
    state_->horizon = std::max(state_->horizon, N);
  }

  std::int64_t checked_horizon() const {
    std::lock_guard<std::mutex> lock(state_->mu);
    return state_->horizon;
  }

  std::vector<AlphaEntry> alpha_table() const {
    std::lock_guard<std::mutex> lock(state_->mu);
    std::vector<AlphaEntry> out;
    for (const auto& [k, v] : state_->alpha) out.push_back({k.first, k.second, v});
    return out;
  }

 private:
  struct State {
    State(SubgroupChain c, NormScheme s, Semigroup t, AlphaChoice a, std::int64_t b)
        : chain(std::move(c)), scheme(std::move(s)), S(std::move(t)), custom(std::move(a)), budget(b) {}
    SubgroupChain chain;
    NormScheme scheme;
    Semigroup S;
    AlphaChoice custom;
    std::int64_t budget;
    std::mutex mu;
    std::map<std::pair<std::int64_t, Element>, Element> alpha;
    std::int64_t horizon = 0;
  };

  Element search(std::int64_t n, const Element& key, const Element& x) const {
    const SubgroupChain& ch = state_->chain;
    const NormScheme& s = state_->scheme;
    for (double r = 1;; r *= 2) {
      if (!detail::ball_within(s, r, state_->budget)) break;
      Ball b = s.ball(r);
      for (const auto& u : b.elements)
        if (ch.key(n - 1, u) == key && state_->S.contains(u)) return u;
    }
    throw ConstructionError("no representative in " + state_->S.name + " for level " + std::to_string(n) +
                            " coset " + ch.group().format(ch.key(n - 1, x)) + " within the ball budget");
  }

  std::shared_ptr<State> state_;
};

struct SectionCheck {
  bool section_property = true;  // q(s(c)) = c and s(c) in S
  bool bound_holds = true;       // d(s(x), s(y)) <= diam s(G_ceil(eps)/H)
  std::int64_t cosets_checked = 0;
  std::int64_t pairs_checked = 0;
  std::vector<double> diameters;  // diam s(G_n/H), n = 0..max_eps
  std::optional<std::pair<Element, Element>> witness;
  std::string detail;
};

/// Checks q o s = id on G_level/H and the bornology bound
/// rho(xH, yH) <= eps => d(s(xH), s(yH)) <= diam s(G_ceil(eps)/H)
/// for all pairs in G_level/H and integer eps <= max_eps.
inline SectionCheck check_section(const Section& s, std::int64_t level, std::int64_t max_eps,
                                  std::int64_t budget = kDefaultBudget) {
  const SubgroupChain& ch = s.chain();
  const NormScheme& norm = s.scheme();
  if (ch.bounded()) level = std::min(level, ch.depth());
  SectionCheck out;
  auto cosets = ch.cosets(level, budget);
  std::vector<Element> img;
  img.reserve(cosets.size());
  for (const auto& c : cosets) {
    Element v = s(c);
    if (ch.coset(v) != c || !s.target().contains(v)) {
      out.section_property = false;
      if (!out.witness) out.witness = {c, v};
    }
    img.push_back(std::move(v));
  }
  out.cosets_checked = static_cast<std::int64_t>(cosets.size());

  // Cosets of G_n/H are the first size(n) indices; diameters of their images.
  std::int64_t top = std::min(max_eps, level);
  out.diameters.assign(static_cast<std::size_t>(max_eps + 1), 0);
  for (std::int64_t n = 0; n <= top; ++n) {
    std::size_t m = static_cast<std::size_t>(std::min<std::int64_t>(ch.size(n), static_cast<std::int64_t>(img.size())));
    double d = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) d = std::max(d, norm.distance(img[i], img[j]));
    out.diameters[static_cast<std::size_t>(n)] = d;
  }
  for (std::int64_t n = top + 1; n <= max_eps; ++n) out.diameters[static_cast<std::size_t>(n)] = out.diameters[static_cast<std::size_t>(top)];

  for (std::size_t i = 0; i < cosets.size(); ++i)
    for (std::size_t j = i + 1; j < cosets.size(); ++j) {
      std::int64_t rho = ch.ultra_distance(cosets[i], cosets[j]);
      if (rho > max_eps) continue;
      ++out.pairs_checked;
      // rho is an integer, so the tightest eps is rho itself.
      if (norm.distance(img[i], img[j]) > out.diameters[static_cast<std::size_t>(rho)] + 1e-9) {
        out.bound_holds = false;
        if (!out.witness) out.witness = {cosets[i], cosets[j]};
      }
    }
  out.detail = out.section_property && out.bound_holds ? "ok" : "violation";
  return out;
}

}  // namespace coarse
