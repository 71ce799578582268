#pragma once

// Proper left-invariant norms on the groups of groups.hpp and the ball
// enumeration engine behind every verifier.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coarse/chain.hpp"
#include "coarse/error.hpp"
#include "coarse/groups.hpp"

namespace coarse {

inline constexpr std::int64_t kDefaultBudget = 1'000'000;

/// Exact norm value: an integer, optionally under a square root (snowflake).
struct NormValue {
  std::int64_t raw = 0;
  bool sqrt = false;

  double value() const { return sqrt ? std::sqrt(static_cast<double>(raw)) : static_cast<double>(raw); }
  bool operator==(const NormValue&) const = default;
  auto operator<=>(const NormValue& o) const { return raw <=> o.raw; }
};

/// Closed ball around the identity, sorted by (norm, canonical coordinates).
struct Ball {
  double radius = 0;
  std::vector<Element> elements;
  std::vector<NormValue> norms;
  bool exact = true;

  std::size_t size() const { return elements.size(); }
};

struct WeightedGenerator {
  Element element;
  std::int64_t weight;
};

/// i-th generator of an enumerated generating sequence, nullopt past the end.
/// Weights must be nondecreasing.
using GeneratorSequence = std::function<std::optional<WeightedGenerator>(std::size_t)>;

namespace detail {

// Breadth-first layers of a Cayley graph, extended on demand.
class BfsCache {
 public:
  BfsCache(Group g, std::vector<Element> gens) : group_(std::move(g)), gens_(std::move(gens)) {
    Element e = group_.identity();
    dist_.emplace(e, 0);
    layers_.push_back({e});
    total_ = 1;
  }

  // Distance of x, extending layers while the ball stays within budget.
  std::int64_t distance(const Element& x, std::int64_t budget) {
    std::lock_guard<std::mutex> lock(mu_);
    for (;;) {
      auto it = dist_.find(x);
      if (it != dist_.end()) return it->second;
      if (layers_.back().empty())
        throw Error("element not reachable from the generating set");
      extend_locked(budget);
    }
  }

  // Layers 0..r (copied out so callers need no lock).
  std::vector<std::vector<Element>> layers(std::int64_t r, std::int64_t budget) {
    std::lock_guard<std::mutex> lock(mu_);
    while (static_cast<std::int64_t>(layers_.size()) <= r && !layers_.back().empty()) extend_locked(budget);
    std::vector<std::vector<Element>> out;
    for (std::int64_t k = 0; k <= r && k < static_cast<std::int64_t>(layers_.size()); ++k)
      out.push_back(layers_[static_cast<std::size_t>(k)]);
    return out;
  }

  std::int64_t ball_size(std::int64_t r, std::int64_t budget) {
    std::lock_guard<std::mutex> lock(mu_);
    while (static_cast<std::int64_t>(layers_.size()) <= r && !layers_.back().empty()) extend_locked(budget);
    std::int64_t s = 0;
    for (std::int64_t k = 0; k <= r && k < static_cast<std::int64_t>(layers_.size()); ++k)
      s += static_cast<std::int64_t>(layers_[static_cast<std::size_t>(k)].size());
    return s;
  }

 private:
  void extend_locked(std::int64_t budget) {
    const std::int64_t r = static_cast<std::int64_t>(layers_.size());
    std::vector<Element> next;
    for (const auto& x : layers_.back())
      for (const auto& s : gens_) {
        Element y = group_.mul(x, s);
        if (dist_.emplace(y, r).second) next.push_back(std::move(y));
      }
    total_ += static_cast<std::int64_t>(next.size());
    if (total_ > budget) {
      // Roll back so the cache stays a union of complete layers.
      for (const auto& y : next) dist_.erase(y);
      total_ -= static_cast<std::int64_t>(next.size());
      throw BudgetExceeded("breadth-first search of radius " + std::to_string(r), budget,
                           static_cast<double>(r));
    }
    std::sort(next.begin(), next.end());
    layers_.push_back(std::move(next));
  }

  Group group_;
  std::vector<Element> gens_;
  std::mutex mu_;
  std::unordered_map<Element, std::int64_t, ElementHash> dist_;
  std::vector<std::vector<Element>> layers_;
  std::int64_t total_ = 0;
};

// Uniform-cost search over a weighted generating sequence.
class DijkstraCache {
 public:
  DijkstraCache(Group g, GeneratorSequence seq) : group_(std::move(g)), seq_(std::move(seq)) {}

  // Exact ball of integer radius r as element -> norm.
  std::unordered_map<Element, std::int64_t, ElementHash> ball(std::int64_t r, std::int64_t budget) {
    std::lock_guard<std::mutex> lock(mu_);
    if (r <= cached_radius_) {
      std::unordered_map<Element, std::int64_t, ElementHash> out;
      for (const auto& [e, d] : cached_)
        if (d <= r) out.emplace(e, d);
      return out;
    }
    std::vector<WeightedGenerator> gens;
    for (std::size_t i = 0;; ++i) {
      auto g = seq_(i);
      if (!g || g->weight > r) break;
      if (g->weight <= 0) throw Error("generator weights must be positive");
      gens.push_back(*g);
      gens.push_back({group_.inv(g->element), g->weight});
    }
    std::unordered_map<Element, std::int64_t, ElementHash> dist;
    using Item = std::pair<std::int64_t, Element>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0, group_.identity());
    dist.emplace(group_.identity(), 0);
    std::int64_t settled = 0;
    while (!pq.empty()) {
      auto [d, x] = pq.top();
      pq.pop();
      if (dist[x] < d) continue;
      if (++settled > budget)
        throw BudgetExceeded("uniform-cost search of radius " + std::to_string(r), budget, static_cast<double>(d));
      for (const auto& g : gens) {
        std::int64_t nd = d + g.weight;
        if (nd > r) continue;
        Element y = group_.mul(x, g.element);
        auto it = dist.find(y);
        if (it == dist.end() || nd < it->second) {
          dist[y] = nd;
          pq.emplace(nd, std::move(y));
        }
      }
    }
    cached_ = dist;
    cached_radius_ = r;
    return dist;
  }

 private:
  Group group_;
  GeneratorSequence seq_;
  std::mutex mu_;
  std::unordered_map<Element, std::int64_t, ElementHash> cached_;
  std::int64_t cached_radius_ = -1;
};

}  // namespace detail

/// A proper left-invariant norm on a group.
///
///  - standard: sum over factors of |k| on Z, cyclic distance on Z/n, the
///    weighted norm sum (i+1)*|c_i| on countable sums (weights 1,2,3,...),
///    the chain level on Q/Z, and the word norm in elementary matrices on UT.
///    For finitely generated groups this is the word norm of the standard
///    symmetric generating set.
///  - word: breadth-first word length over a finite generating set.
///  - weighted: least total weight of a factorization over a weighted
///    generating sequence (uniform-cost search).
///  - chain_ultra: the level in a chain exhausting a locally finite group.
class NormScheme {
 public:
  enum class Kind { Standard, Word, Weighted, ChainUltra };

  static NormScheme standard(Group g, std::int64_t budget = kDefaultBudget) {
    NormScheme s(Kind::Standard, std::move(g), budget);
    for (std::size_t i = 0; i < s.group_.factor_count(); ++i) {
      const auto& f = s.group_.factors()[i];
      if (f.kind == FactorKind::Unitriangular) {
        Group ut({f});
        s.ut_caches_.emplace(i, std::make_shared<detail::BfsCache>(ut, ut.standard_generators()));
      }
    }
    return s;
  }

  static NormScheme word(Group g, std::vector<Element> gens, std::int64_t budget = kDefaultBudget) {
    std::vector<Element> sym;
    for (const auto& x : gens) {
      if (!g.contains(x)) throw DescriptorMismatch("generator is not an element of the group");
      if (g.is_identity(x)) continue;
      sym.push_back(x);
      sym.push_back(g.inv(x));
    }
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());
    NormScheme s(Kind::Word, std::move(g), budget);
    s.generators_ = sym;
    s.bfs_ = std::make_shared<detail::BfsCache>(s.group_, sym);
    return s;
  }

  static NormScheme weighted(Group g, GeneratorSequence seq, std::int64_t budget = kDefaultBudget) {
    NormScheme s(Kind::Weighted, std::move(g), budget);
    s.dijkstra_ = std::make_shared<detail::DijkstraCache>(s.group_, std::move(seq));
    return s;
  }

  static NormScheme weighted(Group g, std::vector<WeightedGenerator> gens, std::int64_t budget = kDefaultBudget) {
    std::stable_sort(gens.begin(), gens.end(),
                     [](const auto& a, const auto& b) { return a.weight < b.weight; });
    auto shared = std::make_shared<std::vector<WeightedGenerator>>(std::move(gens));
    return weighted(std::move(g), [shared](std::size_t i) -> std::optional<WeightedGenerator> {
      if (i < shared->size()) return (*shared)[i];
      return std::nullopt;
    }, budget);
  }

  static NormScheme chain_ultra(SubgroupChain chain, std::int64_t budget = kDefaultBudget) {
    for (const auto& m : chain.modes())
      if (!(m.mode == FactorChain::Mode::Trivial ||
            (m.mode == FactorChain::Mode::Coordinates && m.param == 0)))
        throw ConstructionError("chain ultra-norm needs a chain starting at the trivial subgroup");
    NormScheme s(Kind::ChainUltra, chain.group(), budget);
    s.chain_ = std::make_shared<SubgroupChain>(std::move(chain));
    return s;
  }

  /// Same scheme with norm x -> sqrt(|x|).
  NormScheme snowflake() const {
    NormScheme s = *this;
    s.sqrt_ = true;
    return s;
  }

  Kind kind() const { return kind_; }
  const Group& group() const { return group_; }
  bool snowflaked() const { return sqrt_; }
  std::int64_t budget() const { return budget_; }
  const std::vector<Element>& generators() const { return generators_; }
  const SubgroupChain* chain() const { return chain_.get(); }

  std::string describe() const {
    std::string k;
    switch (kind_) {
      case Kind::Standard: k = "standard"; break;
      case Kind::Word: k = "word(" + std::to_string(generators_.size()) + " generators)"; break;
      case Kind::Weighted: k = "weighted"; break;
      case Kind::ChainUltra: k = "chain-ultra"; break;
    }
    return sqrt_ ? "sqrt(" + k + ")" : k;
  }

  NormValue norm(const Element& x) const {
    if (!group_.contains(x)) throw DescriptorMismatch("element does not belong to the scheme's group");
    return {raw_norm(x), sqrt_};
  }

  double distance(const Element& x, const Element& y) const {
    return norm(group_.mul(group_.inv(x), y)).value();
  }

  /// Exact closed ball of radius r around the identity.
  Ball ball(double r) const {
    if (r < 0) throw Error("ball radius must be nonnegative");
    std::int64_t R = raw_radius(r);
    std::vector<std::pair<std::int64_t, Element>> items = raw_ball(R);
    std::sort(items.begin(), items.end());
    Ball b;
    b.radius = r;
    b.elements.reserve(items.size());
    b.norms.reserve(items.size());
    for (auto& [n, e] : items) {
      b.norms.push_back({n, sqrt_});
      b.elements.push_back(std::move(e));
    }
    return b;
  }

  /// Size of the closed ball without materializing it when the scheme allows.
  std::int64_t ball_size(double r) const {
    std::int64_t R = raw_radius(r);
    if (kind_ == Kind::Word) return bfs_->ball_size(R, budget_);
    return static_cast<std::int64_t>(raw_ball(R).size());
  }

 private:
  NormScheme(Kind k, Group g, std::int64_t budget) : kind_(k), group_(std::move(g)), budget_(budget) {}

  std::int64_t raw_radius(double r) const {
    double rr = sqrt_ ? r * r : r;
    return static_cast<std::int64_t>(std::floor(rr + 1e-9));
  }

  std::int64_t raw_norm(const Element& x) const {
    switch (kind_) {
      case Kind::Word: return bfs_->distance(x, budget_);
      case Kind::ChainUltra: return chain_->level(x);
      case Kind::Weighted: {
        std::int64_t r = 1;
        for (;;) {
          auto b = dijkstra_->ball(r, budget_);
          auto it = b.find(x);
          if (it != b.end()) return it->second;
          r *= 2;
        }
      }
      case Kind::Standard: break;
    }
    std::int64_t total = 0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < group_.factor_count(); ++i) {
      const auto& f = group_.factors()[i];
      auto [b, n] = Group::slice(f, x, pos);
      pos = b + n;
      const std::int64_t* d = x.c.data() + b;
      switch (f.kind) {
        case FactorKind::Free: total = checked::add(total, checked::abs(d[0])); break;
        case FactorKind::Cyclic: total += std::min(d[0], f.param - d[0]); break;
        case FactorKind::CyclicInf:
          for (std::size_t k = 0; k < n; ++k)
            total = checked::add(total, static_cast<std::int64_t>(k + 1) * std::min(d[k], f.param - d[k]));
          break;
        case FactorKind::FreeInf:
          for (std::size_t k = 0; k < n; ++k)
            total = checked::add(total, checked::mul(static_cast<std::int64_t>(k + 1), checked::abs(d[k])));
          break;
        case FactorKind::QmodZ: total += Group::qmodz_level(d[1]); break;
        case FactorKind::Unitriangular: {
          Element part;
          part.c.assign(d, d + n);
          total = checked::add(total, ut_caches_.at(i)->distance(part, budget_));
          break;
        }
      }
    }
    return total;
  }

  // Per-factor (part, norm) lists of the standard scheme with norm <= R.
  std::vector<std::pair<std::vector<std::int64_t>, std::int64_t>> factor_ball(std::size_t i, std::int64_t R) const {
    const auto& f = group_.factors()[i];
    std::vector<std::pair<std::vector<std::int64_t>, std::int64_t>> out;
    switch (f.kind) {
      case FactorKind::Free:
        for (std::int64_t k = -R; k <= R; ++k) out.push_back({{k}, checked::abs(k)});
        break;
      case FactorKind::Cyclic:
        for (std::int64_t k = 0; k < f.param; ++k) {
          std::int64_t n = std::min(k, f.param - k);
          if (n <= R) out.push_back({{k}, n});
        }
        break;
      case FactorKind::CyclicInf:
      case FactorKind::FreeInf: {
        std::vector<std::int64_t> cur;
        std::function<void(std::int64_t, std::int64_t)> rec = [&](std::int64_t k, std::int64_t used) {
          // Zeros are padding for a later nonzero; record canonical vectors only.
          if (cur.empty() || cur.back() != 0) out.push_back({cur, used});
          std::int64_t w = k + 1;
          if (used + w > R) return;
          if (f.kind == FactorKind::CyclicInf) {
            for (std::int64_t c = 0; c < f.param; ++c) {
              std::int64_t cost = w * std::min(c, f.param - c);
              if (used + cost > R) continue;
              cur.push_back(c);
              rec(k + 1, used + cost);
              cur.pop_back();
            }
          } else {
            std::int64_t maxc = (R - used) / w;
            for (std::int64_t c = -maxc; c <= maxc; ++c) {
              cur.push_back(c);
              rec(k + 1, used + w * checked::abs(c));
              cur.pop_back();
            }
          }
          if (static_cast<std::int64_t>(out.size()) > budget_)
            throw BudgetExceeded("ball enumeration", budget_);
        };
        rec(0, 0);
        break;
      }
      case FactorKind::QmodZ: {
        std::int64_t top = std::max<std::int64_t>(R, 0);
        Group q({f});
        SubgroupChain ch = SubgroupChain::exhaustion(q);
        if (ch.size(top) > budget_) throw BudgetExceeded("ball enumeration of Q/Z", budget_);
        for (const auto& e : ch.cosets(top, budget_)) out.push_back({e.c, Group::qmodz_level(e.c[1])});
        break;
      }
      case FactorKind::Unitriangular: {
        auto layers = ut_caches_.at(i)->layers(R, budget_);
        for (std::size_t k = 0; k < layers.size(); ++k)
          for (const auto& e : layers[k]) out.push_back({e.c, static_cast<std::int64_t>(k)});
        break;
      }
    }
    return out;
  }

  std::vector<std::pair<std::int64_t, Element>> raw_ball(std::int64_t R) const {
    std::vector<std::pair<std::int64_t, Element>> out;
    switch (kind_) {
      case Kind::Word: {
        auto layers = bfs_->layers(R, budget_);
        for (std::size_t k = 0; k < layers.size(); ++k)
          for (auto& e : layers[k]) out.emplace_back(static_cast<std::int64_t>(k), e);
        return out;
      }
      case Kind::Weighted: {
        for (auto& [e, d] : dijkstra_->ball(R, budget_)) out.emplace_back(d, e);
        return out;
      }
      case Kind::ChainUltra: {
        for (auto& e : chain_->cosets(R, budget_)) out.emplace_back(chain_->level(e), e);
        return out;
      }
      case Kind::Standard: break;
    }
    const std::size_t nf = group_.factor_count();
    std::vector<std::vector<std::pair<std::vector<std::int64_t>, std::int64_t>>> per(nf);
    for (std::size_t i = 0; i < nf; ++i) per[i] = factor_ball(i, R);
    std::vector<std::int64_t> coords;
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t used) {
      if (i == nf) {
        if (static_cast<std::int64_t>(out.size()) >= budget_) throw BudgetExceeded("ball enumeration", budget_);
        out.emplace_back(used, Element{coords});
        return;
      }
      const auto& f = group_.factors()[i];
      for (const auto& [part, n] : per[i]) {
        if (used + n > R) continue;
        std::size_t mark = coords.size();
        if (f.variable_width()) coords.push_back(static_cast<std::int64_t>(part.size()));
        coords.insert(coords.end(), part.begin(), part.end());
        rec(i + 1, used + n);
        coords.resize(mark);
      }
    };
    rec(0, 0);
    return out;
  }

  Kind kind_;
  Group group_;
  std::int64_t budget_;
  bool sqrt_ = false;
  std::vector<Element> generators_;
  std::shared_ptr<detail::BfsCache> bfs_;
  std::shared_ptr<detail::DijkstraCache> dijkstra_;
  std::shared_ptr<SubgroupChain> chain_;
  std::map<std::size_t, std::shared_ptr<detail::BfsCache>> ut_caches_;
};

// ---------------------------------------------------------------------------

struct GrowthProfile {
  std::string generating_set;
  std::vector<std::int64_t> sizes;  // sizes[n] = |S^n|
  std::int64_t max_n = 0;
  bool truncated = false;
};

/// n -> |closed n-ball| for n = 0..N; stops early (flagged) at the budget.
inline GrowthProfile growth_sequence(const NormScheme& scheme, std::int64_t N) {
  if (scheme.snowflaked()) throw Error("growth sequences are defined for integer-valued norms");
  if (scheme.kind() != NormScheme::Kind::ChainUltra && !scheme.group().finitely_generated() &&
      scheme.kind() == NormScheme::Kind::Standard)
    throw Error("growth sequences need a finitely generated group");
  GrowthProfile p;
  p.generating_set = scheme.describe();
  for (std::int64_t n = 0; n <= N; ++n) {
    try {
      p.sizes.push_back(scheme.ball_size(static_cast<double>(n)));
      p.max_n = n;
    } catch (const BudgetExceeded&) {
      p.truncated = true;
      break;
    }
  }
  return p;
}

enum class Saturation { WholeGroup, ProperSubgroup, Inconclusive };

inline const char* to_string(Saturation s) {
  switch (s) {
    case Saturation::WholeGroup: return "WholeGroup";
    case Saturation::ProperSubgroup: return "ProperSubgroup";
    case Saturation::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct SaturationReport {
  Saturation verdict = Saturation::Inconclusive;
  std::string detail;
  std::int64_t closure_size = -1;  // -1 when infinite or unknown
};

/// Subgroup generated by the closed eps-ball: the whole group, a proper
/// subgroup, or undecided within the budget.
inline SaturationReport generated_subgroup_saturation(const NormScheme& scheme, double eps,
                                                      std::int64_t budget = kDefaultBudget) {
  if (eps < 0) throw Error("eps must be nonnegative");
  const Group& g = scheme.group();
  SaturationReport rep;
  double raw_eps = scheme.snowflaked() ? eps * eps : eps;
  std::int64_t R = static_cast<std::int64_t>(std::floor(raw_eps + 1e-9));

  if (scheme.kind() == NormScheme::Kind::ChainUltra) {
    // Balls of an ultra-norm around 1 are subgroups: the closure is G_R itself.
    const SubgroupChain& ch = *scheme.chain();
    std::int64_t d = ch.depth();
    if (d >= 0 && R >= d) {
      rep.verdict = Saturation::WholeGroup;
      rep.detail = "ball contains the top level of a stationary chain";
    } else {
      rep.verdict = Saturation::ProperSubgroup;
      rep.detail = "closure is the level-" + std::to_string(R) + " subgroup";
      rep.closure_size = ch.size(R);
    }
    return rep;
  }

  if (scheme.kind() == NormScheme::Kind::Standard) {
    // The ball of a sum norm contains each factor's ball, so the closure is
    // the product of the per-factor closures.
    bool whole = true;
    std::string why;
    for (const auto& f : g.factors()) {
      switch (f.kind) {
        case FactorKind::Free:
        case FactorKind::Cyclic:
        case FactorKind::Unitriangular:
          if (R < 1) {
            whole = false;
            why += detail::factor_name(f) + ": trivial closure; ";
          }
          break;
        case FactorKind::CyclicInf:
        case FactorKind::FreeInf:
          whole = false;
          why += detail::factor_name(f) + ": closure is the first " + std::to_string(R) + " coordinates; ";
          break;
        case FactorKind::QmodZ:
          whole = false;
          why += "Q/Z: closure is C_" + std::to_string(R) + "; ";
          break;
      }
    }
    rep.verdict = whole ? Saturation::WholeGroup : Saturation::ProperSubgroup;
    rep.detail = whole ? "closure contains every standard generator" : why;
    return rep;
  }

  // Generic: breadth-first closure under the ball elements.
  Ball b = scheme.ball(eps);
  std::vector<Element> gens;
  for (const auto& e : b.elements)
    if (!g.is_identity(e)) gens.push_back(e);
  std::vector<Element> targets;
  if (g.finitely_generated()) targets = g.standard_generators();
  std::unordered_map<Element, char, ElementHash> seen;
  std::vector<Element> frontier{g.identity()};
  seen.emplace(g.identity(), 1);
  auto all_targets = [&] {
    return !targets.empty() && std::all_of(targets.begin(), targets.end(),
                                           [&](const Element& t) { return seen.count(t) > 0; });
  };
  while (!frontier.empty()) {
    if (all_targets()) {
      rep.verdict = Saturation::WholeGroup;
      rep.detail = "closure reached every standard generator";
      return rep;
    }
    std::vector<Element> next;
    for (const auto& x : frontier)
      for (const auto& s : gens) {
        Element y = g.mul(x, s);
        if (seen.emplace(y, 1).second) next.push_back(std::move(y));
      }
    if (static_cast<std::int64_t>(seen.size()) > budget) {
      rep.verdict = Saturation::Inconclusive;
      rep.detail = "closure still growing at budget";
      return rep;
    }
    frontier = std::move(next);
  }
  rep.closure_size = static_cast<std::int64_t>(seen.size());
  auto ord = g.order();
  if (all_targets() || (ord && *ord == rep.closure_size)) {
    rep.verdict = Saturation::WholeGroup;
    rep.detail = "closure is the whole finite group";
  } else {
    rep.verdict = Saturation::ProperSubgroup;
    rep.detail = "closure stabilized at " + std::to_string(rep.closure_size) + " elements";
  }
  return rep;
}

struct DoublingReport {
  std::int64_t numerator = 1;  // |B_2r|
  std::int64_t denominator = 1;  // |B_r|
  std::int64_t at_radius = 1;
  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

/// max over r in {1..floor(R/2)} of |B_2r| / |B_r|.
inline DoublingReport doubling_constant(const NormScheme& scheme, double R) {
  if (R < 2) throw Error("doubling constant needs R >= 2");
  DoublingReport best;
  bool first = true;
  for (std::int64_t r = 1; 2 * r <= static_cast<std::int64_t>(std::floor(R)); ++r) {
    std::int64_t a = scheme.ball_size(static_cast<double>(2 * r));
    std::int64_t b = scheme.ball_size(static_cast<double>(r));
    // a/b > best.num/best.den
    if (first || static_cast<__int128>(a) * best.denominator > static_cast<__int128>(best.numerator) * b) {
      best = {a, b, r};
      first = false;
    }
  }
  return best;
}

}  // namespace coarse
