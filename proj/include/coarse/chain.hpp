#pragma once

// Subgroup chains H = G_0 <= G_1 <= ... of finite successive index, built
// factor by factor over a direct-sum group. Each level's cosets are indexed
// by a mixed-radix number so that cosets of G_n are aligned blocks of size
// |G_n / H|; the chain ultra-metric is then readable off the indices.

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "coarse/checked.hpp"
#include "coarse/error.hpp"
#include "coarse/groups.hpp"

namespace coarse {

/// How one factor sits in the chain.
struct FactorChain {
  enum class Mode {
    Whole,        // factor lies inside H
    Trivial,      // factor meets H trivially and is exhausted by its own levels
    Multiples,    // Z only: H meets it in param*Z, G_1 contains all of it
    Coordinates,  // countable sum only: H contains the first param coordinates
  };
  Mode mode = Mode::Trivial;
  std::int64_t param = 0;

  static FactorChain whole() { return {Mode::Whole, 0}; }
  static FactorChain trivial() { return {Mode::Trivial, 0}; }
  static FactorChain multiples(std::int64_t n) { return {Mode::Multiples, n}; }
  static FactorChain coordinates(std::int64_t h) { return {Mode::Coordinates, h}; }
};

class SubgroupChain {
 public:
  SubgroupChain(Group group, std::vector<FactorChain> modes)
      : group_(std::move(group)), modes_(std::move(modes)) {
    if (modes_.size() != group_.factor_count())
      throw ConstructionError("chain needs one mode per factor");
    for (std::size_t i = 0; i < modes_.size(); ++i) validate(group_.factors()[i], modes_[i]);
  }

  /// H = {1}, levels = canonical exhaustion of a locally finite group.
  static SubgroupChain exhaustion(const Group& g) {
    if (!g.locally_finite())
      throw ConstructionError("exhaustion by finite subgroups needs a locally finite group");
    return SubgroupChain(g, std::vector<FactorChain>(g.factor_count(), FactorChain::trivial()));
  }

  const Group& group() const { return group_; }
  const std::vector<FactorChain>& modes() const { return modes_; }

  /// [G_n : G_{n-1}] for n >= 1.
  std::int64_t index(std::int64_t n) const {
    std::int64_t r = 1;
    for (std::size_t i = 0; i < modes_.size(); ++i) r = checked::mul(r, factor_index(i, n));
    return r;
  }

  /// |G_n / H|.
  std::int64_t size(std::int64_t n) const {
    std::int64_t r = 1;
    for (std::int64_t k = 1; k <= n; ++k) r = checked::mul(r, index(k));
    return r;
  }

  /// Last level with nontrivial index, or -1 when the chain never stabilizes.
  std::int64_t depth() const {
    std::int64_t d = 0;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      const auto& f = group_.factors()[i];
      switch (modes_[i].mode) {
        case FactorChain::Mode::Whole: break;
        case FactorChain::Mode::Multiples:
          if (modes_[i].param > 1) d = std::max<std::int64_t>(d, 1);
          break;
        case FactorChain::Mode::Coordinates: return -1;
        case FactorChain::Mode::Trivial:
          if (f.kind == FactorKind::Cyclic) d = std::max<std::int64_t>(d, 1);
          else return -1;
          break;
      }
    }
    return d;
  }
  bool bounded() const { return depth() >= 0; }

  /// Canonical representative of the coset x G_n.
  Element key(std::int64_t n, const Element& x) const {
    auto p = group_.parts(x);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = factor_key(i, n, p[i]);
    return group_.make(p);
  }

  /// Canonical representative of xH.
  Element coset(const Element& x) const { return key(0, x); }

  bool in_level(std::int64_t n, const Element& x) const { return key(n, x) == group_.identity(); }

  /// min{n : x in G_n}.
  std::int64_t level(const Element& x, std::int64_t bound = 1000) const {
    std::int64_t lo = 0;
    auto p = group_.parts(x);
    for (std::size_t i = 0; i < p.size(); ++i) lo = std::max(lo, factor_level(i, p[i], bound));
    if (lo > bound) throw LevelOverflow(bound);
    return lo;
  }

  /// Chain ultra-metric on G/H: min{n : xG_n = yG_n}.
  std::int64_t ultra_distance(const Element& x, const Element& y, std::int64_t bound = 1000) const {
    return level(group_.mul(group_.inv(x), y), bound);
  }

  /// Digit of x at level n >= 1: which coset of G_{n-1} inside G_n.
  std::int64_t digit(std::int64_t n, const Element& x) const {
    auto p = group_.parts(x);
    std::int64_t d = 0;
    for (std::size_t i = p.size(); i-- > 0;) d = checked::add(checked::mul(d, factor_index(i, n)), factor_digit(i, n, p[i]));
    return d;
  }

  /// Transversal element for a level-n digit.
  Element representative(std::int64_t n, std::int64_t d) const {
    auto p = group_.parts(group_.identity());
    for (std::size_t i = 0; i < p.size(); ++i) {
      std::int64_t m = factor_index(i, n);
      p[i] = factor_rep(i, n, d % m);
      d /= m;
    }
    return group_.make(p);
  }

  /// Representatives of G_n / G_{n-1}, identity first.
  std::vector<Element> transversal(std::int64_t n) const {
    std::vector<Element> out;
    std::int64_t m = index(n);
    out.reserve(static_cast<std::size_t>(m));
    for (std::int64_t d = 0; d < m; ++d) out.push_back(representative(n, d));
    return out;
  }

  /// Mixed-radix index of xH; cosets of G_n are the blocks [k*size(n), (k+1)*size(n)).
  std::uint64_t encode(const Element& x) const {
    std::int64_t top = level(x);
    std::uint64_t idx = 0;
    for (std::int64_t n = top; n >= 1; --n)
      idx = idx * static_cast<std::uint64_t>(index(n)) + static_cast<std::uint64_t>(digit(n, x));
    return idx;
  }

  /// Canonical coset representative with the given index.
  Element decode(std::uint64_t idx) const {
    Element x = group_.identity();
    std::int64_t n = 1;
    std::int64_t guard = 0;
    while (idx > 0) {
      std::uint64_t m = static_cast<std::uint64_t>(index(n));
      if (m > 1) x = group_.mul(x, representative(n, static_cast<std::int64_t>(idx % m)));
      if (m > 1) {
        idx /= m;
        guard = 0;
      } else if (++guard > 64 && depth() >= 0) {
        throw LevelOverflow(n);
      }
      ++n;
    }
    return coset(x);
  }

  /// Canonical representatives of G_n / H in index order.
  std::vector<Element> cosets(std::int64_t n, std::int64_t budget = 1'000'000) const {
    std::int64_t s = size(n);
    if (s > budget) throw BudgetExceeded("coset enumeration of level " + std::to_string(n), budget);
    std::vector<Element> out;
    out.reserve(static_cast<std::size_t>(s));
    for (std::int64_t i = 0; i < s; ++i) out.push_back(decode(static_cast<std::uint64_t>(i)));
    return out;
  }

 private:
  static void validate(const Factor& f, const FactorChain& m) {
    using M = FactorChain::Mode;
    switch (m.mode) {
      case M::Whole: return;
      case M::Multiples:
        if (f.kind != FactorKind::Free || m.param < 1)
          throw ConstructionError("multiples mode needs a Z factor and n >= 1");
        return;
      case M::Coordinates:
        if (f.kind != FactorKind::CyclicInf || m.param < 0)
          throw ConstructionError("coordinates mode needs a Z_p^inf factor");
        return;
      case M::Trivial:
        if (f.kind != FactorKind::Cyclic && f.kind != FactorKind::CyclicInf && f.kind != FactorKind::QmodZ)
          throw ConstructionError("factor " + detail::factor_name(f) +
                                  " has infinite index over a trivial intersection");
        return;
    }
  }

  std::int64_t factor_index(std::size_t i, std::int64_t n) const {
    if (n < 1) return 1;
    const auto& f = group_.factors()[i];
    const auto& m = modes_[i];
    switch (m.mode) {
      case FactorChain::Mode::Whole: return 1;
      case FactorChain::Mode::Multiples: return n == 1 ? m.param : 1;
      case FactorChain::Mode::Coordinates: return f.param;
      case FactorChain::Mode::Trivial:
        if (f.kind == FactorKind::Cyclic) return n == 1 ? f.param : 1;
        if (f.kind == FactorKind::CyclicInf) return f.param;
        return n >= 2 ? n : 1;  // Q/Z: [C_n : C_{n-1}] = n
    }
    return 1;
  }

  std::int64_t factor_offset(std::size_t i) const {
    return modes_[i].mode == FactorChain::Mode::Coordinates ? modes_[i].param : 0;
  }

  std::vector<std::int64_t> factor_key(std::size_t i, std::int64_t n, const std::vector<std::int64_t>& part) const {
    const auto& f = group_.factors()[i];
    const auto& m = modes_[i];
    switch (m.mode) {
      case FactorChain::Mode::Whole: return identity_part(f);
      case FactorChain::Mode::Multiples:
        return {n >= 1 ? 0 : checked::mod(part[0], m.param)};
      default: break;
    }
    switch (f.kind) {
      case FactorKind::Cyclic: return {n >= 1 ? 0 : part[0]};
      case FactorKind::CyclicInf: {
        std::vector<std::int64_t> v = part;
        std::size_t cut = static_cast<std::size_t>(factor_offset(i) + n);
        for (std::size_t k = 0; k < v.size() && k < cut; ++k) v[k] = 0;
        return v;
      }
      case FactorKind::QmodZ: {
        // x mod C_n: ((a * n!) mod b) / (b * n!)
        std::int64_t a = part[0], b = part[1];
        if (b == 1) return {0, 1};
        __int128 fact_mod = 1 % b;
        __int128 fact = 1;
        bool fact_fits = true;
        for (std::int64_t k = 2; k <= n; ++k) {
          fact_mod = (fact_mod * k) % b;
          if (fact_fits) {
            fact *= k;
            if (fact > (static_cast<__int128>(1) << 100)) fact_fits = false;
          }
        }
        if (fact_mod == 0) return {0, 1};
        __int128 num = (static_cast<__int128>(a) * fact_mod) % b;
        if (!fact_fits) throw ArithmeticOverflow("Q/Z coset key overflow");
        __int128 den = static_cast<__int128>(b) * fact;
        __int128 g = std::gcd(static_cast<long long>(num), static_cast<long long>(b));
        num /= g;
        den /= g;
        // den is now b/g * n!, still possibly divisible by common factors of num and n!.
        __int128 x = num, y = den;
        while (y != 0) {
          __int128 t = x % y;
          x = y;
          y = t;
        }
        num /= x;
        den /= x;
        if (den > INT64_MAX) throw ArithmeticOverflow("Q/Z coset key overflow");
        return {static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
      }
      default: return part;
    }
  }

  std::int64_t factor_level(std::size_t i, const std::vector<std::int64_t>& part, std::int64_t bound) const {
    const auto& f = group_.factors()[i];
    const auto& m = modes_[i];
    switch (m.mode) {
      case FactorChain::Mode::Whole: return 0;
      case FactorChain::Mode::Multiples: return checked::mod(part[0], m.param) == 0 ? 0 : 1;
      default: break;
    }
    switch (f.kind) {
      case FactorKind::Cyclic: return part[0] == 0 ? 0 : 1;
      case FactorKind::CyclicInf: {
        std::int64_t len = static_cast<std::int64_t>(part.size());
        return std::max<std::int64_t>(0, len - factor_offset(i));
      }
      case FactorKind::QmodZ: return Group::qmodz_level(part[1], bound);
      default: return 0;
    }
  }

  std::int64_t factor_digit(std::size_t i, std::int64_t n, const std::vector<std::int64_t>& part) const {
    const auto& f = group_.factors()[i];
    const auto& m = modes_[i];
    if (factor_index(i, n) == 1) return 0;
    if (m.mode == FactorChain::Mode::Multiples) return checked::mod(part[0], m.param);
    switch (f.kind) {
      case FactorKind::Cyclic: return part[0];
      case FactorKind::CyclicInf: {
        std::size_t k = static_cast<std::size_t>(factor_offset(i) + n - 1);
        return k < part.size() ? part[k] : 0;
      }
      case FactorKind::QmodZ: {
        // floor(a * n! / b) mod n, computed modulo b*n.
        std::int64_t a = part[0], b = part[1];
        __int128 mod = static_cast<__int128>(b) * n;
        __int128 r = 1;
        for (std::int64_t k = 2; k <= n; ++k) r = (r * k) % mod;
        r = (r * a) % mod;
        return static_cast<std::int64_t>(r / b);
      }
      default: return 0;
    }
  }

  std::vector<std::int64_t> factor_rep(std::size_t i, std::int64_t n, std::int64_t d) const {
    const auto& f = group_.factors()[i];
    const auto& m = modes_[i];
    if (factor_index(i, n) == 1 || d == 0) return identity_part(f);
    if (m.mode == FactorChain::Mode::Multiples) return {d};
    switch (f.kind) {
      case FactorKind::Cyclic: return {d};
      case FactorKind::CyclicInf: {
        std::vector<std::int64_t> v(static_cast<std::size_t>(factor_offset(i) + n), 0);
        v.back() = d;
        return v;
      }
      case FactorKind::QmodZ: return {d, checked::factorial(n)};
      default: return identity_part(f);
    }
  }

  static std::vector<std::int64_t> identity_part(const Factor& f) {
    if (f.variable_width()) return {};
    if (f.kind == FactorKind::QmodZ) return {0, 1};
    return std::vector<std::int64_t>(f.width(), 0);
  }

  Group group_;
  std::vector<FactorChain> modes_;
};

}  // namespace coarse
