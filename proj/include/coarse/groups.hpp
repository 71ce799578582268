#pragma once

// Concrete countable groups: finite direct sums of Z, Z/n, countable sums of
// Z/p (or Z), Q/Z and the unitriangular groups UT(3..5, Z). Elements are
// immutable values in canonical form, so equality is coordinate equality.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "coarse/checked.hpp"
#include "coarse/error.hpp"

namespace coarse {

enum class FactorKind {
  Free,           // Z
  Cyclic,         // Z/n, n >= 2
  CyclicInf,      // countable direct sum of Z/p, p prime
  FreeInf,        // countable direct sum of Z
  QmodZ,          // Q/Z
  Unitriangular,  // UT(n, Z), n in {3,4,5}
};

struct Factor {
  FactorKind kind;
  std::int64_t param = 0;  // n for Cyclic, p for CyclicInf, n for UT

  static Factor free() { return {FactorKind::Free, 0}; }
  static Factor cyclic(std::int64_t n) { return {FactorKind::Cyclic, n}; }
  static Factor cyclic_inf(std::int64_t p) { return {FactorKind::CyclicInf, p}; }
  static Factor free_inf() { return {FactorKind::FreeInf, 0}; }
  static Factor qmodz() { return {FactorKind::QmodZ, 0}; }
  static Factor unitriangular(std::int64_t n) { return {FactorKind::Unitriangular, n}; }

  bool variable_width() const {
    return kind == FactorKind::CyclicInf || kind == FactorKind::FreeInf;
  }
  std::size_t width() const {
    switch (kind) {
      case FactorKind::Free:
      case FactorKind::Cyclic: return 1;
      case FactorKind::QmodZ: return 2;
      case FactorKind::Unitriangular: return static_cast<std::size_t>(param * (param - 1) / 2);
      default: return 0;
    }
  }
  bool operator==(const Factor&) const = default;
};

/// Canonical coordinates of one group element. Fixed-width factors occupy
/// their width; countable sums are stored as [length, c0, ..., c_{length-1}]
/// with no trailing zero.
struct Element {
  std::vector<std::int64_t> c;

  bool operator==(const Element&) const = default;
  auto operator<=>(const Element&) const = default;
};

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ULL ^ e.c.size();
    for (std::int64_t v : e.c) {
      h ^= std::hash<std::int64_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

inline bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

namespace detail {

inline std::size_t ut_index(std::int64_t n, std::int64_t i, std::int64_t j) {
  return static_cast<std::size_t>(i * n - i * (i + 1) / 2 + (j - i - 1));
}

inline void trim(std::vector<std::int64_t>& v) {
  while (!v.empty() && v.back() == 0) v.pop_back();
}

inline std::pair<std::int64_t, std::int64_t> reduce_fraction(std::int64_t a, std::int64_t b) {
  a = checked::mod(a, b);
  if (a == 0) return {0, 1};
  std::int64_t g = std::gcd(a, b);
  return {a / g, b / g};
}

}  // namespace detail

/// A group given as a finite direct sum of factors.
class Group {
 public:
  Group() = default;
  explicit Group(std::vector<Factor> factors) : factors_(std::move(factors)) {
    for (const auto& f : factors_) {
      if (f.kind == FactorKind::Cyclic && f.param < 2)
        throw Error("cyclic factor needs order >= 2");
      if (f.kind == FactorKind::CyclicInf && !is_prime(f.param))
        throw Error("countable cyclic sum needs a prime order");
      if (f.kind == FactorKind::Unitriangular && (f.param < 3 || f.param > 5))
        throw Error("unitriangular groups are supported for n in {3,4,5}");
    }
  }

  /// Parses the descriptor grammar, e.g. "Z^2 + Z_3 + Z_9", "Z_2^inf", "Q/Z", "UT3".
  static Group parse(std::string_view text);

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t factor_count() const { return factors_.size(); }
  bool operator==(const Group& o) const { return factors_ == o.factors_; }

  bool is_abelian() const {
    return std::none_of(factors_.begin(), factors_.end(), [](const Factor& f) {
      return f.kind == FactorKind::Unitriangular;
    });
  }
  bool is_finite() const {
    return std::all_of(factors_.begin(), factors_.end(),
                       [](const Factor& f) { return f.kind == FactorKind::Cyclic; });
  }
  bool finitely_generated() const {
    return std::none_of(factors_.begin(), factors_.end(), [](const Factor& f) {
      return f.kind == FactorKind::CyclicInf || f.kind == FactorKind::FreeInf ||
             f.kind == FactorKind::QmodZ;
    });
  }
  bool locally_finite() const {
    return std::all_of(factors_.begin(), factors_.end(), [](const Factor& f) {
      return f.kind == FactorKind::Cyclic || f.kind == FactorKind::CyclicInf ||
             f.kind == FactorKind::QmodZ;
    });
  }
  /// Torsion-free rank r0; nullopt means infinite.
  std::optional<std::int64_t> torsion_free_rank() const {
    std::int64_t r = 0;
    for (const auto& f : factors_) {
      if (f.kind == FactorKind::FreeInf) return std::nullopt;
      if (f.kind == FactorKind::Unitriangular)
        throw Error("torsion-free rank is computed for abelian descriptors only");
      if (f.kind == FactorKind::Free) ++r;
    }
    return r;
  }
  /// Order of a finite group; nullopt when infinite.
  std::optional<std::int64_t> order() const {
    if (!is_finite()) return std::nullopt;
    std::int64_t n = 1;
    for (const auto& f : factors_) n = checked::mul(n, f.param);
    return n;
  }

  Element identity() const {
    Element e;
    for (const auto& f : factors_) {
      if (f.variable_width()) {
        e.c.push_back(0);
      } else if (f.kind == FactorKind::QmodZ) {
        e.c.push_back(0);
        e.c.push_back(1);
      } else {
        e.c.insert(e.c.end(), f.width(), 0);
      }
    }
    return e;
  }

  /// Builds an element from per-factor coordinate lists (canonicalizing them).
  Element make(const std::vector<std::vector<std::int64_t>>& parts) const {
    if (parts.size() != factors_.size()) throw DescriptorMismatch("wrong number of factor parts");
    Element e;
    for (std::size_t i = 0; i < factors_.size(); ++i) append_canonical(factors_[i], parts[i], e.c);
    return e;
  }

  std::vector<std::vector<std::int64_t>> parts(const Element& e) const {
    std::vector<std::vector<std::int64_t>> out;
    std::size_t pos = 0;
    for (const auto& f : factors_) {
      auto [b, n] = slice(f, e, pos);
      out.emplace_back(e.c.begin() + static_cast<std::ptrdiff_t>(b),
                       e.c.begin() + static_cast<std::ptrdiff_t>(b + n));
      pos = b + n;
    }
    if (pos != e.c.size()) throw DescriptorMismatch("element has trailing coordinates");
    return out;
  }

  /// True when the coordinates are a canonical element of this group.
  bool contains(const Element& e) const {
    try {
      auto p = parts(e);
      return make(p) == e;
    } catch (const Error&) {
      return false;
    }
  }

  /// Element lying in factor i only.
  Element embed(std::size_t i, const std::vector<std::int64_t>& part) const {
    auto p = parts(identity());
    p.at(i) = part;
    return make(p);
  }

  Element mul(const Element& a, const Element& b) const {
    Element out;
    out.c.reserve(a.c.size());
    std::size_t pa = 0, pb = 0;
    for (const auto& f : factors_) {
      auto [ba, na] = slice(f, a, pa);
      auto [bb, nb] = slice(f, b, pb);
      mul_factor(f, a.c.data() + ba, na, b.c.data() + bb, nb, out.c);
      pa = ba + na;
      pb = bb + nb;
    }
    if (pa != a.c.size() || pb != b.c.size()) throw DescriptorMismatch("element shape mismatch");
    return out;
  }

  Element inv(const Element& a) const {
    Element out;
    out.c.reserve(a.c.size());
    std::size_t pa = 0;
    for (const auto& f : factors_) {
      auto [ba, na] = slice(f, a, pa);
      inv_factor(f, a.c.data() + ba, na, out.c);
      pa = ba + na;
    }
    if (pa != a.c.size()) throw DescriptorMismatch("element shape mismatch");
    return out;
  }

  /// a^-1 b^-1 a b.
  Element commutator(const Element& a, const Element& b) const {
    return mul(mul(inv(a), inv(b)), mul(a, b));
  }

  /// b^-1 a b.
  Element conjugate(const Element& a, const Element& b) const { return mul(mul(inv(b), a), b); }

  Element pow(const Element& a, std::int64_t k) const {
    Element base = k < 0 ? inv(a) : a;
    std::uint64_t e = k < 0 ? static_cast<std::uint64_t>(-(k + 1)) + 1 : static_cast<std::uint64_t>(k);
    Element r = identity();
    while (e) {
      if (e & 1) r = mul(r, base);
      e >>= 1;
      if (e) base = mul(base, base);
    }
    return r;
  }

  bool is_identity(const Element& a) const { return a == identity(); }

  /// Symmetric standard generating set of a finitely generated group.
  std::vector<Element> standard_generators() const {
    if (!finitely_generated()) throw Error("group is not finitely generated");
    std::vector<Element> gens;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      const auto& f = factors_[i];
      auto push = [&](const std::vector<std::int64_t>& part) {
        Element g = embed(i, part);
        Element gi = inv(g);
        gens.push_back(g);
        if (gi != g) gens.push_back(gi);
      };
      switch (f.kind) {
        case FactorKind::Free:
        case FactorKind::Cyclic: push({1}); break;
        case FactorKind::Unitriangular:
          for (std::int64_t r = 0; r + 1 < f.param; ++r) {
            std::vector<std::int64_t> part(f.width(), 0);
            part[detail::ut_index(f.param, r, r + 1)] = 1;
            push(part);
          }
          break;
        default: break;
      }
    }
    std::sort(gens.begin(), gens.end());
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
    return gens;
  }

  /// Level in the canonical exhaustion G_0 = {1} <= G_1 <= ...: finitely
  /// generated factors enter at level 1, the n-th coordinate of a countable
  /// sum at level n, and Q/Z is exhausted by C_n = (1/n!)Z/Z.
  std::int64_t level(const Element& x, std::int64_t bound = 1000) const {
    std::int64_t lvl = 0;
    std::size_t pos = 0;
    for (const auto& f : factors_) {
      auto [b, n] = slice(f, x, pos);
      pos = b + n;
      const std::int64_t* d = x.c.data() + b;
      std::int64_t l = 0;
      switch (f.kind) {
        case FactorKind::Free:
        case FactorKind::Cyclic:
        case FactorKind::Unitriangular:
          l = std::any_of(d, d + n, [](std::int64_t v) { return v != 0; }) ? 1 : 0;
          break;
        case FactorKind::CyclicInf:
        case FactorKind::FreeInf: l = static_cast<std::int64_t>(n); break;
        case FactorKind::QmodZ: l = qmodz_level(d[1], bound); break;
      }
      lvl = std::max(lvl, l);
    }
    if (lvl > bound) throw LevelOverflow(bound);
    return lvl;
  }

  /// Least n with den | n!.
  static std::int64_t qmodz_level(std::int64_t den, std::int64_t bound = 1000) {
    if (den == 1) return 0;
    std::int64_t r = 1 % den;
    for (std::int64_t n = 1; n <= bound; ++n) {
      r = static_cast<std::int64_t>((static_cast<__int128>(r) * n) % den);
      if (r == 0) return n;
    }
    throw LevelOverflow(bound);
  }

  std::string to_string() const;
  std::string format(const Element& e) const;
  Element parse_element(std::string_view text) const;

  /// Position and length of factor f's coordinates starting at pos.
  static std::pair<std::size_t, std::size_t> slice(const Factor& f, const Element& e, std::size_t pos) {
    if (f.variable_width()) {
      if (pos >= e.c.size() || e.c[pos] < 0) throw DescriptorMismatch("element shape mismatch");
      std::size_t n = static_cast<std::size_t>(e.c[pos]);
      if (pos + 1 + n > e.c.size()) throw DescriptorMismatch("element shape mismatch");
      return {pos + 1, n};
    }
    std::size_t n = f.kind == FactorKind::QmodZ ? 2 : f.width();
    if (pos + n > e.c.size()) throw DescriptorMismatch("element shape mismatch");
    return {pos, n};
  }

 private:
  static void append_canonical(const Factor& f, const std::vector<std::int64_t>& part,
                               std::vector<std::int64_t>& out) {
    switch (f.kind) {
      case FactorKind::Free:
        if (part.size() != 1) throw DescriptorMismatch("Z part needs one coordinate");
        out.push_back(part[0]);
        break;
      case FactorKind::Cyclic:
        if (part.size() != 1) throw DescriptorMismatch("Z_n part needs one coordinate");
        out.push_back(checked::mod(part[0], f.param));
        break;
      case FactorKind::CyclicInf:
      case FactorKind::FreeInf: {
        std::vector<std::int64_t> v = part;
        if (f.kind == FactorKind::CyclicInf)
          for (auto& x : v) x = checked::mod(x, f.param);
        detail::trim(v);
        out.push_back(static_cast<std::int64_t>(v.size()));
        out.insert(out.end(), v.begin(), v.end());
        break;
      }
      case FactorKind::QmodZ: {
        if (part.size() != 2 || part[1] <= 0) throw DescriptorMismatch("Q/Z part needs a/b, b > 0");
        auto [a, b] = detail::reduce_fraction(part[0], part[1]);
        out.push_back(a);
        out.push_back(b);
        break;
      }
      case FactorKind::Unitriangular:
        if (part.size() != f.width()) throw DescriptorMismatch("UT part has wrong width");
        out.insert(out.end(), part.begin(), part.end());
        break;
    }
  }

  static void mul_factor(const Factor& f, const std::int64_t* a, std::size_t na,
                         const std::int64_t* b, std::size_t nb, std::vector<std::int64_t>& out) {
    switch (f.kind) {
      case FactorKind::Free: out.push_back(checked::add(a[0], b[0])); break;
      case FactorKind::Cyclic: out.push_back((a[0] + b[0]) % f.param); break;
      case FactorKind::CyclicInf:
      case FactorKind::FreeInf: {
        std::size_t n = std::max(na, nb);
        std::size_t head = out.size();
        out.push_back(0);
        for (std::size_t i = 0; i < n; ++i) {
          std::int64_t x = i < na ? a[i] : 0, y = i < nb ? b[i] : 0;
          out.push_back(f.kind == FactorKind::CyclicInf ? (x + y) % f.param : checked::add(x, y));
        }
        while (out.size() > head + 1 && out.back() == 0) out.pop_back();
        out[head] = static_cast<std::int64_t>(out.size() - head - 1);
        break;
      }
      case FactorKind::QmodZ: {
        std::int64_t g = std::gcd(a[1], b[1]);
        std::int64_t l = checked::mul(a[1] / g, b[1]);
        std::int64_t num = checked::add(checked::mul(a[0], l / a[1]), checked::mul(b[0], l / b[1]));
        auto [x, y] = detail::reduce_fraction(num, l);
        out.push_back(x);
        out.push_back(y);
        break;
      }
      case FactorKind::Unitriangular: {
        const std::int64_t n = f.param;
        std::size_t head = out.size();
        out.resize(head + f.width());
        for (std::int64_t i = 0; i < n; ++i)
          for (std::int64_t j = i + 1; j < n; ++j) {
            std::int64_t v = checked::add(a[detail::ut_index(n, i, j)], b[detail::ut_index(n, i, j)]);
            for (std::int64_t k = i + 1; k < j; ++k)
              v = checked::add(v, checked::mul(a[detail::ut_index(n, i, k)], b[detail::ut_index(n, k, j)]));
            out[head + detail::ut_index(n, i, j)] = v;
          }
        break;
      }
    }
  }

  static void inv_factor(const Factor& f, const std::int64_t* a, std::size_t na,
                         std::vector<std::int64_t>& out) {
    switch (f.kind) {
      case FactorKind::Free: out.push_back(checked::neg(a[0])); break;
      case FactorKind::Cyclic: out.push_back((f.param - a[0]) % f.param); break;
      case FactorKind::CyclicInf:
      case FactorKind::FreeInf:
        out.push_back(static_cast<std::int64_t>(na));
        for (std::size_t i = 0; i < na; ++i)
          out.push_back(f.kind == FactorKind::CyclicInf ? (f.param - a[i]) % f.param : checked::neg(a[i]));
        break;
      case FactorKind::QmodZ: {
        auto [x, y] = detail::reduce_fraction(-a[0], a[1]);
        out.push_back(x);
        out.push_back(y);
        break;
      }
      case FactorKind::Unitriangular: {
        const std::int64_t n = f.param;
        std::size_t head = out.size();
        out.resize(head + f.width());
        auto X = [&](std::int64_t i, std::int64_t j) -> std::int64_t& {
          return out[head + detail::ut_index(n, i, j)];
        };
        for (std::int64_t gap = 1; gap < n; ++gap)
          for (std::int64_t i = 0; i + gap < n; ++i) {
            std::int64_t j = i + gap;
            std::int64_t v = checked::neg(a[detail::ut_index(n, i, j)]);
            for (std::int64_t k = i + 1; k < j; ++k)
              v = checked::sub(v, checked::mul(a[detail::ut_index(n, i, k)], X(k, j)));
            X(i, j) = v;
          }
        break;
      }
    }
  }

  std::vector<Factor> factors_;
};

// ---------------------------------------------------------------------------
// Descriptor grammar
//   sum  := term ('+' term)*
//   term := 'Z' ['^' (INT | 'inf')] | 'Z_' INT ['^' (INT | 'inf')]
//         | 'Q/Z' | 'UT' INT | '0'

namespace detail {

class DescriptorParser {
 public:
  explicit DescriptorParser(std::string_view s) : s_(s) {}

  std::vector<Factor> parse() {
    std::vector<Factor> out;
    skip();
    if (peek() == '0') {
      ++i_;
      skip();
      expect_end();
      return out;
    }
    term(out);
    skip();
    while (peek() == '+') {
      ++i_;
      skip();
      term(out);
      skip();
    }
    expect_end();
    return out;
  }

 private:
  char peek() const { return i_ < s_.size() ? s_[i_] : '\0'; }
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  void expect_end() {
    if (i_ != s_.size()) throw ParseError("unexpected character", i_, "'+' or end of input");
  }
  std::int64_t integer() {
    skip();
    std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (start == i_) throw ParseError("missing integer", start, "integer");
    try {
      return std::stoll(std::string(s_.substr(start, i_ - start)));
    } catch (const std::exception&) {
      throw ParseError("integer out of range", start, "integer");
    }
  }
  // Returns -1 for "inf".
  std::int64_t exponent() {
    skip();
    if (peek() != '^') return 1;
    ++i_;
    skip();
    if (s_.substr(i_, 3) == "inf") {
      i_ += 3;
      return -1;
    }
    return integer();
  }
  void term(std::vector<Factor>& out) {
    std::size_t start = i_;
    if (s_.substr(i_, 3) == "Q/Z") {
      i_ += 3;
      out.push_back(Factor::qmodz());
      return;
    }
    if (s_.substr(i_, 2) == "UT") {
      i_ += 2;
      std::int64_t n = integer();
      if (n < 3 || n > 5) throw ParseError("unsupported UT dimension", start + 2, "3, 4 or 5");
      out.push_back(Factor::unitriangular(n));
      return;
    }
    if (peek() != 'Z') throw ParseError("unknown term", start, "'Z', 'Z_n', 'Q/Z' or 'UTn'");
    ++i_;
    if (peek() == '_') {
      ++i_;
      std::size_t npos = i_;
      std::int64_t n = integer();
      if (n < 2) throw ParseError("cyclic order must be >= 2", npos, "integer >= 2");
      std::size_t epos = i_;
      std::int64_t e = exponent();
      if (e == -1) {
        if (!is_prime(n)) throw ParseError("infinite sums need a prime order", npos, "prime");
        out.push_back(Factor::cyclic_inf(n));
      } else {
        if (e > 64) throw ParseError("exponent too large", epos, "exponent <= 64");
        for (std::int64_t k = 0; k < e; ++k) out.push_back(Factor::cyclic(n));
      }
      return;
    }
    std::size_t epos = i_;
    std::int64_t e = exponent();
    if (e == -1) {
      out.push_back(Factor::free_inf());
    } else {
      if (e > 64) throw ParseError("exponent too large", epos, "exponent <= 64");
      for (std::int64_t k = 0; k < e; ++k) out.push_back(Factor::free());
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

inline std::string factor_name(const Factor& f) {
  switch (f.kind) {
    case FactorKind::Free: return "Z";
    case FactorKind::Cyclic: return "Z_" + std::to_string(f.param);
    case FactorKind::CyclicInf: return "Z_" + std::to_string(f.param) + "^inf";
    case FactorKind::FreeInf: return "Z^inf";
    case FactorKind::QmodZ: return "Q/Z";
    case FactorKind::Unitriangular: return "UT" + std::to_string(f.param);
  }
  return "?";
}

}  // namespace detail

inline Group Group::parse(std::string_view text) {
  return Group(detail::DescriptorParser(text).parse());
}

inline std::string Group::to_string() const {
  if (factors_.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < factors_.size();) {
    std::size_t j = i;
    while (j < factors_.size() && factors_[j] == factors_[i] &&
           (factors_[i].kind == FactorKind::Free || factors_[i].kind == FactorKind::Cyclic))
      ++j;
    if (j == i) j = i + 1;
    if (!out.empty()) out += " + ";
    out += detail::factor_name(factors_[i]);
    if (j - i > 1) out += "^" + std::to_string(j - i);
    i = j;
  }
  return out;
}

/// Text form: factor parts separated by ';', countable sums and UT entries
/// in brackets, Q/Z as a/b. Example for Z + Z_2^inf + Q/Z: "(3; [1,0,1]; 1/6)".
inline std::string Group::format(const Element& e) const {
  auto p = parts(e);
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) os << "; ";
    const auto& f = factors_[i];
    if (f.kind == FactorKind::QmodZ) {
      os << p[i][0] << '/' << p[i][1];
    } else if (f.variable_width() || f.kind == FactorKind::Unitriangular) {
      os << '[';
      for (std::size_t k = 0; k < p[i].size(); ++k) os << (k ? "," : "") << p[i][k];
      os << ']';
    } else {
      os << p[i][0];
    }
  }
  os << ')';
  return os.str();
}

inline Element Group::parse_element(std::string_view text) const {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.size() < 2 || s.front() != '(' || s.back() != ')')
    throw ParseError("element must be parenthesized", 0, "'(' ... ')'");
  s = s.substr(1, s.size() - 2);
  std::vector<std::string> items;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == ';') {
      items.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  if (factors_.empty() && items.size() == 1 && items[0].empty()) return identity();
  if (items.size() != factors_.size())
    throw ParseError("wrong number of factor parts", 0, std::to_string(factors_.size()) + " parts");
  std::vector<std::vector<std::int64_t>> parts;
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::string it = items[i];
    std::vector<std::int64_t> v;
    try {
      if (factors_[i].kind == FactorKind::QmodZ) {
        auto slash = it.find('/');
        if (slash == std::string::npos) throw ParseError("expected fraction", i, "a/b");
        v = {std::stoll(it.substr(0, slash)), std::stoll(it.substr(slash + 1))};
      } else {
        if (!it.empty() && it.front() == '[') it = it.substr(1, it.size() - 2);
        std::size_t b = 0;
        for (std::size_t k = 0; k <= it.size(); ++k)
          if (k == it.size() || it[k] == ',') {
            if (k > b) v.push_back(std::stoll(it.substr(b, k - b)));
            b = k + 1;
          }
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("bad integer in element", i, "integer");
    } catch (const std::out_of_range&) {
      throw ParseError("integer out of range in element", i, "integer");
    }
    parts.push_back(std::move(v));
  }
  return make(parts);
}

}  // namespace coarse
