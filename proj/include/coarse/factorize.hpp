#pragma once

// Explicit coarse-equivalence witnesses. A recipe bundles the two maps, the
// constants of its certificate, and the windows on which it is checked.
// Nothing here is trusted without running verify_recipe.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coarse/chain.hpp"
#include "coarse/checked.hpp"
#include "coarse/coarse.hpp"
#include "coarse/error.hpp"
#include "coarse/groups.hpp"
#include "coarse/metrics.hpp"
#include "coarse/quotients.hpp"
#include "coarse/spaces.hpp"

namespace coarse {

/// A subset of a metric space with the induced metric.
class SubsetSpace : public MetricSpace {
 public:
  SubsetSpace(SpacePtr ambient, std::string name, std::function<bool(const Element&)> contains)
      : ambient_(std::move(ambient)), name_(std::move(name)), contains_(std::move(contains)) {}

  std::string name() const override { return name_ + " in " + ambient_->name(); }
  double distance(const Element& x, const Element& y) const override { return ambient_->distance(x, y); }
  Element base() const override { return ambient_->base(); }
  std::string format(const Element& p) const override { return ambient_->format(p); }
  std::vector<Element> near(const Element& p, double r) const override {
    std::vector<Element> out;
    for (auto& y : ambient_->near(p, r))
      if (contains_(y)) out.push_back(std::move(y));
    return out;
  }

 private:
  SpacePtr ambient_;
  std::string name_;
  std::function<bool(const Element&)> contains_;
};

/// G/H with a closed-form distance on canonical representatives. Balls are
/// found by projecting p B_r(G), which sees every coset within r of p when
/// the distance is a Hausdorff distance.
class FormulaQuotient : public MetricSpace {
 public:
  FormulaQuotient(NormScheme scheme, Subgroup H, std::string formula,
                  std::function<double(const Element&, const Element&)> dist)
      : scheme_(std::move(scheme)), H_(std::move(H)), formula_(std::move(formula)), dist_(std::move(dist)) {}

  const Subgroup& subgroup() const { return H_; }
  std::string name() const override { return scheme_.group().to_string() + " / " + H_.name + " [" + formula_ + "]"; }
  double distance(const Element& x, const Element& y) const override { return dist_(x, y); }
  Element base() const override { return H_.canonical(scheme_.group().identity()); }
  std::string format(const Element& p) const override { return scheme_.group().format(p) + "H"; }
  std::vector<Element> near(const Element& p, double r) const override {
    const Group& g = scheme_.group();
    std::set<Element> seen;
    std::vector<Element> out;
    for (const auto& u : scheme_.ball(r).elements) {
      Element c = H_.canonical(g.mul(p, u));
      if (seen.insert(c).second && dist_(p, c) <= r + 1e-12) out.push_back(c);
    }
    return out;
  }

 private:
  NormScheme scheme_;
  Subgroup H_;
  std::string formula_;
  std::function<double(const Element&, const Element&)> dist_;
};

/// UT3 / center with the standard word norm: the quotient is Z^2 with the
/// l1 norm of (x, z).
inline std::shared_ptr<const FormulaQuotient> ut3_center_quotient(std::int64_t budget = kDefaultBudget) {
  return std::make_shared<FormulaQuotient>(
      NormScheme::standard(Group::parse("UT3"), budget), ut3_center(), "|dx| + |dz|",
      [](const Element& a, const Element& b) {
        return static_cast<double>(checked::abs(checked::sub(a.c[0], b.c[0])) +
                                   checked::abs(checked::sub(a.c[2], b.c[2])));
      });
}

// ---------------------------------------------------------------------------

enum class Construction { ZxZn, T4, T5, Interleave, ChainMatch, Product, Projection, MetricChange, Pairing };

inline std::string to_string(Construction c) {
  switch (c) {
    case Construction::ZxZn: return "ZxZn";
    case Construction::T4: return "T4";
    case Construction::T5: return "T5";
    case Construction::Interleave: return "Interleave";
    case Construction::ChainMatch: return "ChainMatch";
    case Construction::Product: return "Product";
    case Construction::Projection: return "Projection";
    case Construction::MetricChange: return "MetricChange";
    case Construction::Pairing: return "Pairing";
  }
  return "?";
}

struct WitnessRecipe {
  Construction tag = Construction::ZxZn;
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::string> ingredients;
  CoarseCertificate certificate;
  bool bijective = false;
  // Windows and delta grid the recipe is checked on; anything beyond them is
  // extrapolation.
  double R_x = 0;
  double R_y = 0;
  std::vector<double> deltas{1, 2, 3};
  // chain_match only: one row per merged level (index, side, chain level, block size, canonical count).
  std::vector<std::vector<std::int64_t>> table;
};

inline CertificateReport verify_recipe(const WitnessRecipe& r) {
  return verify_certificate(r.certificate, r.R_x, r.R_y, r.deltas);
}

inline CertificateReport verify_recipe(const WitnessRecipe& r, double R_x, double R_y) {
  return verify_certificate(r.certificate, R_x, R_y, r.deltas);
}

// ---------------------------------------------------------------------------

/// Z x Z_n -> Z, (k, r) -> nk + r with r in {0, ..., n-1}; the inverse is
/// floor division.
inline WitnessRecipe z_times_zn_witness(std::int64_t n, double R = 1000) {
  if (n < 2) throw Error("z_times_zn_witness needs n >= 2");
  SpacePtr X = group_space("Z + Z_" + std::to_string(n));
  SpacePtr Y = group_space("Z");
  WitnessRecipe r;
  r.tag = Construction::ZxZn;
  r.name = "Z x Z_" + std::to_string(n) + " -> Z";
  r.params = {{"n", std::to_string(n)}};
  r.bijective = true;
  r.R_x = r.R_y = R;
  auto f = [n](const Element& x) { return Element{{checked::add(checked::mul(n, x.c[0]), x.c[1])}}; };
  auto g = [n](const Element& y) { return Element{{checked::floor_div(y.c[0], n), checked::mod(y.c[0], n)}}; };
  r.certificate.f = {"(k, r) -> " + std::to_string(n) + "k + r", X, Y, f, g, true};
  r.certificate.g = {"y -> (floor(y/" + std::to_string(n) + "), y mod " + std::to_string(n) + ")", Y, X, g, f, true};
  r.certificate.K = 0;
  r.certificate.f_bound = [n](double d) { return static_cast<double>(n) * std::floor(d) + static_cast<double>(n - 1); };
  r.certificate.g_bound = [n](double d) {
    return std::floor(d / static_cast<double>(n)) + 1 + static_cast<double>(n / 2);
  };
  return r;
}

// ---------------------------------------------------------------------------

/// A section G/H -> G on canonical coset representatives.
struct SectionFn {
  std::string name;
  std::function<Element(const Element&)> eval;
};

inline SectionFn section_fn(const Section& s, std::string name = "recursive section") {
  return {std::move(name), [s](const Element& x) { return s(x); }};
}

struct FactorizationOptions {
  double check_radius = 6;         // cosets whose section values are checked at construction
  std::int64_t orbit_radius = 8;   // conjugation orbits are followed up to this radius
  double R_x = 6;
  double R_y = 6;
  std::vector<double> deltas{1, 2};
};

namespace detail {

inline SetSpec as_set(const Subgroup& H) { return {H.name, H.contains}; }

// Section property and the orbit test on every checked coset.
inline void check_section_values(const NormScheme& scheme, const Subgroup& H, const MetricSpace& Q, const SectionFn& s,
                                 const SetSpec& orbit_under, std::int64_t orbit_radius, double radius,
                                 const std::function<void(const Element&, const Element&)>& extra = {}) {
  const Group& g = scheme.group();
  for (const auto& c : Q.window(radius)) {
    Element v = s.eval(c);
    if (H.canonical(v) != c)
      throw ConstructionError(s.name + " is not a section: it sends the coset " + g.format(c) + "H to " + g.format(v));
    if (extra) extra(c, v);
    OrbitTrace t = conj_orbit(scheme, v, orbit_under, orbit_radius);
    if (!t.stabilized) {
      std::string sizes;
      for (auto k : t.sizes) sizes += (sizes.empty() ? "" : ",") + std::to_string(k);
      throw ConstructionError("section value " + g.format(v) + " at coset " + g.format(c) +
                              "H fails the orbit test under " + orbit_under.name + " (orbit sizes " + sizes + ")");
    }
  }
}

}  // namespace detail

/// H x G/H -> G, (x, yH) -> s(yH) x, with inverse z -> (s(zH)^-1 z, zH).
/// Each checked section value must have a finite conjugation orbit under H.
inline WitnessRecipe t4_witness(const NormScheme& scheme, const Subgroup& H, SpacePtr quotient, const SectionFn& s,
                                const FactorizationOptions& opt = {}) {
  const Group g = scheme.group();
  detail::check_section_values(scheme, H, *quotient, s, detail::as_set(H), opt.orbit_radius, opt.check_radius);

  SpacePtr G = group_space(scheme);
  SpacePtr Hs = std::make_shared<SubsetSpace>(G, H.name, H.contains);
  SpacePtr X = std::make_shared<ProductSpace>(Hs, quotient);
  auto sec = s.eval;
  auto canon = H.canonical;
  auto f = [g, sec](const Element& p) {
    auto [x, c] = ProductSpace::split(p);
    return g.mul(sec(c), x);
  };
  auto inv = [g, sec, canon](const Element& z) {
    Element c = canon(z);
    return ProductSpace::pair(g.mul(g.inv(sec(c)), z), c);
  };
  WitnessRecipe r;
  r.tag = Construction::T4;
  r.name = "H x G/H -> G via s(yH) x";
  r.params = {{"group", g.to_string()}, {"subgroup", H.name}, {"section", s.name}};
  r.ingredients = {"group " + g.to_string(), "subgroup " + H.name, "section " + s.name, "quotient " + quotient->name()};
  r.bijective = true;
  r.R_x = opt.R_x;
  r.R_y = opt.R_y;
  r.deltas = opt.deltas;
  r.certificate.f = {"(x, yH) -> s(yH) x", X, G, f, inv, true};
  r.certificate.g = {"z -> (s(zH)^-1 z, zH)", G, X, inv, f, true};
  r.certificate.K = 0;
  return r;
}

/// H x G/H -> G, (x, yH) -> x s(yH)^-1, with inverse z -> (z s(z^-1 H), z^-1 H).
/// Needs a finite F with u^-1 H u in F H for the checked u (found by scanning
/// when not supplied), a symmetric A containing the section values, and
/// finite conjugation orbits under A.
inline WitnessRecipe t5_witness(const NormScheme& scheme, const Subgroup& H, SpacePtr quotient, const SectionFn& s,
                                const SetSpec& A, std::optional<std::vector<Element>> F = std::nullopt,
                                const FactorizationOptions& opt = {}) {
  const Group g = scheme.group();
  auto window = scheme.ball(opt.check_radius).elements;

  // Uniform quasi-normality on the window.
  std::vector<Element> fs;
  if (F) {
    fs = *F;
  } else if (g.is_abelian()) {
    fs = {g.identity()};
  } else {
    std::set<Element> acc;
    for (const auto& u : window) {
      auto rep = quasi_normality_witness(scheme, H, u);
      if (!rep.found) throw ConstructionError("no finite F found for " + g.format(u) + ": " + rep.detail);
      acc.insert(rep.classes.begin(), rep.classes.end());
    }
    fs.assign(acc.begin(), acc.end());
  }
  for (const auto& u : window)
    for (const auto& h : window) {
      if (!H.contains(h)) continue;
      Element c = g.conjugate(h, u);
      bool in = std::any_of(fs.begin(), fs.end(), [&](const Element& f) { return H.contains(g.mul(g.inv(f), c)); });
      if (!in)
        throw ConstructionError("missing F: " + g.format(u) + "^-1 " + g.format(h) + " " + g.format(u) +
                                " is outside F H");
    }

  for (const auto& a : window)
    if (A.contains(a) && !A.contains(g.inv(a)))
      throw ConstructionError(A.name + " is not symmetric at " + g.format(a));
  detail::check_section_values(scheme, H, *quotient, s, A, opt.orbit_radius, opt.check_radius,
                               [&](const Element& c, const Element& v) {
                                 if (!A.contains(v))
                                   throw ConstructionError("section value " + g.format(v) + " at coset " +
                                                           g.format(c) + "H is outside " + A.name);
                               });
  for (const auto& u : window) {
    OrbitTrace t = detail::conj_orbit(scheme, u, A, opt.orbit_radius);
    if (!t.stabilized)
      throw ConstructionError("no evidence that " + g.format(u) + " has a finite orbit under " + A.name);
  }

  SpacePtr G = group_space(scheme);
  SpacePtr Hs = std::make_shared<SubsetSpace>(G, H.name, H.contains);
  SpacePtr X = std::make_shared<ProductSpace>(Hs, quotient);
  auto sec = s.eval;
  auto canon = H.canonical;
  auto f = [g, sec](const Element& p) {
    auto [x, c] = ProductSpace::split(p);
    return g.mul(x, g.inv(sec(c)));
  };
  auto inv = [g, sec, canon](const Element& z) {
    Element c = canon(g.inv(z));
    return ProductSpace::pair(g.mul(z, sec(c)), c);
  };
  WitnessRecipe r;
  r.tag = Construction::T5;
  r.name = "H x G/H -> G via x s(yH)^-1";
  r.params = {{"group", g.to_string()}, {"subgroup", H.name}, {"section", s.name}, {"A", A.name},
              {"F", std::to_string(fs.size())}};
  r.ingredients = {"group " + g.to_string(), "subgroup " + H.name, "section " + s.name, "set " + A.name,
                   "quotient " + quotient->name()};
  r.bijective = true;
  r.R_x = opt.R_x;
  r.R_y = opt.R_y;
  r.deltas = opt.deltas;
  r.certificate.f = {"(x, yH) -> x s(yH)^-1", X, G, f, inv, true};
  r.certificate.g = {"z -> (z s(z^-1 H), z^-1 H)", G, X, inv, f, true};
  r.certificate.K = 0;
  return r;
}

// ---------------------------------------------------------------------------

/// Coordinatewise product of two recipes, on product spaces with the max metric.
inline WitnessRecipe product_witness(const WitnessRecipe& a, const WitnessRecipe& b) {
  const auto& ca = a.certificate;
  const auto& cb = b.certificate;
  SpacePtr X = std::make_shared<ProductSpace>(ca.f.domain, cb.f.domain);
  SpacePtr Y = std::make_shared<ProductSpace>(ca.f.codomain, cb.f.codomain);
  auto both = [](std::function<Element(const Element&)> p, std::function<Element(const Element&)> q) {
    return [p, q](const Element& z) {
      auto [u, v] = ProductSpace::split(z);
      return ProductSpace::pair(p(u), q(v));
    };
  };
  WitnessRecipe r;
  r.tag = Construction::Product;
  r.name = "(" + a.name + ") x (" + b.name + ")";
  r.ingredients = {a.name, b.name};
  r.bijective = a.bijective && b.bijective;
  r.R_x = std::min(a.R_x, b.R_x);
  r.R_y = std::min(a.R_y, b.R_y);
  r.deltas = a.deltas;
  r.certificate.f = {ca.f.name + " x " + cb.f.name, X, Y, both(ca.f.eval, cb.f.eval), {}, r.bijective};
  r.certificate.g = {ca.g.name + " x " + cb.g.name, Y, X, both(ca.g.eval, cb.g.eval), {}, r.bijective};
  if (r.bijective) {
    r.certificate.f.inverse = r.certificate.g.eval;
    r.certificate.g.inverse = r.certificate.f.eval;
  }
  r.certificate.K = std::max(ca.K, cb.K);
  if (ca.f_bound && cb.f_bound) {
    auto p = ca.f_bound, q = cb.f_bound;
    r.certificate.f_bound = [p, q](double d) { return std::max(p(d), q(d)); };
  }
  if (ca.g_bound && cb.g_bound) {
    auto p = ca.g_bound, q = cb.g_bound;
    r.certificate.g_bound = [p, q](double d) { return std::max(p(d), q(d)); };
  }
  return r;
}

namespace detail {

inline const GroupSpace& as_group_space(const SpacePtr& s, const std::string& what) {
  auto* g = dynamic_cast<const GroupSpace*>(s.get());
  if (!g) throw ConstructionError(what + " is not a group with a norm");
  return *g;
}

inline Group direct_sum(const std::vector<Group>& gs) {
  std::vector<Factor> fs;
  for (const auto& g : gs) fs.insert(fs.end(), g.factors().begin(), g.factors().end());
  return Group(fs);
}

// Splits an element of a direct sum into elements of the summands and back.
struct SumLayout {
  Group sum;
  std::vector<Group> parts;

  std::vector<Element> split(const Element& x) const {
    auto p = sum.parts(x);
    std::vector<Element> out;
    std::size_t at = 0;
    for (const auto& g : parts) {
      std::vector<std::vector<std::int64_t>> mine(p.begin() + static_cast<std::ptrdiff_t>(at),
                                                   p.begin() + static_cast<std::ptrdiff_t>(at + g.factor_count()));
      out.push_back(g.make(mine));
      at += g.factor_count();
    }
    return out;
  }
  Element join(const std::vector<Element>& xs) const {
    std::vector<std::vector<std::int64_t>> p;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      auto q = parts[i].parts(xs[i]);
      p.insert(p.end(), q.begin(), q.end());
    }
    return sum.make(p);
  }
};

}  // namespace detail

/// Coordinatewise product of identity-preserving bijective witnesses between
/// groups, as a map of direct sums. Norms default to the standard (sum) norms.
inline WitnessRecipe interleave_witness(const std::vector<WitnessRecipe>& coords,
                                        std::optional<NormScheme> domain_norm = std::nullopt,
                                        std::optional<NormScheme> codomain_norm = std::nullopt) {
  std::vector<Group> dom, cod;
  std::vector<std::function<Element(const Element&)>> fs, gs;
  std::string fname, gname;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto& c = coords[i].certificate;
    const Group& a = detail::as_group_space(c.f.domain, "coordinate domain").group();
    const Group& b = detail::as_group_space(c.f.codomain, "coordinate codomain").group();
    if (!coords[i].bijective) throw ConstructionError("coordinate " + std::to_string(i) + " is not bijective");
    if (c.f(a.identity()) != b.identity() || c.g(b.identity()) != a.identity())
      throw ConstructionError("coordinate " + std::to_string(i) + " (" + coords[i].name +
                              ") does not send the identity to the identity");
    dom.push_back(a);
    cod.push_back(b);
    fs.push_back(c.f.eval);
    gs.push_back(c.g.eval);
    fname += (i ? ", " : "") + c.f.name;
    gname += (i ? ", " : "") + c.g.name;
  }
  detail::SumLayout dl{detail::direct_sum(dom), dom};
  detail::SumLayout cl{detail::direct_sum(cod), cod};
  NormScheme dn = domain_norm ? *domain_norm : NormScheme::standard(dl.sum);
  NormScheme cn = codomain_norm ? *codomain_norm : NormScheme::standard(cl.sum);
  if (!(dn.group() == dl.sum) || !(cn.group() == cl.sum))
    throw DescriptorMismatch("interleave norms live on the wrong groups");
  auto apply = [](detail::SumLayout from, detail::SumLayout to, std::vector<std::function<Element(const Element&)>> m) {
    return [from, to, m](const Element& x) {
      auto xs = from.split(x);
      for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = m[i](xs[i]);
      return to.join(xs);
    };
  };
  SpacePtr X = group_space(dn);
  SpacePtr Y = group_space(cn);
  WitnessRecipe r;
  r.tag = Construction::Interleave;
  r.name = coords.empty() ? "singleton" : "coordinatewise (" + fname + ")";
  for (const auto& c : coords) r.ingredients.push_back(c.name);
  r.params = {{"coordinates", std::to_string(coords.size())}, {"domain", dl.sum.to_string()},
              {"codomain", cl.sum.to_string()}};
  r.bijective = true;
  r.R_x = r.R_y = 4;
  r.certificate.f = {"(" + fname + ")", X, Y, apply(dl, cl, fs), apply(cl, dl, gs), true};
  r.certificate.g = {"(" + gname + ")", Y, X, apply(cl, dl, gs), apply(dl, cl, fs), true};
  r.certificate.K = 0;
  return r;
}

// ---------------------------------------------------------------------------

namespace detail {

// Alternating merged tree over two chain spaces. Level k is an exact block of
// chain level levels[k].level on side levels[k].side (0 = X, 1 = Y); its other
// side is the union of its children's exact blocks. A node's exact block is
// cut into runs of level-(k-2) blocks, one run per child, and that run is the
// child's other side. Runs are balanced, except that the node containing both
// origins hands its first child the canonical count, so the origin nodes nest
// consistently through every level. Level-1 nodes map proportionally.
class MergedTree {
 public:
  struct Level {
    int side;
    std::int64_t level;
    std::int64_t size;
    std::int64_t canon;
  };

  MergedTree(std::shared_ptr<const SubgroupChain> x, std::shared_ptr<const SubgroupChain> y, double grow,
             std::int64_t max_size = 1'000'000'000'000'000)
      : chains_{std::move(x), std::move(y)}, grow_(grow) {
    levels_.push_back({0, 0, 1, 1});
    std::int64_t last[2] = {0, 0};
    while (levels_.back().size < max_size) {
      int side = 1 - levels_.back().side;
      double target = grow_ * static_cast<double>(levels_.back().size);
      std::int64_t l = last[side];
      std::int64_t s = 0;
      try {
        while ((s = chains_[side]->size(l)) < target) {
          if (++l > 400) throw LevelOverflow(l);
        }
      } catch (const ArithmeticOverflow&) {
        break;
      }
      last[side] = l;
      auto prev = static_cast<double>(levels_.back().size);
      levels_.push_back({side, l, s, std::max<std::int64_t>(1, std::llround(static_cast<double>(s) / prev))});
    }
  }

  const std::vector<Level>& levels() const { return levels_; }
  double grow() const { return grow_; }

  /// Index on the other side paired with point `idx` on `side`.
  std::uint64_t map(int side, std::uint64_t idx) const {
    auto p = static_cast<std::int64_t>(idx);
    std::size_t k = root(side, p);
    std::int64_t q = levels_[k].canon, ex = 0, ot = 0;
    bool origin = true;
    for (; k > 1; --k) {
      std::int64_t c;
      if (levels_[k].side == side) {
        c = child_of_unit(k, q, origin, (p - ex) / unit(k));
      } else {
        c = (p - ot) / levels_[k - 1].size;
      }
      std::int64_t run = run_length(k, q, origin, c);
      std::int64_t nex = ot + c * levels_[k - 1].size;
      std::int64_t nother = ex + prefix(k, q, origin, c) * unit(k);
      ex = nex;
      ot = nother;
      q = run;
      origin = origin && c == 0;
    }
    const std::int64_t E = levels_[1].size;
    if (levels_[1].side == side) return static_cast<std::uint64_t>(ot + (p - ex) * q / E);
    return static_cast<std::uint64_t>(ex + (p - ot) * E / q);
  }

  /// Checks every split reachable below the origin node covering both windows.
  std::optional<std::string> infeasibility(std::int64_t cover_x, std::int64_t cover_y) const {
    std::size_t K;
    try {
      K = std::max(root(0, cover_x - 1), root(1, cover_y - 1));
    } catch (const Error& e) {
      return std::string(e.what());
    }
    std::set<std::pair<std::int64_t, bool>> cur{{levels_[K].canon, true}};
    for (std::size_t k = K; k > 1; --k) {
      std::set<std::pair<std::int64_t, bool>> next;
      for (auto [q, origin] : cur) {
        if (!splittable(k, q, origin))
          return "merged level " + std::to_string(k) + " cannot split " + std::to_string(unit_count(k)) +
                 " blocks into " + std::to_string(q) + " runs";
        for (std::int64_t c : {std::int64_t{0}, std::int64_t{1}, q - 1})
          if (c >= 0 && c < q) next.insert({run_length(k, q, origin, c), origin && c == 0});
      }
      cur = std::move(next);
    }
    for (auto [q, origin] : cur)
      if (q < 1) return std::string("empty level-1 node");
    return std::nullopt;
  }

  /// Bound on the image distance of points within delta on `side`.
  double bound(int side, double delta) const {
    if (delta < 1) return 0;
    for (std::size_t k = 0; k + 1 < levels_.size(); ++k)
      if (levels_[k].side == side && static_cast<double>(levels_[k].level) >= std::floor(delta))
        return static_cast<double>(levels_[k + 1].level);
    return std::numeric_limits<double>::infinity();
  }

  /// Both round trips stay inside a level-1 node.
  double round_trip_bound() const {
    return static_cast<double>(std::max(levels_.at(1).level, levels_.at(2).level));
  }

 private:
  std::size_t root(int side, std::int64_t p) const {
    for (std::size_t k = 1; k < levels_.size(); ++k)
      if (levels_[k].side == side && p < levels_[k].size && k >= 2) return k;
    throw LevelOverflow(static_cast<std::int64_t>(levels_.size()));
  }
  std::int64_t unit(std::size_t k) const { return k >= 2 ? levels_[k - 2].size : 1; }
  std::int64_t unit_count(std::size_t k) const { return levels_[k].size / unit(k); }

  bool splittable(std::size_t k, std::int64_t q, bool origin) const {
    std::int64_t U = unit_count(k);
    if (q < 1) return false;
    if (!origin) return U >= q;
    std::int64_t first = levels_[k - 1].canon;
    if (q == 1) return U == first;
    return U - first >= q - 1;
  }
  // Runs after the first fixed one (origin) or all runs: `count` runs over
  // `total` blocks, the first `total % count` one longer.
  static std::int64_t even_run(std::int64_t total, std::int64_t count, std::int64_t i) {
    return total / count + (i < total % count ? 1 : 0);
  }
  static std::int64_t even_prefix(std::int64_t total, std::int64_t count, std::int64_t i) {
    return i * (total / count) + std::min(i, total % count);
  }
  void require(std::size_t k, std::int64_t q, bool origin) const {
    if (!splittable(k, q, origin))
      throw ConstructionError("merged level " + std::to_string(k) + " cannot split " +
                              std::to_string(unit_count(k)) + " blocks into " + std::to_string(q) + " runs");
  }
  std::int64_t run_length(std::size_t k, std::int64_t q, bool origin, std::int64_t c) const {
    require(k, q, origin);
    std::int64_t U = unit_count(k);
    if (!origin) return even_run(U, q, c);
    std::int64_t first = levels_[k - 1].canon;
    return c == 0 ? first : even_run(U - first, q - 1, c - 1);
  }
  std::int64_t prefix(std::size_t k, std::int64_t q, bool origin, std::int64_t c) const {
    std::int64_t U = unit_count(k);
    if (!origin) return even_prefix(U, q, c);
    std::int64_t first = levels_[k - 1].canon;
    return c == 0 ? 0 : first + even_prefix(U - first, q - 1, c - 1);
  }
  std::int64_t child_of_unit(std::size_t k, std::int64_t q, bool origin, std::int64_t u) const {
    require(k, q, origin);
    std::int64_t U = unit_count(k);
    std::int64_t base = 0, total = U, count = q;
    if (origin) {
      std::int64_t first = levels_[k - 1].canon;
      if (u < first) return 0;
      u -= first;
      base = 1;
      total = U - first;
      count = q - 1;
    }
    std::int64_t b = total / count, r = total % count;
    if (u < r * (b + 1)) return base + u / (b + 1);
    return base + r + (u - r * (b + 1)) / b;
  }

  std::shared_ptr<const SubgroupChain> chains_[2];
  double grow_;
  std::vector<Level> levels_;
};

inline const SubgroupChain& chain_of(const std::shared_ptr<const CosetSpace>& s) {
  if (s->variant() != CosetSpace::Variant::ChainUltra || !s->chain())
    throw ConstructionError("chain matching needs chain ultra-metric spaces");
  return *s->chain();
}

inline std::int64_t largest_level_within(const SubgroupChain& ch, std::int64_t requested, std::int64_t max_points) {
  std::int64_t l = 0;
  while (l < requested) {
    if (ch.bounded() && l >= ch.depth()) break;
    std::int64_t s;
    try {
      s = ch.size(l + 1);
    } catch (const ArithmeticOverflow&) {
      break;
    }
    if (s > max_points) break;
    ++l;
  }
  return l;
}

}  // namespace detail

struct ChainMatchOptions {
  std::int64_t levels = 12;            // requested window, in chain levels, on both sides
  std::int64_t max_window_points = 5040;  // a side's window is cut to the largest level of at most this size
  std::vector<double> deltas{1, 2, 3, 4, 5, 6};
};

/// Coarse equivalence between two chain ultra-metric spaces with finite
/// levels. Spaces with the same level sizes are matched by index, which is an
/// isometry. Otherwise the alternating merged tree gives a surjection in each
/// direction; both round trips stay in one level-1 node.
inline WitnessRecipe chain_match_witness(const std::shared_ptr<const CosetSpace>& U,
                                         const std::shared_ptr<const CosetSpace>& V,
                                         const ChainMatchOptions& opt = {}) {
  auto cx = std::make_shared<const SubgroupChain>(detail::chain_of(U));
  auto cy = std::make_shared<const SubgroupChain>(detail::chain_of(V));
  if (cx->bounded() != cy->bounded())
    throw ConstructionError("not matchable: " + std::string(cx->bounded() ? U->name() : V->name()) +
                            " is bounded and the other space is not");
  WitnessRecipe r;
  r.tag = Construction::ChainMatch;
  r.name = U->name() + " ~ " + V->name();
  r.ingredients = {U->name(), V->name()};
  r.deltas = opt.deltas;
  std::int64_t lx = detail::largest_level_within(*cx, opt.levels, opt.max_window_points);
  std::int64_t ly = detail::largest_level_within(*cy, opt.levels, opt.max_window_points);
  r.R_x = static_cast<double>(lx);
  r.R_y = static_cast<double>(ly);

  bool same = true;
  if (cx->bounded()) {
    same = cx->size(cx->depth()) == cy->size(cy->depth());
  } else {
    for (std::int64_t n = 0; n <= 40 && same; ++n) {
      try {
        same = cx->size(n) == cy->size(n);
      } catch (const ArithmeticOverflow&) {
        break;
      }
    }
  }

  std::function<Element(const Element&)> f, g;
  if (same) {
    f = [cx, cy](const Element& x) { return cy->decode(cx->encode(x)); };
    g = [cx, cy](const Element& y) { return cx->decode(cy->encode(y)); };
    r.bijective = true;
    r.certificate.K = 0;
    r.certificate.f_bound = r.certificate.g_bound = [](double d) { return std::floor(d); };
    r.params = {{"method", "index"}};
  } else if (cx->bounded()) {
    // Two finite spaces: proportional index maps; every modulus is bounded by the diameters.
    auto nx = static_cast<std::uint64_t>(cx->size(cx->depth()));
    auto ny = static_cast<std::uint64_t>(cy->size(cy->depth()));
    f = [cx, cy, nx, ny](const Element& x) { return cy->decode(cx->encode(x) * ny / nx); };
    g = [cx, cy, nx, ny](const Element& y) { return cx->decode(cy->encode(y) * nx / ny); };
    r.certificate.K = static_cast<double>(std::max(cx->depth(), cy->depth()));
    r.params = {{"method", "proportional"}};
  } else {
    std::shared_ptr<const detail::MergedTree> tree;
    std::string why;
    std::int64_t cover_x = cx->size(lx), cover_y = cy->size(ly);
    for (double grow : {4.0, 8.0, 16.0, 2.0, 32.0}) {
      auto t = std::make_shared<const detail::MergedTree>(cx, cy, grow);
      auto bad = t->infeasibility(cover_x, cover_y);
      if (!bad) {
        tree = t;
        break;
      }
      why = *bad;
    }
    if (!tree) throw ConstructionError("no merged tree found for the windows: " + why);
    f = [cx, cy, tree](const Element& x) { return cy->decode(tree->map(0, cx->encode(x))); };
    g = [cx, cy, tree](const Element& y) { return cx->decode(tree->map(1, cy->encode(y))); };
    r.certificate.K = tree->round_trip_bound();
    r.certificate.f_bound = [tree](double d) { return tree->bound(0, d); };
    r.certificate.g_bound = [tree](double d) { return tree->bound(1, d); };
    r.params = {{"method", "merged tree"}, {"growth", std::to_string(static_cast<int>(tree->grow()))}};
    const auto& lv = tree->levels();
    for (std::size_t k = 0; k < lv.size(); ++k) {
      r.table.push_back({static_cast<std::int64_t>(k), lv[k].side, lv[k].level, lv[k].size, lv[k].canon});
      if (lv[k].size > std::max(cover_x, cover_y)) break;
    }
  }
  r.params.push_back({"window_x_levels", std::to_string(lx)});
  r.params.push_back({"window_y_levels", std::to_string(ly)});
  r.certificate.f = {"chain match", U, V, f, r.bijective ? g : nullptr, r.bijective};
  r.certificate.g = {"chain match back", V, U, g, r.bijective ? f : nullptr, r.bijective};
  return r;
}


// ---------------------------------------------------------------------------

/// Identity of a space as a recipe.
inline WitnessRecipe identity_witness(const SpacePtr& s, double R = 6) {
  WitnessRecipe r;
  r.tag = Construction::Product;
  r.name = "identity of " + s->name();
  r.bijective = true;
  r.R_x = r.R_y = R;
  r.certificate.f = identity_map(s);
  r.certificate.g = identity_map(s);
  r.certificate.K = 0;
  r.certificate.f_bound = r.certificate.g_bound = [](double d) { return std::floor(d); };
  return r;
}

struct Classification {
  std::optional<std::int64_t> r0;  // nullopt: infinite rank
  bool finitely_generated = false;
  std::string target;
  std::vector<WitnessRecipe> stages;  // applied in order, each verifiable on its own
};

namespace detail {

// Positions of the free factors, of Z^inf, and of the torsion factors.
struct Split {
  Group g;
  std::vector<std::size_t> free, free_inf, torsion;

  explicit Split(Group group) : g(std::move(group)) {
    for (std::size_t i = 0; i < g.factor_count(); ++i) {
      switch (g.factors()[i].kind) {
        case FactorKind::Free: free.push_back(i); break;
        case FactorKind::FreeInf: free_inf.push_back(i); break;
        case FactorKind::Unitriangular: throw DescriptorMismatch("classification needs an abelian group");
        default: torsion.push_back(i);
      }
    }
  }
  Group sub(const std::vector<std::size_t>& idx) const {
    std::vector<Factor> fs;
    for (auto i : idx) fs.push_back(g.factors()[i]);
    return Group(fs);
  }
  Element take(const Element& x, const std::vector<std::size_t>& idx) const {
    auto p = g.parts(x);
    std::vector<std::vector<std::int64_t>> q;
    for (auto i : idx) q.push_back(p[i]);
    return sub(idx).make(q);
  }
  // Inverse of take over a partition of the factors.
  Element put(const std::vector<std::pair<const std::vector<std::size_t>*, Element>>& pieces) const {
    auto p = g.parts(g.identity());
    for (const auto& [idx, e] : pieces) {
      auto q = sub(*idx).parts(e);
      for (std::size_t k = 0; k < idx->size(); ++k) p[(*idx)[k]] = q[k];
    }
    return g.make(p);
  }
};

inline std::string target_name(std::int64_t r0, bool qz) {
  std::string z = r0 == 0 ? "" : r0 == 1 ? "Z" : "Z^" + std::to_string(r0);
  if (!qz) return z.empty() ? "0" : z;
  return z.empty() ? "Q/Z" : z + " + Q/Z";
}

inline WitnessRecipe projection_stage(const Split& s, std::int64_t r0) {
  Group Z = s.sub(s.free), T = s.sub(s.torsion);
  SpacePtr X = group_space(s.g), Y = group_space(Z);
  std::int64_t diam = 0;
  for (const auto& f : T.factors()) diam += f.param / 2;
  WitnessRecipe r;
  r.tag = Construction::Projection;
  r.name = "projection " + s.g.to_string() + " -> " + target_name(r0, false);
  r.R_x = r.R_y = 6;
  r.params = {{"torsion", T.to_string()}, {"torsion_diameter", std::to_string(diam)}};
  auto f = [s](const Element& x) { return s.take(x, s.free); };
  auto g = [s, T](const Element& z) { return s.put({{&s.free, z}, {&s.torsion, T.identity()}}); };
  r.certificate.f = {"drop torsion", X, Y, f, {}, false};
  r.certificate.g = {"include", Y, X, g, {}, false};
  r.certificate.K = static_cast<double>(diam);
  r.certificate.f_bound = r.certificate.g_bound = [](double d) { return std::floor(d); };
  return r;
}

// Z^inf coordinate k carries the torsion digit of level k+1: t = index(k+1) w + digit.
inline WitnessRecipe pairing_stage(const Split& s) {
  Group Zm = s.sub(s.free), T = s.sub(s.torsion);
  Group target = Group::parse("Z^inf");
  auto chain = std::make_shared<const SubgroupChain>(SubgroupChain::exhaustion(T));
  auto m = static_cast<std::int64_t>(s.free.size());
  // Two Z^inf factors are folded by alternating their coordinates.
  auto n_inf = static_cast<std::int64_t>(s.free_inf.size());
  auto f = [s, chain, n_inf, target](const Element& x) {
    auto p = s.g.parts(x);
    std::vector<std::int64_t> out;
    for (auto i : s.free) out.push_back(p[i][0]);
    std::size_t len = 0;
    for (auto i : s.free_inf) len = std::max(len, p[i].size());
    Element t = s.take(x, s.torsion);
    std::uint64_t idx = chain->encode(t);
    len = std::max<std::size_t>(len, static_cast<std::size_t>(chain->level(t)));
    for (std::size_t k = 0; k < len; ++k) {
      auto radix = chain->index(static_cast<std::int64_t>(k) + 1);
      auto digit = static_cast<std::int64_t>(idx % static_cast<std::uint64_t>(radix));
      idx /= static_cast<std::uint64_t>(radix);
      for (std::int64_t j = 0; j < n_inf; ++j) {
        const auto& w = p[s.free_inf[static_cast<std::size_t>(j)]];
        std::int64_t wk = k < w.size() ? w[k] : 0;
        out.push_back(j == 0 ? checked::add(checked::mul(radix, wk), digit) : wk);
      }
    }
    while (!out.empty() && out.back() == 0) out.pop_back();
    return target.make({out});
  };
  auto g = [s, chain, m, n_inf, target, T](const Element& y) {
    auto c = target.parts(y)[0];
    auto at = [&](std::size_t k) { return k < c.size() ? c[k] : 0; };
    auto p = s.g.parts(s.g.identity());
    for (std::int64_t j = 0; j < m; ++j) p[s.free[static_cast<std::size_t>(j)]] = {at(static_cast<std::size_t>(j))};
    std::size_t rest = c.size() > static_cast<std::size_t>(m) ? c.size() - static_cast<std::size_t>(m) : 0;
    std::size_t levels = (rest + static_cast<std::size_t>(n_inf) - 1) / static_cast<std::size_t>(n_inf);
    std::vector<std::vector<std::int64_t>> ws(static_cast<std::size_t>(n_inf));
    std::uint64_t idx = 0, place = 1;
    for (std::size_t k = 0; k < levels; ++k) {
      auto radix = chain->index(static_cast<std::int64_t>(k) + 1);
      for (std::int64_t j = 0; j < n_inf; ++j) {
        std::int64_t v = at(static_cast<std::size_t>(m) + k * static_cast<std::size_t>(n_inf) + static_cast<std::size_t>(j));
        if (j == 0) {
          std::int64_t d = checked::mod(v, radix);
          if (d != 0) idx += static_cast<std::uint64_t>(d) * place;
          v = checked::floor_div(v, radix);
        }
        ws[static_cast<std::size_t>(j)].push_back(v);
      }
      if (radix > 1) {
        if (place > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(radix))
          throw ArithmeticOverflow("pairing index");
        place *= static_cast<std::uint64_t>(radix);
      }
    }
    for (std::int64_t j = 0; j < n_inf; ++j) {
      auto& w = ws[static_cast<std::size_t>(j)];
      while (!w.empty() && w.back() == 0) w.pop_back();
      p[s.free_inf[static_cast<std::size_t>(j)]] = w;
    }
    Element t = chain->decode(idx);
    auto tp = T.parts(t);
    for (std::size_t k = 0; k < s.torsion.size(); ++k) p[s.torsion[k]] = tp[k];
    return s.g.make(p);
  };
  SpacePtr X = group_space(s.g), Y = group_space(target);
  WitnessRecipe r;
  r.tag = Construction::Pairing;
  r.name = "pairing " + s.g.to_string() + " -> Z^inf";
  r.bijective = true;
  r.R_x = r.R_y = 6;
  r.deltas = {1, 2};
  r.params = {{"free", Zm.to_string()}, {"torsion", T.to_string()}};
  r.certificate.f = {"fold torsion digits into Z^inf", X, Y, f, g, true};
  r.certificate.g = {"unfold", Y, X, g, f, true};
  r.certificate.K = 0;
  return r;
}

}  // namespace detail

/// Coarse classification of an abelian group given by its descriptor: Z^r0
/// when finitely generated, Z^r0 + Q/Z otherwise, Z^inf at infinite rank.
inline Classification classification_witness(const Group& g, const ChainMatchOptions& match = {}) {
  if (!g.is_abelian()) throw DescriptorMismatch("classification needs an abelian group, got " + g.to_string());
  detail::Split s(g);
  Classification c;
  c.r0 = g.torsion_free_rank();
  c.finitely_generated = g.finitely_generated();
  if (!c.r0) {
    c.target = "Z^inf";
    c.stages.push_back(detail::pairing_stage(s));
    return c;
  }
  std::int64_t r0 = *c.r0;
  if (c.finitely_generated) {
    c.target = detail::target_name(r0, false);
    c.stages.push_back(detail::projection_stage(s, r0));
    return c;
  }
  c.target = detail::target_name(r0, true);
  Group Z = s.sub(s.free), T = s.sub(s.torsion);
  auto tspace = std::make_shared<const CosetSpace>(SubgroupChain::exhaustion(T));
  auto qz = std::make_shared<const CosetSpace>(SubgroupChain::exhaustion(Group::parse("Q/Z")));
  SpacePtr X = group_space(g);
  SpacePtr zspace = group_space(Z);
  SpacePtr Y = r0 == 0 ? SpacePtr(tspace) : SpacePtr(std::make_shared<ProductSpace>(zspace, tspace));

  WitnessRecipe change;
  change.tag = Construction::MetricChange;
  change.name = "norm of " + g.to_string() + " -> " + (r0 ? Z.to_string() + " x " : std::string()) + "chain metric on " +
                T.to_string();
  change.bijective = true;
  change.R_x = 8;
  change.R_y = 6;
  change.deltas = {1, 2, 3};
  std::function<Element(const Element&)> f, back;
  if (r0 == 0) {
    f = [s](const Element& x) { return s.take(x, s.torsion); };
    back = [s](const Element& y) { return s.put({{&s.torsion, y}}); };
  } else {
    f = [s](const Element& x) { return ProductSpace::pair(s.take(x, s.free), s.take(x, s.torsion)); };
    back = [s](const Element& y) {
      auto [a, b] = ProductSpace::split(y);
      return s.put({{&s.free, a}, {&s.torsion, b}});
    };
  }
  change.certificate.f = {"regroup", X, Y, f, back, true};
  change.certificate.g = {"regroup back", Y, X, back, f, true};
  change.certificate.K = 0;
  // Chain level never exceeds the norm of a locally finite factor.
  change.certificate.f_bound = [](double d) { return std::floor(d); };
  c.stages.push_back(change);

  WitnessRecipe cm = chain_match_witness(tspace, qz, match);
  if (r0 == 0) {
    c.stages.push_back(cm);
  } else {
    WitnessRecipe p = product_witness(identity_witness(zspace), cm);
    p.R_x = p.R_y = 4;
    p.deltas = {1, 2};
    c.stages.push_back(p);
  }
  return c;
}

inline Classification classification_witness(const std::string& descriptor, const ChainMatchOptions& match = {}) {
  return classification_witness(Group::parse(descriptor), match);
}

}  // namespace coarse
