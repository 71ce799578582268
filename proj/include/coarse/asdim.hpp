#pragma once

// Asymptotic dimension at a fixed scale: colored covers, their exact
// verifier, constructions for Z^m and chain spaces, and an exhaustive search
// for the least number of colors on small spaces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "coarse/chain.hpp"
#include "coarse/error.hpp"
#include "coarse/groups.hpp"
#include "coarse/metrics.hpp"
#include "coarse/quotients.hpp"
#include "coarse/spaces.hpp"

namespace coarse {

namespace detail {

// Cubical grid of side L in R^dims. A point with exactly k coordinates near
// the grid (k-th smallest distance below radii[k], and no larger k qualifying)
// gets color k; its piece is fixed by which coordinates those are, the grid
// values they are near, and the cells of the others. radii grow by D per
// step and L >= 2 radii[dims] + D, which keeps each color D-discrete in l-inf.
struct GridRule {
  std::size_t dims = 0;
  double L = 1;
  std::vector<double> radii;  // radii[k] for k = 1..dims
  double offset = 0;

  std::pair<int, std::vector<std::int64_t>> classify(const std::vector<double>& y) const {
    std::vector<double> u(dims), t(dims);
    std::vector<std::int64_t> g(dims);
    for (std::size_t i = 0; i < dims; ++i) {
      u[i] = y[i] - offset;
      g[i] = static_cast<std::int64_t>(std::floor(u[i] / L + 0.5));
      t[i] = std::abs(u[i] - static_cast<double>(g[i]) * L);
    }
    std::vector<std::size_t> order(dims);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return t[a] != t[b] ? t[a] < t[b] : a < b;
    });
    std::size_t k = 0;
    for (std::size_t j = dims; j >= 1; --j)
      if (t[order[j - 1]] < radii[j]) {
        k = j;
        break;
      }
    std::vector<bool> near(dims, false);
    for (std::size_t j = 0; j < k; ++j) near[order[j]] = true;
    std::vector<std::int64_t> key{static_cast<std::int64_t>(k)};
    for (std::size_t i = 0; i < dims; ++i) {
      key.push_back(near[i] ? 1 : 0);
      key.push_back(near[i] ? g[i] : static_cast<std::int64_t>(std::floor(u[i] / L)));
    }
    return {static_cast<int>(k), key};
  }
};

// One dimension: alternating intervals [2Dk, 2Dk + 2D - 1]. Higher: the
// skeleton rule with radii kD and side (2 dims + 1) D.
inline GridRule grid_rule(std::size_t dims, double D) {
  GridRule r;
  r.dims = dims;
  r.radii.assign(dims + 1, 0);
  if (dims == 1) {
    r.L = 4 * D;
    r.radii[1] = D;
    r.offset = 3 * D - 0.5;
    return r;
  }
  for (std::size_t k = 1; k <= dims; ++k) r.radii[k] = static_cast<double>(k) * D;
  r.L = static_cast<double>(2 * dims + 1) * D;
  return r;
}

}  // namespace detail

/// Pieces and ambient set are index lists into one point table; a piece may
/// contain points outside the ambient set.
struct ColoredCover {
  SpacePtr space;
  std::vector<Element> points;
  std::vector<std::uint32_t> ambient;
  std::vector<std::vector<std::uint32_t>> pieces;
  std::vector<int> colors;
  double D = 0;
  double mesh = 0;  // filled in by verification
  std::string construction;
  // Grid covers of Z^m remember their rule so products can rebuild one.
  std::shared_ptr<const detail::GridRule> grid;
  std::function<std::vector<double>(const Element&)> coords;

  int color_count() const { return static_cast<int>(std::set<int>(colors.begin(), colors.end()).size()); }
  std::vector<Element> piece_points(std::size_t i) const {
    std::vector<Element> out;
    for (auto k : pieces[i]) out.push_back(points[k]);
    return out;
  }
};

struct CoverVerdict {
  bool pass = false;
  bool covered = false;
  double mesh = 0;
  int colors = 0;
  std::size_t pieces = 0;
  std::string reason;
  std::optional<std::pair<Element, Element>> offending;
};

namespace detail {

inline bool is_l1_lattice(const MetricSpace& s) {
  auto* g = dynamic_cast<const GroupSpace*>(&s);
  if (!g || g->scheme().kind() != NormScheme::Kind::Standard) return false;
  const auto& fs = g->group().factors();
  return std::all_of(fs.begin(), fs.end(), [](const Factor& f) { return f.kind == FactorKind::Free; });
}

inline double l1_diameter(const ColoredCover& c, const std::vector<std::uint32_t>& piece, std::size_t m) {
  if (piece.size() < 2 || m == 0) return 0;
  std::int64_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << (m - 1)); ++mask) {
    std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = std::numeric_limits<std::int64_t>::min();
    for (auto k : piece) {
      const auto& x = c.points[k].c;
      std::int64_t v = x[0];
      for (std::size_t i = 1; i < m; ++i) v += (mask >> (i - 1) & 1u) ? -x[i] : x[i];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    best = std::max(best, hi - lo);
  }
  return static_cast<double>(best);
}

inline double brute_diameter(const ColoredCover& c, const std::vector<std::uint32_t>& piece) {
  double d = 0;
  for (std::size_t i = 0; i < piece.size(); ++i)
    for (std::size_t j = i + 1; j < piece.size(); ++j)
      d = std::max(d, c.space->distance(c.points[piece[i]], c.points[piece[j]]));
  return d;
}

// Offsets of l1 norm 1..r whose first nonzero coordinate is positive.
inline std::vector<std::vector<std::int64_t>> half_l1_ball(std::size_t m, std::int64_t r) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> cur(m, 0);
  std::function<void(std::size_t, std::int64_t, bool)> rec = [&](std::size_t i, std::int64_t left, bool positive) {
    if (i == m) {
      if (positive) out.push_back(cur);
      return;
    }
    for (std::int64_t v = positive ? -left : 0; v <= left; ++v) {
      cur[i] = v;
      rec(i + 1, left - std::abs(v), positive || v > 0);
    }
    cur[i] = 0;
  };
  rec(0, r, false);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    std::int64_t la = 0, lb = 0;
    for (auto x : a) la += std::abs(x);
    for (auto x : b) lb += std::abs(x);
    return la < lb;
  });
  return out;
}

// Same-color pieces on Z^m with the l1 norm, through a dense grid per color.
// Returns false when the bounding box is too large for the grid.
inline bool l1_separation(const ColoredCover& c, std::size_t m, CoverVerdict& v) {
  const auto r = static_cast<std::int64_t>(std::ceil(c.D)) - 1;
  auto offsets = half_l1_ball(m, std::max<std::int64_t>(r, 0));
  for (int color : std::set<int>(c.colors.begin(), c.colors.end())) {
    std::vector<std::int64_t> lo(m, std::numeric_limits<std::int64_t>::max()),
        hi(m, std::numeric_limits<std::int64_t>::min());
    for (std::size_t p = 0; p < c.pieces.size(); ++p) {
      if (c.colors[p] != color) continue;
      for (auto k : c.pieces[p])
        for (std::size_t i = 0; i < m; ++i) {
          lo[i] = std::min(lo[i], c.points[k].c[i]);
          hi[i] = std::max(hi[i], c.points[k].c[i]);
        }
    }
    double volume = 1;
    std::vector<std::int64_t> stride(m, 1);
    for (std::size_t i = m; i-- > 0;) {
      if (i + 1 < m) stride[i] = stride[i + 1] * (hi[i + 1] - lo[i + 1] + 1);
      volume *= static_cast<double>(hi[i] - lo[i] + 1);
    }
    if (volume > 6.4e7) return false;
    std::vector<std::int32_t> owner(static_cast<std::size_t>(volume), -1);
    auto cell = [&](const std::vector<std::int64_t>& x) {
      std::int64_t idx = 0;
      for (std::size_t i = 0; i < m; ++i) idx += (x[i] - lo[i]) * stride[i];
      return static_cast<std::size_t>(idx);
    };
    for (std::size_t p = 0; p < c.pieces.size(); ++p) {
      if (c.colors[p] != color) continue;
      for (auto k : c.pieces[p]) {
        auto& o = owner[cell(c.points[k].c)];
        if (o >= 0 && o != static_cast<std::int32_t>(p)) {
          v.reason = "pieces " + std::to_string(o) + " and " + std::to_string(p) + " of color " +
                     std::to_string(color) + " share a point";
          v.offending = {{c.points[k], c.points[k]}};
          return true;
        }
        o = static_cast<std::int32_t>(p);
      }
    }
    if (r < 1) continue;
    std::vector<std::int64_t> q(m);
    std::int64_t best = r + 1;
    for (std::size_t p = 0; p < c.pieces.size(); ++p) {
      if (c.colors[p] != color) continue;
      for (auto k : c.pieces[p]) {
        const auto& x = c.points[k].c;
        for (const auto& off : offsets) {
          std::int64_t len = 0;
          for (auto o : off) len += std::abs(o);
          if (len >= best) break;
          bool inside = true;
          for (std::size_t i = 0; i < m && inside; ++i) {
            q[i] = x[i] + off[i];
            inside = q[i] >= lo[i] && q[i] <= hi[i];
          }
          if (!inside) continue;
          std::int32_t o = owner[cell(q)];
          if (o >= 0 && o != static_cast<std::int32_t>(p)) {
            best = len;
            v.reason = "pieces " + std::to_string(p) + " and " + std::to_string(o) + " of color " +
                       std::to_string(color) + " are at distance " + std::to_string(len) + " < D";
            v.offending = {{c.points[k], Element{q}}};
            break;
          }
        }
      }
    }
    if (v.offending) return true;
  }
  return true;
}

inline std::string number(double d) {
  std::ostringstream o;
  o << d;
  return o.str();
}

inline void generic_separation(const ColoredCover& c, CoverVerdict& v) {
  std::map<Element, std::vector<std::uint32_t>> owners;
  for (std::size_t p = 0; p < c.pieces.size(); ++p)
    for (auto k : c.pieces[p]) owners[c.points[k]].push_back(static_cast<std::uint32_t>(p));
  double best = c.D;
  for (std::size_t p = 0; p < c.pieces.size(); ++p)
    for (auto k : c.pieces[p]) {
      const Element& x = c.points[k];
      for (const auto& y : c.space->near(x, c.D)) {
        auto it = owners.find(y);
        if (it == owners.end()) continue;
        for (auto o : it->second) {
          if (o == p || c.colors[o] != c.colors[p]) continue;
          double d = c.space->distance(x, y);
          if (d < best) {
            best = d;
            v.reason = "pieces " + std::to_string(p) + " and " + std::to_string(o) + " of color " +
                       std::to_string(c.colors[p]) + " are at distance " + detail::number(d) + " < D";
            v.offending = {{x, y}};
          }
        }
      }
    }
}

}  // namespace detail

/// Coverage, mesh and same-color separation, all checked exactly.
inline CoverVerdict verify_cover(const ColoredCover& c) {
  CoverVerdict v;
  v.colors = c.color_count();
  v.pieces = c.pieces.size();
  if (c.pieces.size() != c.colors.size()) {
    v.reason = "every piece needs one color";
    return v;
  }
  std::vector<char> in(c.points.size(), 0);
  for (const auto& p : c.pieces)
    for (auto k : p) in.at(k) = 1;
  for (auto a : c.ambient)
    if (!in.at(a)) {
      v.reason = "point " + c.space->format(c.points[a]) + " is not covered";
      v.offending = {{c.points[a], c.points[a]}};
      return v;
    }
  v.covered = true;

  const bool lattice = detail::is_l1_lattice(*c.space);
  const std::size_t m = lattice ? dynamic_cast<const GroupSpace&>(*c.space).group().factor_count() : 0;
  for (const auto& p : c.pieces) {
    double d = lattice ? detail::l1_diameter(c, p, m) : detail::brute_diameter(c, p);
    v.mesh = std::max(v.mesh, d);
  }
  if (!std::isfinite(v.mesh)) {
    v.reason = "mesh is infinite";
    return v;
  }
  if (!(lattice && detail::l1_separation(c, m, v))) detail::generic_separation(c, v);
  v.pass = v.reason.empty();
  if (v.pass) v.reason = "ok";
  return v;
}

namespace detail {

inline ColoredCover cover_by_key(SpacePtr space, std::vector<Element> points, double D,
                                 const std::function<std::pair<int, std::vector<std::int64_t>>(const Element&)>& key) {
  ColoredCover c;
  c.space = std::move(space);
  c.D = D;
  c.points = std::move(points);
  c.ambient.resize(c.points.size());
  std::iota(c.ambient.begin(), c.ambient.end(), 0u);
  std::map<std::vector<std::int64_t>, std::size_t> index;
  for (std::uint32_t k = 0; k < c.points.size(); ++k) {
    auto [color, kv] = key(c.points[k]);
    auto [it, fresh] = index.emplace(std::move(kv), c.pieces.size());
    if (fresh) {
      c.pieces.emplace_back();
      c.colors.push_back(color);
    }
    c.pieces[it->second].push_back(k);
  }
  return c;
}

inline void require_pass(ColoredCover& c, const std::string& what) {
  auto v = verify_cover(c);
  if (!v.pass) throw ConstructionError(what + " failed verification: " + v.reason);
  c.mesh = v.mesh;
}

inline std::vector<Element> l1_ball_points(std::size_t m, std::int64_t R) {
  std::vector<Element> out;
  std::vector<std::int64_t> cur(m, 0);
  std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t left) {
    if (i == m) {
      out.push_back(Element{cur});
      return;
    }
    for (std::int64_t v = -left; v <= left; ++v) {
      cur[i] = v;
      rec(i + 1, left - std::abs(v));
    }
  };
  rec(0, R);
  return out;
}

inline std::vector<double> as_doubles(const Element& x) { return {x.c.begin(), x.c.end()}; }

}  // namespace detail

/// m+1 colors on the l1 ball of radius R in Z^m.
inline ColoredCover canonical_cover(std::size_t m, double D, std::int64_t radius) {
  if (m > 4) throw Error("canonical covers are built for m <= 4");
  if (D < 1) throw Error("canonical cover needs D >= 1");
  auto needed = static_cast<std::int64_t>(std::ceil(4 * static_cast<double>(m + 1) * D));
  if (m > 0 && radius < needed)
    throw ConstructionError("radius " + std::to_string(radius) + " is below one full period; needs radius >= " +
                            std::to_string(needed));
  std::string d = m == 0 ? "0" : m == 1 ? "Z" : "Z^" + std::to_string(m);
  SpacePtr space = group_space(d);
  ColoredCover c;
  if (m == 0) {
    c = detail::cover_by_key(space, {Group::parse("0").identity()}, D, [](const Element&) {
      return std::pair<int, std::vector<std::int64_t>>{0, {}};
    });
  } else {
    auto rule = std::make_shared<const detail::GridRule>(detail::grid_rule(m, D));
    c = detail::cover_by_key(space, detail::l1_ball_points(m, radius), D,
                             [rule](const Element& x) { return rule->classify(detail::as_doubles(x)); });
    c.grid = rule;
    c.coords = detail::as_doubles;
  }
  c.construction = m <= 1 ? "alternating intervals" : "cubical skeleton";
  detail::require_pass(c, "canonical cover");
  return c;
}

/// Cosets of G_ceil(D) inside the level-n ball of a chain space: one color.
inline ColoredCover chain_cover(const std::shared_ptr<const CosetSpace>& space, std::int64_t level, double D) {
  if (space->variant() != CosetSpace::Variant::ChainUltra || !space->chain())
    throw ConstructionError("chain covers need a chain ultra-metric space");
  if (D < 0) throw Error("chain cover needs D >= 0");
  const SubgroupChain& ch = *space->chain();
  auto top = std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(D)), level);
  auto pts = space->level_cosets(level);
  ColoredCover c = detail::cover_by_key(space, *pts, D, [&ch, top](const Element& x) {
    return std::pair<int, std::vector<std::int64_t>>{0, ch.key(top, x).c};
  });
  c.construction = "cosets of G_" + std::to_string(top);
  detail::require_pass(c, "chain cover");
  return c;
}

/// Cover of the max-metric product. A one-colored factor keeps the other's
/// colors on product pieces; two grid covers are rebuilt as one grid cover
/// of the combined coordinates, so the colors add up minus one.
inline ColoredCover product_cover(const ColoredCover& cx, const ColoredCover& cy) {
  if (cx.points.size() == 1 && cx.pieces.size() == 1) return cy;
  if (cy.points.size() == 1 && cy.pieces.size() == 1) return cx;
  const double D = std::min(cx.D, cy.D);
  SpacePtr space = std::make_shared<ProductSpace>(cx.space, cy.space);
  ColoredCover c;
  if (cx.color_count() <= 1 || cy.color_count() <= 1) {
    const bool by_y = cx.color_count() <= 1;
    c.space = space;
    c.D = D;
    const std::size_t ny = cy.points.size();
    c.points.reserve(cx.points.size() * ny);
    for (const auto& x : cx.points)
      for (const auto& y : cy.points) c.points.push_back(ProductSpace::pair(x, y));
    for (auto a : cx.ambient)
      for (auto b : cy.ambient) c.ambient.push_back(static_cast<std::uint32_t>(a * ny + b));
    for (std::size_t u = 0; u < cx.pieces.size(); ++u)
      for (std::size_t v = 0; v < cy.pieces.size(); ++v) {
        std::vector<std::uint32_t> piece;
        for (auto a : cx.pieces[u])
          for (auto b : cy.pieces[v]) piece.push_back(static_cast<std::uint32_t>(a * ny + b));
        c.pieces.push_back(std::move(piece));
        c.colors.push_back(by_y ? cy.colors[v] : cx.colors[u]);
      }
    c.construction = "product pieces";
  } else if (cx.grid && cy.grid) {
    auto rule = std::make_shared<const detail::GridRule>(detail::grid_rule(cx.grid->dims + cy.grid->dims, D));
    auto fx = cx.coords, fy = cy.coords;
    auto coords = [fx, fy](const Element& p) {
      auto [a, b] = ProductSpace::split(p);
      auto u = fx(a), w = fy(b);
      u.insert(u.end(), w.begin(), w.end());
      return u;
    };
    std::vector<Element> pts;
    for (auto a : cx.ambient)
      for (auto b : cy.ambient) pts.push_back(ProductSpace::pair(cx.points[a], cy.points[b]));
    c = detail::cover_by_key(space, std::move(pts), D,
                             [rule, coords](const Element& p) { return rule->classify(coords(p)); });
    c.grid = rule;
    c.coords = coords;
    c.construction = "cubical skeleton on the combined coordinates";
  } else {
    throw ConstructionError("cannot combine two multi-colored covers unless both are grid covers");
  }
  auto v = verify_cover(c);
  if (!v.pass) throw ConstructionError("combination failed verification: " + v.reason);
  c.mesh = v.mesh;
  return c;
}

// ---------------------------------------------------------------------------

struct MinColors {
  int colors = 0;
  int lower_bound = 0;  // from a clique of pairs that can share neither a piece nor a color
  ColoredCover witness;
  std::int64_t nodes = 0;
};

/// Least number of D-discrete families of pieces of diameter <= M covering
/// the points. Same-colored points closer than D must share a piece, so a
/// coloring is feasible exactly when every such cluster has diameter <= M;
/// the search is a complete backtracking over colorings.
inline MinColors exact_min_colors(SpacePtr space, const std::vector<Element>& points, double D, double M,
                                  std::size_t limit = 200, std::int64_t node_budget = 50'000'000) {
  const std::size_t n = points.size();
  if (n > limit)
    throw Error("instance too large: " + std::to_string(n) + " points, limit " + std::to_string(limit));
  MinColors out;
  out.witness.space = space;
  out.witness.points = points;
  out.witness.D = D;
  out.witness.ambient.resize(n);
  std::iota(out.witness.ambient.begin(), out.witness.ambient.end(), 0u);
  if (n == 0) return out;

  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = space->distance(points[i], points[j]);
  std::vector<std::vector<std::size_t>> close(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && d[i][j] < D) close[i].push_back(j);

  // Visit order: breadth-first through the closeness graph from the busiest point.
  std::vector<std::size_t> order;
  std::vector<char> seen(n, 0);
  while (order.size() < n) {
    std::size_t start = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!seen[i] && (start == n || close[i].size() > close[start].size())) start = i;
    seen[start] = 1;
    const std::size_t head = order.size();
    order.push_back(start);
    for (std::size_t at = head; at < order.size(); ++at)
      for (auto j : close[order[at]])
        if (!seen[j]) {
          seen[j] = 1;
          order.push_back(j);
        }
  }

  // Greedy clique among pairs closer than D but farther apart than M.
  std::vector<std::size_t> clique;
  for (auto i : order) {
    bool ok = std::all_of(clique.begin(), clique.end(), [&](std::size_t j) { return d[i][j] < D && d[i][j] > M; });
    if (ok) clique.push_back(i);
  }
  out.lower_bound = std::max<int>(1, static_cast<int>(clique.size()));

  struct Cluster {
    std::vector<std::size_t> members;
    double diam = 0;
    bool alive = true;
  };
  std::vector<int> color(n, -1);
  std::vector<std::size_t> cluster_of(n, 0);
  std::vector<Cluster> clusters;
  std::int64_t nodes = 0;

  std::function<bool(std::size_t, int, int)> search = [&](std::size_t pos, int k, int used) -> bool {
    if (pos == n) return true;
    if (++nodes > node_budget) throw BudgetExceeded("exact_min_colors search", node_budget);
    const std::size_t v = order[pos];
    for (int c = 0; c < std::min(k, used + 1); ++c) {
      std::vector<std::size_t> merge;
      for (auto j : close[v])
        if (color[j] == c && std::find(merge.begin(), merge.end(), cluster_of[j]) == merge.end())
          merge.push_back(cluster_of[j]);
      Cluster nc;
      nc.members.push_back(v);
      bool fits = true;
      for (auto id : merge) {
        nc.diam = std::max(nc.diam, clusters[id].diam);
        for (auto a : clusters[id].members) {
          for (auto b : nc.members) nc.diam = std::max(nc.diam, d[a][b]);
          if (nc.diam > M) break;
        }
        if (nc.diam > M) {
          fits = false;
          break;
        }
        nc.members.insert(nc.members.end(), clusters[id].members.begin(), clusters[id].members.end());
      }
      if (!fits) continue;
      for (auto id : merge) clusters[id].alive = false;
      const std::size_t me = clusters.size();
      for (auto a : nc.members) cluster_of[a] = me;
      clusters.push_back(std::move(nc));
      color[v] = c;
      if (search(pos + 1, k, std::max(used, c + 1))) return true;
      color[v] = -1;
      clusters.pop_back();
      for (auto id : merge) {
        clusters[id].alive = true;
        for (auto a : clusters[id].members) cluster_of[a] = id;
      }
    }
    return false;
  };

  for (int k = out.lower_bound; k <= static_cast<int>(n); ++k) {
    color.assign(n, -1);
    clusters.clear();
    if (search(0, k, 0)) {
      out.colors = k;
      break;
    }
  }
  out.nodes = nodes;
  std::map<std::size_t, std::size_t> piece_of;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = piece_of.emplace(cluster_of[i], out.witness.pieces.size());
    if (fresh) {
      out.witness.pieces.emplace_back();
      out.witness.colors.push_back(color[i]);
    }
    out.witness.pieces[it->second].push_back(static_cast<std::uint32_t>(i));
  }
  out.witness.construction = "exhaustive search";
  auto v = verify_cover(out.witness);
  if (!v.pass) throw Error("exact_min_colors produced an invalid witness: " + v.reason);
  out.witness.mesh = v.mesh;
  return out;
}

inline MinColors exact_min_colors(const ColoredCover& on, double D, double M, std::size_t limit = 200) {
  std::vector<Element> pts;
  for (auto a : on.ambient) pts.push_back(on.points[a]);
  return exact_min_colors(on.space, pts, D, M, limit);
}

// ---------------------------------------------------------------------------

/// r0 + 1 colors on a ball of an abelian group with finite torsion-free rank:
/// the grid rule on the Z coordinates, refined by cosets of the level
/// ceil(D) of the torsion part's exhaustion.
inline ColoredCover group_cover(const Group& g, double D, std::int64_t radius, std::int64_t budget = kDefaultBudget) {
  if (!g.is_abelian()) throw ConstructionError("covers are built for abelian groups only");
  auto r0 = g.torsion_free_rank();
  if (!r0) throw ConstructionError("infinite torsion-free rank: no finite-color cover at any scale");
  std::vector<std::size_t> free, torsion;
  for (std::size_t i = 0; i < g.factor_count(); ++i)
    (g.factors()[i].kind == FactorKind::Free ? free : torsion).push_back(i);
  std::vector<Factor> tf;
  for (auto i : torsion) tf.push_back(g.factors()[i]);
  Group T(tf);
  auto chain = std::make_shared<const SubgroupChain>(SubgroupChain::exhaustion(T));
  auto level = static_cast<std::int64_t>(std::ceil(D));
  std::shared_ptr<const detail::GridRule> rule;
  if (!free.empty()) rule = std::make_shared<const detail::GridRule>(detail::grid_rule(free.size(), D));
  NormScheme scheme = NormScheme::standard(g, budget);
  ColoredCover c = detail::cover_by_key(
      group_space(scheme), scheme.ball(static_cast<double>(radius)).elements, D, [&](const Element& x) {
        auto p = g.parts(x);
        std::pair<int, std::vector<std::int64_t>> key{0, {}};
        if (rule) {
          std::vector<double> y;
          for (auto i : free) y.push_back(static_cast<double>(p[i][0]));
          key = rule->classify(y);
        }
        std::vector<std::vector<std::int64_t>> tp;
        for (auto i : torsion) tp.push_back(p[i]);
        auto tk = chain->key(level, T.make(tp)).c;
        key.second.push_back(-1);
        key.second.insert(key.second.end(), tk.begin(), tk.end());
        return key;
      });
  c.construction = free.empty() ? "torsion cosets" : "grid on Z coordinates x torsion cosets";
  detail::require_pass(c, "group cover");
  return c;
}

struct AsdimEntry {
  double D = 0;
  double M = 0;
  int construction_colors = 0;
  double construction_mesh = 0;
  std::optional<int> exact_min;  // absent when the ball exceeds the search limit
};

struct AsdimReport {
  std::string group;
  std::int64_t radius = 0;
  std::size_t points = 0;
  std::vector<AsdimEntry> entries;
};

inline AsdimReport asdim_report(const Group& g, std::int64_t radius, const std::vector<double>& Ds,
                                const std::vector<double>& Ms, std::size_t limit = 200,
                                std::int64_t budget = kDefaultBudget) {
  AsdimReport rep;
  rep.group = g.to_string();
  rep.radius = radius;
  NormScheme scheme = NormScheme::standard(g, budget);
  auto ball = scheme.ball(static_cast<double>(radius)).elements;
  rep.points = ball.size();
  SpacePtr space = group_space(scheme);
  for (double D : Ds) {
    ColoredCover c = group_cover(g, D, radius, budget);
    for (double M : Ms) {
      AsdimEntry e;
      e.D = D;
      e.M = M;
      e.construction_colors = c.color_count();
      e.construction_mesh = c.mesh;
      if (ball.size() <= limit) e.exact_min = exact_min_colors(space, ball, D, M, limit).colors;
      rep.entries.push_back(e);
    }
  }
  return rep;
}

}  // namespace coarse
