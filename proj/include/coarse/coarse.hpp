#pragma once

// Window verifiers for coarse maps: continuity moduli, coarse-equivalence
// certificates, quasi-isometry fits, fibre multiplicity, the multiplication
// and inversion criteria via conjugation orbits, and two map builders (the
// integer part and a heuristic embedding of a snowflaked ball).
//
// Moduli are taken over pairs: the sup of diam f(A) over sets A of diameter
// <= delta equals the sup of d(f(x), f(y)) over pairs with d(x, y) <= delta,
// since diam f(A) is itself a sup over pairs of A.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "coarse/error.hpp"
#include "coarse/groups.hpp"
#include "coarse/metrics.hpp"
#include "coarse/spaces.hpp"

namespace coarse {

namespace detail {

inline unsigned worker_count(std::size_t work) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (work < 4096) return 1;
  return std::min<unsigned>(hw, 8);
}

/// Runs fn(begin, end, worker) over [0, n) in contiguous chunks.
template <class Fn>
void parallel_chunks(std::size_t n, Fn fn) {
  unsigned w = worker_count(n);
  if (w == 1) {
    fn(std::size_t{0}, n, 0u);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + w - 1) / w;
  for (unsigned t = 0; t < w; ++t) {
    std::size_t b = std::min(n, t * chunk), e = std::min(n, b + chunk);
    pool.emplace_back([=, &fn] { fn(b, e, t); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

using Witness = std::pair<Element, Element>;

struct ModulusReport {
  std::string map;
  double R = 0;
  std::vector<double> deltas;
  std::vector<double> omega;                   // omega[k] = sup over pairs with d <= deltas[k]
  std::vector<std::optional<Witness>> witness;  // a pair attaining omega[k]
  std::int64_t points = 0;
  std::int64_t pairs = 0;
};

/// Exact pairwise modulus of f on the closed window B_R of its domain.
inline ModulusReport continuity_modulus(const PointMap& f, std::vector<double> deltas, double R) {
  if (deltas.empty()) throw Error("empty delta grid");
  std::sort(deltas.begin(), deltas.end());
  const MetricSpace& X = *f.domain;
  const MetricSpace& Y = *f.codomain;
  std::vector<Element> win = X.window(R);
  std::unordered_map<Element, std::size_t, ElementHash> index;
  index.reserve(win.size() * 2);
  for (std::size_t i = 0; i < win.size(); ++i) index.emplace(win[i], i);
  std::vector<Element> img(win.size());
  detail::parallel_chunks(win.size(), [&](std::size_t b, std::size_t e, unsigned) {
    for (std::size_t i = b; i < e; ++i) img[i] = f(win[i]);
  });

  const std::size_t K = deltas.size();
  struct Partial {
    std::vector<double> best;
    std::vector<std::pair<std::size_t, std::size_t>> at;
    std::int64_t pairs = 0;
  };
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  unsigned W = detail::worker_count(win.size());
  std::vector<Partial> parts(W, Partial{std::vector<double>(K, 0.0),
                                        std::vector<std::pair<std::size_t, std::size_t>>(K, {none, none}), 0});
  detail::parallel_chunks(win.size(), [&](std::size_t b, std::size_t e, unsigned t) {
    Partial& p = parts[t];
    for (std::size_t i = b; i < e; ++i)
      for (const auto& y : X.near(win[i], deltas.back())) {
        auto it = index.find(y);
        if (it == index.end() || it->second == i) continue;
        std::size_t j = it->second;
        double d = X.distance(win[i], y);
        double dy = Y.distance(img[i], img[j]);
        ++p.pairs;
        for (std::size_t k = K; k-- > 0;) {
          if (d > deltas[k] + 1e-12) break;
          if (dy > p.best[k] || (dy == p.best[k] && std::pair(i, j) < p.at[k])) {
            p.best[k] = dy;
            p.at[k] = {i, j};
          }
        }
      }
  });

  ModulusReport rep;
  rep.map = f.name;
  rep.R = R;
  rep.deltas = deltas;
  rep.omega.assign(K, 0.0);
  rep.witness.assign(K, std::nullopt);
  rep.points = static_cast<std::int64_t>(win.size());
  std::vector<std::pair<std::size_t, std::size_t>> at(K, {none, none});
  for (const auto& p : parts) {
    rep.pairs += p.pairs;
    for (std::size_t k = 0; k < K; ++k)
      if (p.best[k] > rep.omega[k] || (p.best[k] == rep.omega[k] && p.at[k] < at[k])) {
        rep.omega[k] = p.best[k];
        at[k] = p.at[k];
      }
  }
  for (std::size_t k = 0; k < K; ++k)
    if (at[k].first != none) rep.witness[k] = Witness{win[at[k].first], win[at[k].second]};
  // A pair within delta_k is within every larger delta.
  for (std::size_t k = 1; k < K; ++k)
    if (rep.omega[k - 1] > rep.omega[k]) {
      rep.omega[k] = rep.omega[k - 1];
      rep.witness[k] = rep.witness[k - 1];
    }
  return rep;
}

/// Modulus of a homomorphism-like map between groups from pairs (1, u):
/// d(f(x), f(xu)) = ||f(u)|| when f(xu) = f(x) f(u).
inline ModulusReport continuity_modulus_from_identity(const PointMap& f, std::vector<double> deltas) {
  std::sort(deltas.begin(), deltas.end());
  const MetricSpace& X = *f.domain;
  const MetricSpace& Y = *f.codomain;
  Element one = X.base();
  Element f1 = f(one);
  ModulusReport rep;
  rep.map = f.name;
  rep.deltas = deltas;
  rep.omega.assign(deltas.size(), 0.0);
  rep.witness.assign(deltas.size(), std::nullopt);
  for (const auto& u : X.near(one, deltas.back())) {
    double d = X.distance(one, u);
    double dy = Y.distance(f1, f(u));
    ++rep.pairs;
    for (std::size_t k = 0; k < deltas.size(); ++k)
      if (d <= deltas[k] + 1e-12 && dy > rep.omega[k]) {
        rep.omega[k] = dy;
        rep.witness[k] = Witness{one, u};
      }
  }
  return rep;
}

// ---------------------------------------------------------------------------

/// Declared upper bound for a modulus, omega(delta) <= bound(delta).
using ModulusBound = std::function<double(double)>;

struct CoarseCertificate {
  PointMap f;  // X -> Y
  PointMap g;  // Y -> X
  double K = 0;
  ModulusBound f_bound;  // optional; without it boundedness is judged by window growth
  ModulusBound g_bound;
};

struct CertificateReport {
  bool pass = false;
  double R_x = 0, R_y = 0;
  ModulusReport f_modulus, g_modulus;
  std::vector<bool> f_bounded, g_bounded;  // per delta
  double f_round_trip = 0;                 // max d(g f x, x) on B_R(X)
  double g_round_trip = 0;                 // max d(f g y, y) on B_R(Y)
  std::optional<Element> round_trip_witness_x, round_trip_witness_y;
  std::string reason;
};

namespace detail {

// Without a declared bound a modulus counts as bounded on the window when it
// does not grow from the inner window B_{R/2} to B_R. Deltas above R/2 cannot
// be compared that way and are accepted as measured.
inline std::vector<bool> judge_modulus(const PointMap& m, const ModulusReport& full, const ModulusBound& bound,
                                       double R, std::string& reason, const char* side) {
  std::vector<bool> ok(full.deltas.size(), true);
  if (bound) {
    for (std::size_t k = 0; k < ok.size(); ++k)
      if (full.omega[k] > bound(full.deltas[k]) + 1e-9) {
        ok[k] = false;
        if (reason.empty())
          reason = std::string(side) + " modulus exceeds its declared bound at delta " + std::to_string(full.deltas[k]);
      }
    return ok;
  }
  ModulusReport inner = continuity_modulus(m, full.deltas, std::floor(R / 2));
  for (std::size_t k = 0; k < ok.size(); ++k)
    if (full.deltas[k] <= std::floor(R / 2) && full.omega[k] > inner.omega[k] + 1e-9) {
      ok[k] = false;
      if (reason.empty())
        reason = std::string(side) + " modulus grows with the window at delta " + std::to_string(full.deltas[k]);
    }
  return ok;
}

}  // namespace detail

/// Checks both moduli on the delta grid and both round trips, on windows
/// B_{R_x}(X) and B_{R_y}(Y).
inline CertificateReport verify_certificate(const CoarseCertificate& cert, double R_x, double R_y,
                                            const std::vector<double>& deltas) {
  CertificateReport rep;
  rep.R_x = R_x;
  rep.R_y = R_y;
  rep.f_modulus = continuity_modulus(cert.f, deltas, R_x);
  rep.g_modulus = continuity_modulus(cert.g, deltas, R_y);
  rep.f_bounded = detail::judge_modulus(cert.f, rep.f_modulus, cert.f_bound, R_x, rep.reason, "f");
  rep.g_bounded = detail::judge_modulus(cert.g, rep.g_modulus, cert.g_bound, R_y, rep.reason, "g");

  const MetricSpace& X = *cert.f.domain;
  const MetricSpace& Y = *cert.f.codomain;
  auto wx = X.window(R_x);
  for (const auto& x : wx) {
    double d = X.distance(cert.g(cert.f(x)), x);
    if (d > rep.f_round_trip) {
      rep.f_round_trip = d;
      rep.round_trip_witness_x = x;
    }
  }
  auto wy = Y.window(R_y);
  for (const auto& y : wy) {
    double d = Y.distance(cert.f(cert.g(y)), y);
    if (d > rep.g_round_trip) {
      rep.g_round_trip = d;
      rep.round_trip_witness_y = y;
    }
  }
  bool moduli_ok = std::all_of(rep.f_bounded.begin(), rep.f_bounded.end(), [](bool b) { return b; }) &&
                   std::all_of(rep.g_bounded.begin(), rep.g_bounded.end(), [](bool b) { return b; });
  bool trips_ok = rep.f_round_trip <= cert.K + 1e-9 && rep.g_round_trip <= cert.K + 1e-9;
  if (!trips_ok && rep.reason.empty()) rep.reason = "round trip displacement exceeds K";
  rep.pass = moduli_ok && trips_ok;
  if (rep.pass) rep.reason = "ok";
  return rep;
}

inline CertificateReport verify_certificate(const CoarseCertificate& cert, double R, const std::vector<double>& deltas) {
  return verify_certificate(cert, R, R, deltas);
}

// ---------------------------------------------------------------------------

struct QIFit {
  double L = 1;
  double C = 0;
  double R = 0;
  double C_cap = 0;  // additive slack allowed when fitting L
  double upper_ratio = 0;  // max (d' - C) / d
  double lower_ratio = 0;  // max d / (d' + C)
  std::optional<Witness> binding_upper, binding_lower;
  bool degrading = false;  // L or either ratio grew by more than 10% from B_{R/2} to B_R
  double L_half = 1;
  double lower_ratio_half = 0;
};

namespace detail {

inline QIFit qi_fit_once(const PointMap& f, double R, double cap) {
  const MetricSpace& X = *f.domain;
  const MetricSpace& Y = *f.codomain;
  auto win = X.window(R);
  std::vector<Element> img(win.size());
  for (std::size_t i = 0; i < win.size(); ++i) img[i] = f(win[i]);
  std::vector<std::tuple<double, double, std::size_t, std::size_t>> pairs;
  pairs.reserve(win.size() * (win.size() - (win.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < win.size(); ++i)
    for (std::size_t j = i + 1; j < win.size(); ++j)
      pairs.emplace_back(X.distance(win[i], win[j]), Y.distance(img[i], img[j]), i, j);
  QIFit fit;
  fit.R = R;
  fit.C_cap = cap;
  double L = 1;
  for (const auto& [d, dy, i, j] : pairs) {
    if (d == 0) continue;
    double up = (dy - cap) / d;
    double lo = dy + cap > 0 ? d / (dy + cap) : std::numeric_limits<double>::infinity();
    if (up > fit.upper_ratio) {
      fit.upper_ratio = up;
      fit.binding_upper = Witness{win[i], win[j]};
    }
    if (lo > fit.lower_ratio) {
      fit.lower_ratio = lo;
      fit.binding_lower = Witness{win[i], win[j]};
    }
    L = std::max({L, up, lo});
  }
  fit.L = L;
  double C = 0;
  for (const auto& [d, dy, i, j] : pairs) C = std::max({C, dy - L * d, d / L - dy});
  fit.C = std::max(0.0, C);
  return fit;
}

}  // namespace detail

/// Least L (then least C) with (1/L) d - C <= d' <= L d + C on all pairs of
/// B_R, where C may not exceed C_cap. With C_cap = 0 this is the bi-Lipschitz
/// constant of the window; a non-injective map needs C_cap > 0.
inline QIFit qi_fit(const PointMap& f, double R, double C_cap = 0) {
  QIFit fit = detail::qi_fit_once(f, R, C_cap);
  if (std::isinf(fit.L)) throw Error("map is not injective on the window; fit with C_cap > 0");
  QIFit half = detail::qi_fit_once(f, std::floor(R / 2), C_cap);
  fit.L_half = half.L;
  fit.lower_ratio_half = half.lower_ratio;
  // Either ratio creeping up with the window signals distortion, even while
  // the other still determines L.
  fit.degrading = fit.L > 1.1 * half.L || fit.lower_ratio > 1.1 * half.lower_ratio ||
                  fit.upper_ratio > 1.1 * half.upper_ratio;
  if (half.upper_ratio > 0 && fit.upper_ratio > 1.5 * half.upper_ratio && fit.upper_ratio > 2)
    throw Error("not asymptotically Lipschitz on window: upper ratio grows from " +
                std::to_string(half.upper_ratio) + " to " + std::to_string(fit.upper_ratio));
  return fit;
}

/// sup |f^{-1}(a)| over the window B_R.
inline std::int64_t embedding_multiplicity(const PointMap& f, double R) {
  std::unordered_map<Element, std::int64_t, ElementHash> fibres;
  std::int64_t m = 0;
  for (const auto& x : f.domain->window(R)) m = std::max(m, ++fibres[f(x)]);
  return m;
}

// ---------------------------------------------------------------------------

/// A subset of a group given by membership; enumerated inside balls.
struct SetSpec {
  std::string name;
  std::function<bool(const Element&)> contains;
};

inline SetSpec whole_set() {
  return {"G", [](const Element&) { return true; }};
}

struct OrbitTrace {
  Element x;
  std::vector<std::int64_t> radii;
  std::vector<std::int64_t> sizes;  // |x^{B cap B_r}| per radius
  bool stabilized = false;
};

struct BornologityReport {
  bool criterion_holds = true;  // every sampled orbit stabilized
  std::optional<OrbitTrace> violation;
  std::int64_t elements_checked = 0;
  // Direct modulus of the map at delta = 1 on B_{R/2} and B_R.
  double modulus_half = 0;
  double modulus_full = 0;
  bool modulus_grows = false;
  std::optional<Witness> modulus_witness;
  std::string detail;
};

namespace detail {

inline std::vector<Element> members(const NormScheme& s, const SetSpec& A, double r) {
  std::vector<Element> out;
  for (const auto& x : s.ball(r).elements)
    if (A.contains(x)) out.push_back(x);
  return out;
}

// Orbit of x under conjugation by B within balls of radius 1, 2, 4, ..., R.
// Stabilized: the orbit did not grow over the last doubling.
inline OrbitTrace conj_orbit(const NormScheme& s, const Element& x, const SetSpec& B, std::int64_t R) {
  const Group& g = s.group();
  OrbitTrace t;
  t.x = x;
  std::set<Element> orbit{x};
  for (std::int64_t r = 1; r <= R; r = (r == R ? R + 1 : std::min(2 * r, R))) {
    for (const auto& b : members(s, B, static_cast<double>(r))) orbit.insert(g.conjugate(x, b));
    t.radii.push_back(r);
    t.sizes.push_back(static_cast<std::int64_t>(orbit.size()));
  }
  std::size_t n = t.sizes.size();
  t.stabilized = n < 2 || t.sizes[n - 1] == t.sizes[n - 2];
  return t;
}

inline BornologityReport orbit_criterion(const NormScheme& s, const SetSpec& A, const SetSpec& B, std::int64_t R) {
  const Group& g = s.group();
  BornologityReport rep;
  auto as = members(s, A, static_cast<double>(R));
  std::set<Element> diffs;
  for (const auto& a : as)
    for (const auto& b : as) {
      Element x = g.mul(g.inv(a), b);
      if (s.norm(x).value() <= static_cast<double>(R)) diffs.insert(x);
    }
  for (const auto& x : diffs) {
    ++rep.elements_checked;
    OrbitTrace t = conj_orbit(s, x, B, R);
    if (!t.stabilized) {
      rep.criterion_holds = false;
      if (!rep.violation || t.sizes.back() > rep.violation->sizes.back()) rep.violation = t;
    }
  }
  return rep;
}

}  // namespace detail

/// Multiplication A x B -> G at scale: orbits x^B for x in A^{-1}A must be
/// finite; the direct modulus of (a, b) -> ab at delta = 1 is measured
/// independently on B_{R/2} and B_R.
inline BornologityReport multiplication_bornologity_check(const NormScheme& s, const SetSpec& A, const SetSpec& B,
                                                          std::int64_t R) {
  const Group& g = s.group();
  BornologityReport rep = detail::orbit_criterion(s, A, B, R);
  auto gens = s.ball(1).elements;
  auto measure = [&](std::int64_t r, std::optional<Witness>* w) {
    double best = 0;
    auto as = detail::members(s, A, static_cast<double>(r));
    auto bs = detail::members(s, B, static_cast<double>(r));
    for (const auto& a : as)
      for (const auto& b : bs) {
        Element ab = g.mul(a, b);
        for (const auto& u : gens) {
          Element a2 = g.mul(a, u);
          if (A.contains(a2) && s.norm(a2).value() <= static_cast<double>(r)) {
            double d = s.distance(ab, g.mul(a2, b));
            if (d > best) {
              best = d;
              if (w) *w = Witness{ab, g.mul(a2, b)};
            }
          }
          Element b2 = g.mul(b, u);
          if (B.contains(b2) && s.norm(b2).value() <= static_cast<double>(r)) {
            double d = s.distance(ab, g.mul(a, b2));
            if (d > best) {
              best = d;
              if (w) *w = Witness{ab, g.mul(a, b2)};
            }
          }
        }
      }
    return best;
  };
  rep.modulus_half = measure(R / 2, nullptr);
  rep.modulus_full = measure(R, &rep.modulus_witness);
  rep.modulus_grows = rep.modulus_full > rep.modulus_half;
  rep.detail = rep.criterion_holds ? "orbits of A^-1 A under B stabilized on the window"
                                   : "an orbit of A^-1 A under B keeps growing";
  return rep;
}

/// Inversion on A: orbits x^{A^{-1}} for x in A^{-1}A, and the direct modulus
/// of a -> a^{-1} at delta = 1. The criterion is sufficient only; both facts
/// are reported separately.
inline BornologityReport inversion_bornologity_check(const NormScheme& s, const SetSpec& A, std::int64_t R) {
  const Group& g = s.group();
  SetSpec Ainv{A.name + "^-1", [A, g](const Element& x) { return A.contains(g.inv(x)); }};
  BornologityReport rep = detail::orbit_criterion(s, A, Ainv, R);
  auto gens = s.ball(1).elements;
  auto measure = [&](std::int64_t r, std::optional<Witness>* w) {
    double best = 0;
    for (const auto& a : detail::members(s, A, static_cast<double>(r)))
      for (const auto& u : gens) {
        Element a2 = g.mul(a, u);
        if (!A.contains(a2) || s.norm(a2).value() > static_cast<double>(r)) continue;
        double d = s.distance(g.inv(a), g.inv(a2));
        if (d > best) {
          best = d;
          if (w) *w = Witness{a, a2};
        }
      }
    return best;
  };
  rep.modulus_half = measure(R / 2, nullptr);
  rep.modulus_full = measure(R, &rep.modulus_witness);
  rep.modulus_grows = rep.modulus_full > rep.modulus_half;
  rep.detail = rep.criterion_holds ? "orbits of A^-1 A under A^-1 stabilized on the window"
                                   : "an orbit of A^-1 A under A^-1 keeps growing";
  return rep;
}

// ---------------------------------------------------------------------------

/// Coordinatewise floor (1/q)Z^m -> Z^m, both with the max metric.
inline PointMap integer_part_map(std::int64_t m, std::int64_t q) {
  PointMap f;
  f.name = "integer part";
  f.domain = std::make_shared<GridSpace>(m, q);
  f.codomain = std::make_shared<GridSpace>(m, 1);
  f.eval = [q](const Element& x) {
    Element y = x;
    for (auto& c : y.c) c = checked::floor_div(c, q);
    return y;
  };
  return f;
}

struct EmbeddingParams {
  std::int64_t iterations = 300;  // stress-majorization sweeps
  std::uint64_t seed = 1;
  double target_L = 0;  // flag the result when the measured L exceeds this (0: no target)
};

struct EmbeddingReport {
  std::vector<std::vector<double>> coords;
  double L = 1;  // best L with (1/L) rho <= |phi(x) - phi(y)| <= L rho after scaling
  double scale = 1;
  std::int64_t dimension = 0;
  std::int64_t net_levels = 0;
  bool flagged = false;
  std::string method = "greedy nets + bump coordinates + stress majorization (heuristic)";
};

namespace detail {

inline double embedding_distortion(const std::vector<std::vector<double>>& X, const std::vector<double>& D,
                                   std::size_t n, double* scale) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double e = 0;
      for (std::size_t k = 0; k < X[i].size(); ++k) e += (X[i][k] - X[j][k]) * (X[i][k] - X[j][k]);
      double r = std::sqrt(e) / D[i * n + j];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  if (n < 2) {
    if (scale) *scale = 1;
    return 1;
  }
  if (lo <= 0) return std::numeric_limits<double>::infinity();
  if (scale) *scale = 1 / std::sqrt(lo * hi);
  return std::sqrt(hi / lo);
}

}  // namespace detail

/// Heuristic embedding of a finite metric space into R^m: nets at scales 2^k
/// give bump coordinates, the first m principal directions seed a weighted
/// stress majorization with weights 1/rho^2. The reported L is measured, not
/// guaranteed.
inline EmbeddingReport net_embedding(const std::vector<Element>& pts,
                                     const std::function<double(const Element&, const Element&)>& rho,
                                     std::int64_t m, EmbeddingParams params = {}) {
  if (m < 1) throw Error("target dimension must be positive");
  const std::size_t n = pts.size();
  EmbeddingReport rep;
  rep.dimension = m;
  rep.coords.assign(n, std::vector<double>(static_cast<std::size_t>(m), 0.0));
  if (n < 2) return rep;
  std::vector<double> D(n * n, 0.0);
  double diam = 0, minpos = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = rho(pts[i], pts[j]);
      if (d <= 0) throw Error("embedding needs distinct points");
      D[i * n + j] = D[j * n + i] = d;
      diam = std::max(diam, d);
      minpos = std::min(minpos, d);
    }

  // Greedy nets N_k (k = 0 is the finest scale) and bump features
  // phi_{k,p}(x) = max(0, s_k - rho(x, p)), s_k = minpos * 2^k.
  std::vector<std::vector<double>> feats(n);
  for (double s = minpos; s <= 2 * diam; s *= 2) {
    ++rep.net_levels;
    std::vector<std::size_t> net;
    for (std::size_t i = 0; i < n; ++i) {
      bool covered = false;
      for (auto p : net)
        if (D[i * n + p] < s) {
          covered = true;
          break;
        }
      if (!covered) net.push_back(i);
    }
    for (auto p : net)
      for (std::size_t i = 0; i < n; ++i) feats[i].push_back(std::max(0.0, s - D[i * n + p]));
  }
  // Principal directions of the centered features (power iteration).
  const std::size_t F = feats[0].size();
  std::vector<double> mean(F, 0.0);
  for (const auto& f : feats)
    for (std::size_t k = 0; k < F; ++k) mean[k] += f[k] / static_cast<double>(n);
  for (auto& f : feats)
    for (std::size_t k = 0; k < F; ++k) f[k] -= mean[k];
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> dirs;
  for (std::int64_t c = 0; c < m; ++c) {
    std::vector<double> v(F);
    for (auto& x : v) x = gauss(rng);
    for (int it = 0; it < 100; ++it) {
      std::vector<double> proj(n, 0.0), w(F, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < F; ++k) proj[i] += feats[i][k] * v[k];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < F; ++k) w[k] += feats[i][k] * proj[i];
      for (const auto& u : dirs) {
        double dot = 0;
        for (std::size_t k = 0; k < F; ++k) dot += w[k] * u[k];
        for (std::size_t k = 0; k < F; ++k) w[k] -= dot * u[k];
      }
      double nrm = 0;
      for (double x : w) nrm += x * x;
      nrm = std::sqrt(nrm);
      if (nrm < 1e-300) break;
      for (std::size_t k = 0; k < F; ++k) v[k] = w[k] / nrm;
    }
    dirs.push_back(v);
    for (std::size_t i = 0; i < n; ++i) {
      double p = 0;
      for (std::size_t k = 0; k < F; ++k) p += feats[i][k] * v[k];
      rep.coords[i][static_cast<std::size_t>(c)] = p + 1e-6 * gauss(rng);
    }
  }

  // Weighted stress majorization (SMACOF), weights w_ij = 1 / rho_ij^2.
  auto& X = rep.coords;
  const std::size_t M = static_cast<std::size_t>(m);
  std::vector<double> wsum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) wsum[i] += 1.0 / (D[i * n + j] * D[i * n + j]);
  for (std::int64_t it = 0; it < params.iterations; ++it) {
    std::vector<std::vector<double>> Y(n, std::vector<double>(M, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        double e = 0;
        for (std::size_t k = 0; k < M; ++k) e += (X[i][k] - X[j][k]) * (X[i][k] - X[j][k]);
        e = std::sqrt(e);
        double w = 1.0 / (D[i * n + j] * D[i * n + j]);
        double b = e > 1e-12 ? w * D[i * n + j] / e : 0.0;
        for (std::size_t k = 0; k < M; ++k) Y[i][k] += w * X[j][k] + b * (X[i][k] - X[j][k]);
      }
      for (std::size_t k = 0; k < M; ++k) Y[i][k] /= wsum[i];
    }
    X = std::move(Y);
  }
  rep.L = detail::embedding_distortion(X, D, n, &rep.scale);
  for (auto& x : X)
    for (auto& c : x) c *= rep.scale;
  rep.flagged = params.target_L > 0 && rep.L > params.target_L;
  return rep;
}

}  // namespace coarse
