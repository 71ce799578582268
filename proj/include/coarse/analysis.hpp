#pragma once

// Diagnostics at scale: conjugacy orbits, quasi-centralizers, FC tests,
// growth fitting, subgroup distortion and undistortedness of chains.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "coarse.hpp"
#include "metrics.hpp"
#include "spaces.hpp"

namespace coarse {

enum class OrbitVerdict { Stabilized, GrowingAtBudget };

inline const char* to_string(OrbitVerdict v) {
  return v == OrbitVerdict::Stabilized ? "Stabilized" : "GrowingAtBudget";
}

struct OrbitReport {
  Element x;
  std::string acting_set;
  std::vector<Element> orbit;  // sorted
  OrbitVerdict verdict = OrbitVerdict::GrowingAtBudget;
  std::int64_t budget = 0;
  std::int64_t radius = 0;  // last radius swept
  std::vector<std::int64_t> radii;
  std::vector<std::int64_t> sizes;  // orbit size after each sweep

  std::int64_t count() const { return static_cast<std::int64_t>(orbit.size()); }
};

/// Orbit of x under conjugation by A ∩ B_r for r = 0, 1, 2, ... while the
/// ball holds at most `budget` elements. A sweep counts only when B_r brought
/// new elements of A; the orbit is Stabilized when such a sweep adds nothing,
/// or when the ball has exhausted a finite group.
inline OrbitReport conjugacy_orbit(const NormScheme& s, const Element& x, const SetSpec& A, std::int64_t budget) {
  const Group& g = s.group();
  OrbitReport rep;
  rep.x = x;
  rep.acting_set = A.name;
  rep.budget = budget;
  std::set<Element> orbit{x};
  std::size_t seen_a = 0;
  auto order = g.order();
  for (std::int64_t r = 0;; ++r) {
    Ball b;
    try {
      if (s.ball_size(static_cast<double>(r)) > budget) break;
      b = s.ball(static_cast<double>(r));
    } catch (const BudgetExceeded&) {
      break;
    }
    std::vector<Element> as;
    for (const auto& a : b.elements)
      if (A.contains(a)) as.push_back(a);
    std::size_t before = orbit.size();
    for (const auto& a : as) orbit.insert(g.conjugate(x, a));
    rep.radius = r;
    rep.radii.push_back(r);
    rep.sizes.push_back(static_cast<std::int64_t>(orbit.size()));
    bool informative = as.size() > seen_a && r > 0;
    seen_a = as.size();
    bool exhausted = order && static_cast<std::int64_t>(b.size()) == *order;
    if ((informative && orbit.size() == before) || exhausted) {
      rep.verdict = OrbitVerdict::Stabilized;
      break;
    }
  }
  rep.orbit.assign(orbit.begin(), orbit.end());
  return rep;
}

enum class QVerdict { InQ, EvidenceAgainst, Inconclusive };

inline const char* to_string(QVerdict v) {
  switch (v) {
    case QVerdict::InQ: return "InQ";
    case QVerdict::EvidenceAgainst: return "EvidenceAgainst";
    case QVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct QReport {
  QVerdict verdict = QVerdict::Inconclusive;
  std::vector<std::int64_t> budgets;
  std::vector<std::int64_t> counts;  // orbit size at each budget
  OrbitReport last;
};

/// Runs conjugacy_orbit at budget, 2 budget, ..., 2^doublings budget. InQ as
/// soon as one run stabilizes; EvidenceAgainst when the orbit count strictly
/// increases across every doubling.
inline QReport quasi_centralizer_test(const NormScheme& s, const Element& x, const SetSpec& A, std::int64_t budget,
                                      int doublings = 5) {
  QReport q;
  std::int64_t b = budget;
  for (int i = 0; i <= doublings; ++i, b *= 2) {
    q.last = conjugacy_orbit(s, x, A, b);
    q.budgets.push_back(b);
    q.counts.push_back(q.last.count());
    if (q.last.verdict == OrbitVerdict::Stabilized) {
      q.verdict = QVerdict::InQ;
      return q;
    }
  }
  bool strict = true;
  for (std::size_t i = 1; i < q.counts.size(); ++i) strict = strict && q.counts[i] > q.counts[i - 1];
  q.verdict = strict ? QVerdict::EvidenceAgainst : QVerdict::Inconclusive;
  return q;
}

struct FcReport {
  std::string verdict;  // "FC at scale", "not FC" or "inconclusive"
  bool fc = false;
  std::int64_t sampled = 0;
  std::int64_t counterexamples = 0;
  std::optional<Element> witness;
  std::optional<QReport> witness_trace;
};

/// Samples x from the ball of radius `sample_radius`, by norm and largest
/// first within a sphere, and tests x ∈ Q(G) for each.
inline FcReport fc_test(const NormScheme& s, std::int64_t budget, double sample_radius = 1) {
  FcReport rep;
  bool inconclusive = false;
  Ball ball = s.ball(sample_radius);
  std::vector<std::size_t> idx(ball.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    if (ball.norms[i] != ball.norms[j]) return ball.norms[i] < ball.norms[j];
    return ball.elements[j] < ball.elements[i];
  });
  for (std::size_t i : idx) {
    const Element& x = ball.elements[i];
    ++rep.sampled;
    QReport q = quasi_centralizer_test(s, x, whole_set(), budget);
    if (q.verdict == QVerdict::EvidenceAgainst) {
      if (++rep.counterexamples == 1) {
        rep.witness = x;
        rep.witness_trace = q;
      }
    } else if (q.verdict == QVerdict::Inconclusive) {
      inconclusive = true;
    }
  }
  rep.fc = rep.counterexamples == 0 && !inconclusive;
  rep.verdict = rep.counterexamples ? "not FC" : (inconclusive ? "inconclusive" : "FC at scale");
  return rep;
}

inline FcReport fc_test(const Group& g, std::int64_t budget, double sample_radius = 1) {
  return fc_test(NormScheme::standard(g), budget, sample_radius);
}

// ---------------------------------------------------------------------------

struct PowerFit {
  double exponent = 0;
  double C = 0;         // max y / x^exponent over the fitted points
  double residual = 0;  // rms of the log-log residuals
  std::int64_t from = 0, to = 0;
  double tail_fraction = 0.5;
};

namespace detail {

// Least-squares slope of log y against log x.
inline PowerFit fit_power(const std::vector<std::pair<double, double>>& pts) {
  PowerFit f;
  if (pts.empty()) return f;
  double n = static_cast<double>(pts.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double var = n * sxx - sx * sx;
  bool constant = std::all_of(pts.begin(), pts.end(), [&](const auto& p) { return p.second == pts[0].second; });
  double slope = (constant || var <= 0) ? 0 : (n * sxy - sx * sy) / var;
  double icpt = (sy - slope * sx) / n;
  double ss = 0;
  for (auto [x, y] : pts) {
    double e = std::log(y) - (icpt + slope * std::log(x));
    ss += e * e;
    f.C = std::max(f.C, y / std::pow(x, slope));
  }
  f.exponent = slope;
  f.residual = std::sqrt(ss / n);
  return f;
}

inline std::int64_t tail_start(std::int64_t N, double tail_fraction) {
  if (!(tail_fraction > 0 && tail_fraction <= 1)) throw Error("tail fraction must lie in (0, 1]");
  auto from = static_cast<std::int64_t>(std::ceil(static_cast<double>(N) * (1 - tail_fraction) - 1e-9));
  return std::max<std::int64_t>(1, from);
}

}  // namespace detail

/// Degree d with |S^n| ~ C n^d, fitted on the tail of the profile.
inline PowerFit growth_fit(const GrowthProfile& p, double tail_fraction = 0.5) {
  if (p.sizes.size() < 8) throw Error("growth fit needs a profile of length >= 8");
  auto N = static_cast<std::int64_t>(p.sizes.size()) - 1;
  std::int64_t from = detail::tail_start(N, tail_fraction);
  std::vector<std::pair<double, double>> pts;
  for (std::int64_t n = from; n <= N; ++n)
    pts.emplace_back(static_cast<double>(n), static_cast<double>(p.sizes[static_cast<std::size_t>(n)]));
  PowerFit f = detail::fit_power(pts);
  f.from = from;
  f.to = N;
  f.tail_fraction = tail_fraction;
  return f;
}

// ---------------------------------------------------------------------------

struct DistortionRow {
  std::int64_t n = 0;
  double min = 0, max = 0;  // ambient norms over h with subgroup norm exactly n
  std::int64_t count = 0;
};

struct DistortionProfile {
  std::vector<Element> generators;
  std::vector<DistortionRow> table;
  PowerFit fit;  // log max against log n on the tail
};

/// Scans h in H = <gens> by word length n <= N and records the ambient norms.
inline DistortionProfile distortion_profile(const std::vector<Element>& gens, const NormScheme& ambient, std::int64_t N,
                                            std::int64_t budget = kDefaultBudget, double tail_fraction = 0.5) {
  if (N < 1) throw Error("distortion profile needs N >= 1");
  NormScheme h = NormScheme::word(ambient.group(), gens, budget);
  Ball b = h.ball(static_cast<double>(N));
  DistortionProfile prof;
  prof.generators = gens;
  std::map<std::int64_t, DistortionRow> rows;
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::int64_t n = b.norms[i].raw;
    if (n == 0) continue;
    double a = ambient.norm(b.elements[i]).value();
    auto it = rows.try_emplace(n, DistortionRow{n, a, a, 0}).first;
    it->second.min = std::min(it->second.min, a);
    it->second.max = std::max(it->second.max, a);
    ++it->second.count;
  }
  for (auto& [n, r] : rows) prof.table.push_back(r);
  std::int64_t from = detail::tail_start(N, tail_fraction);
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : prof.table)
    if (r.n >= from) pts.emplace_back(static_cast<double>(r.n), r.max);
  prof.fit = detail::fit_power(pts);
  prof.fit.from = from;
  prof.fit.to = N;
  prof.fit.tail_fraction = tail_fraction;
  return prof;
}

struct InclusionVerdict {
  std::size_t index = 0;  // G_index -> G_{index+1}
  QIFit fit;
  bool undistorted = false;
};

/// qi_fit of each identity inclusion <gens[k]> -> <gens[k+1]> (word norms) on
/// the window B_R; undistorted when the fit does not degrade from B_{R/2}.
inline std::vector<InclusionVerdict> undistorted_chain_check(const Group& g,
                                                             const std::vector<std::vector<Element>>& chain, double R,
                                                             std::int64_t budget = kDefaultBudget) {
  std::vector<InclusionVerdict> out;
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    for (const auto& x : chain[k]) {
      NormScheme up = NormScheme::word(g, chain[k + 1], budget);
      try {
        up.norm(x);
      } catch (const BudgetExceeded&) {
        throw Error("generator of level " + std::to_string(k) + " not found in level " + std::to_string(k + 1) +
                    " within budget");
      }
    }
    PointMap f;
    f.name = "inclusion " + std::to_string(k);
    f.domain = group_space(NormScheme::word(g, chain[k], budget));
    f.codomain = group_space(NormScheme::word(g, chain[k + 1], budget));
    f.eval = [](const Element& x) { return x; };
    f.inverse = f.eval;
    InclusionVerdict v;
    v.index = k;
    v.fit = qi_fit(f, R);
    v.undistorted = !v.fit.degrading;
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct CommutatorWitness {
  std::int64_t m = 0;
  Element product;          // a^m b^m a^-m b^-m in UT3
  std::int64_t length = 0;  // 4m
};

/// The word a^m b^m a^-m b^-m, evaluated letter by letter; equals H(0, m^2, 0).
inline CommutatorWitness heisenberg_commutator(const Group& ut3, std::int64_t m) {
  if (ut3.factor_count() != 1 || ut3.factors()[0].kind != FactorKind::Unitriangular || ut3.factors()[0].param != 3)
    throw DescriptorMismatch("commutator witness needs UT3");
  Element a = ut3.make({{1, 0, 0}}), b = ut3.make({{0, 0, 1}});
  CommutatorWitness w;
  w.m = m;
  w.product = ut3.identity();
  for (const Element& letter : {a, b, ut3.inv(a), ut3.inv(b)})
    for (std::int64_t i = 0; i < m; ++i) {
      w.product = ut3.mul(w.product, letter);
      ++w.length;
    }
  return w;
}

}  // namespace coarse
