#pragma once

// Proper metric spaces with enumerable balls. Every verifier in the library
// scans pairs (x, y) with y in near(x, r), so a space only has to say how to
// list the closed r-ball around a point.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "coarse/checked.hpp"
#include "coarse/error.hpp"
#include "coarse/groups.hpp"
#include "coarse/metrics.hpp"

namespace coarse {

class MetricSpace {
 public:
  virtual ~MetricSpace() = default;

  virtual std::string name() const = 0;
  virtual double distance(const Element& x, const Element& y) const = 0;
  /// Closed ball around p, deterministic order.
  virtual std::vector<Element> near(const Element& p, double r) const = 0;
  /// Reference point for verification windows.
  virtual Element base() const = 0;
  virtual std::string format(const Element& p) const {
    std::string s = "(";
    for (std::size_t i = 0; i < p.c.size(); ++i) s += (i ? "," : "") + std::to_string(p.c[i]);
    return s + ")";
  }

  /// Closed ball around the base point.
  std::vector<Element> window(double R) const { return near(base(), R); }
};

using SpacePtr = std::shared_ptr<const MetricSpace>;

/// A group with a proper left-invariant norm.
class GroupSpace : public MetricSpace {
 public:
  explicit GroupSpace(NormScheme scheme)
      : scheme_(std::move(scheme)), cache_(std::make_shared<Cache>()) {}

  const NormScheme& scheme() const { return scheme_; }
  const Group& group() const { return scheme_.group(); }

  std::string name() const override { return group().to_string() + " [" + scheme_.describe() + "]"; }
  double distance(const Element& x, const Element& y) const override { return scheme_.distance(x, y); }
  Element base() const override { return group().identity(); }
  std::string format(const Element& p) const override { return group().format(p); }

  std::vector<Element> near(const Element& p, double r) const override {
    auto b = ball(r);
    if (group().is_identity(p)) return b->elements;
    std::vector<Element> out;
    out.reserve(b->size());
    for (const auto& u : b->elements) out.push_back(group().mul(p, u));
    return out;
  }

  /// Memoized ball around the identity.
  std::shared_ptr<const Ball> ball(double r) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->balls.find(r);
    if (it != cache_->balls.end()) return it->second;
    auto b = std::make_shared<const Ball>(scheme_.ball(r));
    cache_->balls.emplace(r, b);
    return b;
  }

 private:
  struct Cache {
    std::mutex mu;
    std::map<double, std::shared_ptr<const Ball>> balls;
  };
  NormScheme scheme_;
  std::shared_ptr<Cache> cache_;
};

/// Finitely many points with an explicit metric.
class FiniteSpace : public MetricSpace {
 public:
  FiniteSpace(std::string name, std::vector<Element> points,
              std::function<double(const Element&, const Element&)> dist)
      : name_(std::move(name)), points_(std::move(points)), dist_(std::move(dist)) {}

  const std::vector<Element>& points() const { return points_; }
  std::string name() const override { return name_; }
  double distance(const Element& x, const Element& y) const override { return dist_(x, y); }
  Element base() const override {
    if (points_.empty()) throw Error("empty finite space has no base point");
    return points_.front();
  }
  std::vector<Element> near(const Element& p, double r) const override {
    std::vector<Element> out;
    for (const auto& q : points_)
      if (dist_(p, q) <= r + 1e-12) out.push_back(q);
    return out;
  }

 private:
  std::string name_;
  std::vector<Element> points_;
  std::function<double(const Element&, const Element&)> dist_;
};

/// The lattice (1/q)Z^m with the max metric; points store numerators.
/// q = 1 gives Z^m with the l-infinity metric.
class GridSpace : public MetricSpace {
 public:
  GridSpace(std::int64_t m, std::int64_t q) : m_(m), q_(q) {
    if (m < 1 || q < 1) throw Error("grid needs m >= 1 and q >= 1");
  }

  std::int64_t dimension() const { return m_; }
  std::int64_t denominator() const { return q_; }

  std::string name() const override {
    return q_ == 1 ? "Z^" + std::to_string(m_) + " [max]"
                   : "(1/" + std::to_string(q_) + ")Z^" + std::to_string(m_) + " [max]";
  }
  double distance(const Element& x, const Element& y) const override {
    std::int64_t d = 0;
    for (std::int64_t i = 0; i < m_; ++i)
      d = std::max(d, checked::abs(checked::sub(x.c[static_cast<std::size_t>(i)], y.c[static_cast<std::size_t>(i)])));
    return static_cast<double>(d) / static_cast<double>(q_);
  }
  Element base() const override { return Element{std::vector<std::int64_t>(static_cast<std::size_t>(m_), 0)}; }
  std::vector<Element> near(const Element& p, double r) const override {
    std::int64_t k = static_cast<std::int64_t>(std::floor(r * static_cast<double>(q_) + 1e-9));
    std::vector<Element> out;
    Element cur = p;
    std::function<void(std::int64_t)> rec = [&](std::int64_t i) {
      if (i == m_) {
        out.push_back(cur);
        return;
      }
      auto idx = static_cast<std::size_t>(i);
      for (std::int64_t d = -k; d <= k; ++d) {
        cur.c[idx] = p.c[idx] + d;
        rec(i + 1);
      }
      cur.c[idx] = p.c[idx];
    };
    rec(0);
    return out;
  }
  std::string format(const Element& p) const override {
    std::string s = "(";
    for (std::size_t i = 0; i < p.c.size(); ++i) {
      s += i ? "," : "";
      s += q_ == 1 ? std::to_string(p.c[i]) : std::to_string(p.c[i]) + "/" + std::to_string(q_);
    }
    return s + ")";
  }

 private:
  std::int64_t m_, q_;
};

/// X x Y with the max metric. A point is [len_x, x..., y...].
class ProductSpace : public MetricSpace {
 public:
  ProductSpace(SpacePtr x, SpacePtr y) : x_(std::move(x)), y_(std::move(y)) {}

  static Element pair(const Element& a, const Element& b) {
    Element p;
    p.c.push_back(static_cast<std::int64_t>(a.c.size()));
    p.c.insert(p.c.end(), a.c.begin(), a.c.end());
    p.c.insert(p.c.end(), b.c.begin(), b.c.end());
    return p;
  }
  static std::pair<Element, Element> split(const Element& p) {
    auto n = static_cast<std::size_t>(p.c.at(0));
    Element a, b;
    a.c.assign(p.c.begin() + 1, p.c.begin() + 1 + static_cast<std::ptrdiff_t>(n));
    b.c.assign(p.c.begin() + 1 + static_cast<std::ptrdiff_t>(n), p.c.end());
    return {a, b};
  }

  const SpacePtr& first() const { return x_; }
  const SpacePtr& second() const { return y_; }

  std::string name() const override { return x_->name() + " x " + y_->name() + " [max]"; }
  double distance(const Element& p, const Element& q) const override {
    auto [a, b] = split(p);
    auto [c, d] = split(q);
    return std::max(x_->distance(a, c), y_->distance(b, d));
  }
  Element base() const override { return pair(x_->base(), y_->base()); }
  std::vector<Element> near(const Element& p, double r) const override {
    auto [a, b] = split(p);
    std::vector<Element> out;
    auto ys = y_->near(b, r);
    for (const auto& u : x_->near(a, r))
      for (const auto& v : ys) out.push_back(pair(u, v));
    return out;
  }
  std::string format(const Element& p) const override {
    auto [a, b] = split(p);
    return "(" + x_->format(a) + ", " + y_->format(b) + ")";
  }

 private:
  SpacePtr x_, y_;
};

inline SpacePtr group_space(const NormScheme& s) { return std::make_shared<GroupSpace>(s); }
inline SpacePtr group_space(const Group& g) { return group_space(NormScheme::standard(g)); }
inline SpacePtr group_space(const std::string& descriptor) {
  return std::make_shared<GroupSpace>(NormScheme::standard(Group::parse(descriptor)));
}

/// An evaluable map between metric spaces, with an optional declared inverse.
struct PointMap {
  std::string name;
  SpacePtr domain;
  SpacePtr codomain;
  std::function<Element(const Element&)> eval;
  std::function<Element(const Element&)> inverse;  // empty when none is declared
  bool bijective = false;                           // claimed, checked by the verifiers

  Element operator()(const Element& x) const { return eval(x); }
  bool has_inverse() const { return static_cast<bool>(inverse); }
};

inline PointMap identity_map(const SpacePtr& space) {
  auto id = [](const Element& x) { return x; };
  return {"identity", space, space, id, id, true};
}

/// x -> g(f(x)).
inline PointMap compose(const PointMap& g, const PointMap& f) {
  PointMap h;
  h.name = g.name + " o " + f.name;
  h.domain = f.domain;
  h.codomain = g.codomain;
  h.eval = [f, g](const Element& x) { return g.eval(f.eval(x)); };
  if (f.has_inverse() && g.has_inverse())
    h.inverse = [f, g](const Element& y) { return f.inverse(g.inverse(y)); };
  h.bijective = f.bijective && g.bijective;
  return h;
}

}  // namespace coarse
