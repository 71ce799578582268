#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "coarse/groups.hpp"

namespace testing_support {

inline constexpr std::uint64_t kSeed = 20240611;

/// Random element with coordinates of size about `scale`.
inline coarse::Element random_element(const coarse::Group& g, std::mt19937_64& rng, std::int64_t scale = 20) {
  using coarse::FactorKind;
  std::vector<std::vector<std::int64_t>> parts;
  auto uni = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  for (const auto& f : g.factors()) {
    std::vector<std::int64_t> p;
    switch (f.kind) {
      case FactorKind::Free: p = {uni(-scale, scale)}; break;
      case FactorKind::Cyclic: p = {uni(0, f.param - 1)}; break;
      case FactorKind::CyclicInf: {
        std::int64_t n = uni(0, 6);
        for (std::int64_t i = 0; i < n; ++i) p.push_back(uni(0, f.param - 1));
        break;
      }
      case FactorKind::FreeInf: {
        std::int64_t n = uni(0, 5);
        for (std::int64_t i = 0; i < n; ++i) p.push_back(uni(-scale / 4, scale / 4));
        break;
      }
      case FactorKind::QmodZ: {
        static const std::int64_t dens[] = {1, 2, 3, 4, 5, 6, 8, 9, 10, 12, 24, 30, 120, 720};
        std::int64_t b = dens[uni(0, 13)];
        p = {uni(0, b - 1), b};
        break;
      }
      case FactorKind::Unitriangular: {
        std::size_t w = f.width();
        for (std::size_t i = 0; i < w; ++i) p.push_back(uni(-scale, scale));
        break;
      }
    }
    parts.push_back(std::move(p));
  }
  return g.make(parts);
}

/// UT(n) element as a full integer matrix (row-major n*n), independent of
/// the library's packed encoding.
inline std::vector<std::int64_t> ut_matrix(std::int64_t n, const std::vector<std::int64_t>& packed) {
  std::vector<std::int64_t> m(static_cast<std::size_t>(n * n), 0);
  std::size_t k = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    m[static_cast<std::size_t>(i * n + i)] = 1;
    for (std::int64_t j = i + 1; j < n; ++j) m[static_cast<std::size_t>(i * n + j)] = packed[k++];
  }
  return m;
}

inline std::vector<std::int64_t> matmul(std::int64_t n, const std::vector<std::int64_t>& a,
                                        const std::vector<std::int64_t>& b) {
  std::vector<std::int64_t> c(static_cast<std::size_t>(n * n), 0);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t k = 0; k < n; ++k)
      for (std::int64_t j = 0; j < n; ++j)
        c[static_cast<std::size_t>(i * n + j)] +=
            a[static_cast<std::size_t>(i * n + k)] * b[static_cast<std::size_t>(k * n + j)];
  return c;
}

}  // namespace testing_support
