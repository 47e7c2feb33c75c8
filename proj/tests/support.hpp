#pragma once

// Shared fixtures for the unit tests and the acceptance binary: random complex
// generators and a brute-force neighborhood oracle written straight from the
// set definitions (no shared code with the library's incidence index).

#include <algorithm>
#include <random>
#include <vector>

#include "gccn/complex.hpp"
#include "gccn/neighborhoods.hpp"

namespace gccn::fixtures {

inline bool strict_subset(const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
  if (a.size() >= b.size()) return false;
  for (VertexId v : a)
    if (std::find(b.begin(), b.end(), v) == b.end()) return false;
  return true;
}

/// Dense oracle: o[i][j] == true iff cell j is a neighbor of cell i.
inline std::vector<std::vector<bool>> oracle_neighbors(const CombinatorialComplex& cc,
                                                       const NeighborhoodSpec& spec) {
  const auto& c = cc.cells();
  const std::size_t n = c.size();
  std::vector<std::vector<bool>> o(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.rank_filter && c[i].rank != *spec.rank_filter) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const Cell& s = c[i];
      const Cell& t = c[j];
      bool hit = false;
      switch (spec.kind) {
        case NeighborhoodKind::up_incidence:
          hit = t.rank == s.rank + 1 && strict_subset(s.vertices, t.vertices);
          break;
        case NeighborhoodKind::down_incidence:
          hit = t.rank == s.rank - 1 && strict_subset(t.vertices, s.vertices);
          break;
        case NeighborhoodKind::up_adjacency:
          if (i != j && t.rank == s.rank)
            for (const Cell& d : c)
              if (d.rank == s.rank + 1 && strict_subset(s.vertices, d.vertices) &&
                  strict_subset(t.vertices, d.vertices))
                hit = true;
          break;
        case NeighborhoodKind::down_adjacency:
          if (i != j && t.rank == s.rank)
            for (const Cell& d : c)
              if (d.rank == s.rank - 1 && strict_subset(d.vertices, s.vertices) &&
                  strict_subset(d.vertices, t.vertices))
                hit = true;
          break;
      }
      o[i][j] = hit;
    }
  }
  return o;
}

inline std::size_t oracle_nnz(const std::vector<std::vector<bool>>& o) {
  std::size_t k = 0;
  for (const auto& r : o) k += static_cast<std::size_t>(std::count(r.begin(), r.end(), true));
  return k;
}

inline bool matches_oracle(const NeighborhoodMatrix& m, const std::vector<std::vector<bool>>& o) {
  if (m.n != o.size()) return false;
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.n; ++j)
      if (m.contains(static_cast<CellId>(i), static_cast<CellId>(j)) != o[i][j]) return false;
  return true;
}

/// Random complex with at most `max_cells` cells. Rank is a nondecreasing
/// function of cell size with rank 0 for singletons, so containment never
/// violates rank order.
template <class Rng>
CombinatorialComplex random_complex(Rng& rng, std::size_t max_cells = 15, int max_vertices = 5) {
  std::uniform_int_distribution<int> nv(1, max_vertices);
  const int n = nv(rng);
  std::vector<Rank> rank_of_size(static_cast<std::size_t>(n) + 1, 0);
  std::discrete_distribution<int> step({2, 6, 1});  // mostly +1, sometimes flat or +2
  for (int s = 2; s <= n; ++s)
    rank_of_size[static_cast<std::size_t>(s)] = rank_of_size[static_cast<std::size_t>(s - 1)] + step(rng);

  std::vector<std::vector<VertexId>> subsets;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) < 2) continue;
    std::vector<VertexId> vs;
    for (int v = 0; v < n; ++v)
      if (mask & (1u << v)) vs.push_back(v);
    subsets.push_back(std::move(vs));
  }
  std::shuffle(subsets.begin(), subsets.end(), rng);
  std::bernoulli_distribution keep(0.5);
  std::vector<RankedVertexSet> cells;
  std::size_t total = static_cast<std::size_t>(n);
  for (auto& s : subsets) {
    if (total >= max_cells) break;
    if (!keep(rng)) continue;
    const Rank r = rank_of_size[s.size()];
    cells.push_back({std::move(s), r});
    ++total;
  }
  return build_complex(n, std::move(cells));
}

/// Random complex closed under taking faces (a simplicial complex), so that
/// every neighborhood kind has plenty of entries.
template <class Rng>
CombinatorialComplex random_simplicial(Rng& rng, int max_vertices = 5, std::size_t max_cells = 15) {
  std::uniform_int_distribution<int> nv(2, max_vertices);
  const int n = nv(rng);
  std::vector<std::vector<VertexId>> chosen;
  std::bernoulli_distribution keep(0.45);
  std::size_t total = static_cast<std::size_t>(n);
  auto present = [&](const std::vector<VertexId>& s) {
    return s.size() == 1 || std::find(chosen.begin(), chosen.end(), s) != chosen.end();
  };
  for (int size = 2; size <= std::min(n, 4); ++size) {
    std::vector<std::vector<VertexId>> level;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      if (__builtin_popcount(mask) != size) continue;
      std::vector<VertexId> vs;
      for (int v = 0; v < n; ++v)
        if (mask & (1u << v)) vs.push_back(v);
      level.push_back(std::move(vs));
    }
    std::shuffle(level.begin(), level.end(), rng);
    for (auto& s : level) {
      if (total >= max_cells) break;
      bool faces_ok = true;
      for (std::size_t drop = 0; drop < s.size() && faces_ok; ++drop) {
        auto f = s;
        f.erase(f.begin() + static_cast<std::ptrdiff_t>(drop));
        faces_ok = present(f);
      }
      if (faces_ok && keep(rng)) {
        chosen.push_back(s);
        ++total;
      }
    }
  }
  std::vector<RankedVertexSet> cells;
  for (auto& s : chosen) cells.push_back({s, static_cast<Rank>(s.size()) - 1});
  return build_complex(n, std::move(cells));
}

inline CombinatorialComplex triangle_fixture() {
  return build_complex(3, {{{0, 1}, 1}, {{0, 2}, 1}, {{1, 2}, 1}, {{0, 1, 2}, 2}});
}

inline std::vector<NeighborhoodSpec> all_unfiltered_specs() {
  return {{NeighborhoodKind::up_incidence, {}},
          {NeighborhoodKind::down_incidence, {}},
          {NeighborhoodKind::up_adjacency, {}},
          {NeighborhoodKind::down_adjacency, {}}};
}

}  // namespace gccn::fixtures
