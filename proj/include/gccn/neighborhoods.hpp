#pragma once

#include <algorithm>
#include <charconv>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gccn/complex.hpp"
#include "gccn/error.hpp"

namespace gccn {

enum class NeighborhoodKind { up_incidence, down_incidence, up_adjacency, down_adjacency };

constexpr std::string_view to_string(NeighborhoodKind k) noexcept {
  switch (k) {
    case NeighborhoodKind::up_incidence: return "up_incidence";
    case NeighborhoodKind::down_incidence: return "down_incidence";
    case NeighborhoodKind::up_adjacency: return "up_adjacency";
    case NeighborhoodKind::down_adjacency: return "down_adjacency";
  }
  return "?";
}

/// One neighborhood function. With `rank_filter` set it acts only on cells of
/// that rank and maps every other cell to the empty set.
struct NeighborhoodSpec {
  NeighborhoodKind kind = NeighborhoodKind::up_adjacency;
  std::optional<Rank> rank_filter;

  friend bool operator==(const NeighborhoodSpec&, const NeighborhoodSpec&) = default;
};

/// Renders "kind" or "kind@r".
inline std::string to_string(const NeighborhoodSpec& s) {
  std::string out(to_string(s.kind));
  if (s.rank_filter) out += "@" + std::to_string(*s.rank_filter);
  return out;
}

/// Parses "up_adjacency", "down_incidence@1", ...
inline NeighborhoodSpec parse_spec(std::string_view text) {
  auto at = text.find('@');
  std::string_view name = text.substr(0, at);
  NeighborhoodSpec spec;
  bool found = false;
  for (auto k : {NeighborhoodKind::up_incidence, NeighborhoodKind::down_incidence,
                 NeighborhoodKind::up_adjacency, NeighborhoodKind::down_adjacency}) {
    if (name == to_string(k)) {
      spec.kind = k;
      found = true;
    }
  }
  if (!found) throw error(errc::parse_error, "unknown neighborhood '" + std::string(name) + "'");
  if (at != std::string_view::npos) {
    std::string_view digits = text.substr(at + 1);
    int r = -1;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), r);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty() || r < 0)
      throw error(errc::parse_error, "bad rank suffix in '" + std::string(text) + "'");
    spec.rank_filter = r;
  }
  return spec;
}

/// Sparse boolean |C|x|C| relation; rows[i] lists the ids j with sigma_j in N(sigma_i),
/// sorted ascending.
struct NeighborhoodMatrix {
  std::size_t n = 0;
  std::vector<std::vector<CellId>> rows;
  std::vector<NeighborhoodSpec> specs;  // one entry, or the constituents of a union

  std::size_t nnz() const {
    std::size_t s = 0;
    for (const auto& r : rows) s += r.size();
    return s;
  }
  bool contains(CellId i, CellId j) const {
    const auto& r = rows.at(static_cast<std::size_t>(i));
    return std::binary_search(r.begin(), r.end(), j);
  }
  bool same_entries(const NeighborhoodMatrix& o) const { return n == o.n && rows == o.rows; }

  NeighborhoodMatrix transposed() const {
    NeighborhoodMatrix t{n, std::vector<std::vector<CellId>>(n), specs};
    for (std::size_t i = 0; i < n; ++i)
      for (CellId j : rows[i]) t.rows[static_cast<std::size_t>(j)].push_back(static_cast<CellId>(i));
    return t;  // rows come out sorted since i increases
  }
  bool is_symmetric() const { return same_entries(transposed()); }

  Tensor2 dense() const {
    Tensor2 d(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (CellId j : rows[i]) d(i, static_cast<std::size_t>(j)) = 1.0;
    return d;
  }
};

namespace detail {

// Up-incidence lists: up[i] = cells of rank rk(i)+1 strictly containing cell i.
inline std::vector<std::vector<CellId>> up_incidence_lists(const CombinatorialComplex& cc) {
  const auto& cells = cc.cells();
  std::vector<std::vector<CellId>> by_min_vertex(static_cast<std::size_t>(cc.vertex_count()));
  for (std::size_t i = 0; i < cells.size(); ++i)
    by_min_vertex[static_cast<std::size_t>(cells[i].vertices.front())].push_back(
        static_cast<CellId>(i));
  std::vector<std::vector<CellId>> up(cells.size());
  for (std::size_t t = 0; t < cells.size(); ++t) {
    const Cell& tau = cells[t];
    for (VertexId v : tau.vertices)
      for (CellId s : by_min_vertex[static_cast<std::size_t>(v)]) {
        const Cell& sigma = cells[static_cast<std::size_t>(s)];
        if (sigma.rank + 1 == tau.rank && sigma.vertices.size() < tau.vertices.size() &&
            is_subset(sigma.vertices, tau.vertices))
          up[static_cast<std::size_t>(s)].push_back(static_cast<CellId>(t));
      }
  }
  for (auto& r : up) std::sort(r.begin(), r.end());
  return up;
}

inline std::vector<std::vector<CellId>> invert_lists(const std::vector<std::vector<CellId>>& l) {
  std::vector<std::vector<CellId>> inv(l.size());
  for (std::size_t i = 0; i < l.size(); ++i)
    for (CellId j : l[i]) inv[static_cast<std::size_t>(j)].push_back(static_cast<CellId>(i));
  return inv;
}

// Two-hop relation through a shared intermediate cell, excluding the cell itself.
inline std::vector<std::vector<CellId>> via(const std::vector<std::vector<CellId>>& first,
                                            const std::vector<std::vector<CellId>>& second) {
  std::vector<std::vector<CellId>> out(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    auto& r = out[i];
    for (CellId d : first[i])
      for (CellId t : second[static_cast<std::size_t>(d)])
        if (static_cast<std::size_t>(t) != i) r.push_back(t);
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return out;
}

}  // namespace detail

/// Matrix representation of one neighborhood function on cc.
inline NeighborhoodMatrix neighborhood_matrix(const CombinatorialComplex& cc,
                                              const NeighborhoodSpec& spec) {
  if (spec.rank_filter && (*spec.rank_filter < 0 || *spec.rank_filter > cc.dim()))
    throw error(errc::rank_filter_out_of_range,
                "rank " + std::to_string(*spec.rank_filter) + " outside 0.." +
                    std::to_string(cc.dim()));
  auto up = detail::up_incidence_lists(cc);
  std::vector<std::vector<CellId>> rows;
  switch (spec.kind) {
    case NeighborhoodKind::up_incidence: rows = std::move(up); break;
    case NeighborhoodKind::down_incidence: rows = detail::invert_lists(up); break;
    case NeighborhoodKind::up_adjacency: {
      auto down = detail::invert_lists(up);
      rows = detail::via(up, down);
      break;
    }
    case NeighborhoodKind::down_adjacency: {
      auto down = detail::invert_lists(up);
      rows = detail::via(down, up);
      break;
    }
  }
  if (spec.rank_filter)
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (cc.cells()[i].rank != *spec.rank_filter) rows[i].clear();
  return NeighborhoodMatrix{cc.size(), std::move(rows), {spec}};
}

/// Entrywise OR of the constituent matrices (the single-graph neighborhood N_tot).
inline NeighborhoodMatrix union_neighborhood(const CombinatorialComplex& cc,
                                             const std::vector<NeighborhoodSpec>& specs) {
  if (specs.empty()) throw error(errc::empty_spec_list, "union of zero neighborhoods");
  NeighborhoodMatrix out{cc.size(), std::vector<std::vector<CellId>>(cc.size()), specs};
  for (const auto& s : specs) {
    auto m = neighborhood_matrix(cc, s);
    for (std::size_t i = 0; i < cc.size(); ++i) {
      std::vector<CellId> merged;
      std::set_union(out.rows[i].begin(), out.rows[i].end(), m.rows[i].begin(), m.rows[i].end(),
                     std::back_inserter(merged));
      out.rows[i] = std::move(merged);
    }
  }
  return out;
}

/// Named neighborhood collections used for benchmarking; three are per-rank.
struct NeighborhoodPreset {
  std::string_view name;
  std::vector<NeighborhoodSpec> specs;
};

inline const std::vector<NeighborhoodPreset>& neighborhood_presets() {
  using K = NeighborhoodKind;
  static const std::vector<NeighborhoodPreset> presets = {
      {"adj0_adj1", {{K::up_adjacency, 0}, {K::up_adjacency, 1}}},
      {"adj0_dinc2", {{K::up_adjacency, 0}, {K::down_incidence, 2}}},
      {"uadj_uinc", {{K::up_adjacency, {}}, {K::up_incidence, {}}}},
      {"uadj_dadj_dinc", {{K::up_adjacency, {}}, {K::down_adjacency, {}}, {K::down_incidence, {}}}},
      {"uadj", {{K::up_adjacency, {}}}},
      {"uadj_dadj1", {{K::up_adjacency, {}}, {K::down_adjacency, 1}}},
      {"uadj_dadj", {{K::up_adjacency, {}}, {K::down_adjacency, {}}}},
      {"uadj_dinc", {{K::up_adjacency, {}}, {K::down_incidence, {}}}},
      {"uadj_dadj_uinc", {{K::up_adjacency, {}}, {K::down_adjacency, {}}, {K::up_incidence, {}}}},
      {"uadj_dadj_dinc_uinc",
       {{K::up_adjacency, {}}, {K::down_adjacency, {}}, {K::down_incidence, {}},
        {K::up_incidence, {}}}},
  };
  return presets;
}

inline const std::vector<NeighborhoodSpec>& preset_specs(std::string_view name) {
  for (const auto& p : neighborhood_presets())
    if (p.name == name) return p.specs;
  throw error(errc::unknown_name, "no neighborhood preset named '" + std::string(name) + "'");
}

}  // namespace gccn
