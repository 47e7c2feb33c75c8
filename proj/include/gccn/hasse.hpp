#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gccn/complex.hpp"
#include "gccn/error.hpp"
#include "gccn/neighborhoods.hpp"

namespace gccn {

/// Directed graph over a subset of cells. Edges are (src, dst) in local node
/// indices and point from the neighbor tau to the receiving cell sigma.
struct DirectedCellGraph {
  std::vector<CellId> node_cells;  // strictly increasing
  std::vector<std::pair<int, int>> edges;
  std::optional<NeighborhoodSpec> origin_spec;

  std::size_t node_count() const noexcept { return node_cells.size(); }
  std::size_t edge_count() const noexcept { return edges.size(); }

  /// Local index of a global cell id, or -1.
  int local_index(CellId cell) const {
    auto it = std::lower_bound(node_cells.begin(), node_cells.end(), cell);
    return (it != node_cells.end() && *it == cell) ? static_cast<int>(it - node_cells.begin())
                                                   : -1;
  }

  std::vector<int> in_degrees() const {
    std::vector<int> deg(node_count(), 0);
    for (auto [s, d] : edges) ++deg[static_cast<std::size_t>(d)];
    return deg;
  }

  /// in[v] = sources u of edges (u, v), sorted.
  std::vector<std::vector<int>> in_neighbors() const {
    std::vector<std::vector<int>> in(node_count());
    for (auto [s, d] : edges) in[static_cast<std::size_t>(d)].push_back(s);
    for (auto& r : in) std::sort(r.begin(), r.end());
    return in;
  }

  /// Local indices of nodes that receive at least one message.
  std::vector<int> destinations() const {
    auto deg = in_degrees();
    std::vector<int> out;
    for (std::size_t i = 0; i < deg.size(); ++i)
      if (deg[i] > 0) out.push_back(static_cast<int>(i));
    return out;
  }

  /// Edges as (global src, global dst), sorted.
  std::vector<std::pair<CellId, CellId>> global_edges() const {
    std::vector<std::pair<CellId, CellId>> g;
    g.reserve(edges.size());
    for (auto [s, d] : edges)
      g.emplace_back(node_cells[static_cast<std::size_t>(s)], node_cells[static_cast<std::size_t>(d)]);
    std::sort(g.begin(), g.end());
    return g;
  }
};

/// One strict graph per neighborhood, in spec order.
struct HasseEnsemble {
  std::vector<DirectedCellGraph> graphs;
  std::size_t complex_size = 0;
};

namespace detail {

inline DirectedCellGraph graph_from_matrix(const NeighborhoodMatrix& m, bool all_cells) {
  DirectedCellGraph g;
  if (all_cells) {
    g.node_cells.resize(m.n);
    for (std::size_t i = 0; i < m.n; ++i) g.node_cells[i] = static_cast<CellId>(i);
  } else {
    std::vector<bool> member(m.n, false);
    for (std::size_t i = 0; i < m.n; ++i) {
      if (m.rows[i].empty()) continue;
      member[i] = true;
      for (CellId t : m.rows[i]) member[static_cast<std::size_t>(t)] = true;
    }
    for (std::size_t i = 0; i < m.n; ++i)
      if (member[i]) g.node_cells.push_back(static_cast<CellId>(i));
  }
  for (std::size_t i = 0; i < m.n; ++i) {
    if (m.rows[i].empty()) continue;
    const int dst = g.local_index(static_cast<CellId>(i));
    for (CellId t : m.rows[i]) g.edges.emplace_back(g.local_index(t), dst);
  }
  return g;
}

}  // namespace detail

/// Strictly augmented Hasse graph of one neighborhood. The node set holds every
/// cell with a non-empty neighborhood plus every cell that appears as someone's
/// neighbor, so source-only cells can emit messages. A rank filter above dim
/// selects no cells and yields the empty graph.
inline DirectedCellGraph strict_hasse(const CombinatorialComplex& cc, const NeighborhoodSpec& spec) {
  if (spec.rank_filter && *spec.rank_filter > cc.dim()) {
    DirectedCellGraph empty;
    empty.origin_spec = spec;
    return empty;
  }
  auto g = detail::graph_from_matrix(neighborhood_matrix(cc, spec), false);
  g.origin_spec = spec;
  return g;
}

/// Single augmented Hasse graph: all cells as nodes, union of the strict edges.
inline DirectedCellGraph augmented_hasse(const CombinatorialComplex& cc,
                                         const std::vector<NeighborhoodSpec>& specs) {
  if (specs.empty()) throw error(errc::empty_spec_list, "augmented Hasse graph needs a spec");
  NeighborhoodMatrix acc{cc.size(), std::vector<std::vector<CellId>>(cc.size()), specs};
  for (const auto& s : specs) {
    if (s.rank_filter && *s.rank_filter > cc.dim()) continue;
    auto m = neighborhood_matrix(cc, s);
    for (std::size_t i = 0; i < cc.size(); ++i) {
      auto& r = acc.rows[i];
      r.insert(r.end(), m.rows[i].begin(), m.rows[i].end());
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
    }
  }
  return detail::graph_from_matrix(acc, true);
}

inline HasseEnsemble expand_ensemble(const CombinatorialComplex& cc,
                                     const std::vector<NeighborhoodSpec>& specs) {
  if (specs.empty()) throw error(errc::empty_spec_list, "ensemble needs at least one spec");
  HasseEnsemble ens;
  ens.complex_size = cc.size();
  ens.graphs.reserve(specs.size());
  for (const auto& s : specs) ens.graphs.push_back(strict_hasse(cc, s));
  return ens;
}

/// Disjoint union of ensembles built with the same spec list; cell ids of the
/// k-th ensemble are shifted by the sizes of the ones before it.
inline HasseEnsemble concat_ensembles(const std::vector<const HasseEnsemble*>& parts) {
  HasseEnsemble out;
  if (parts.empty()) return out;
  const std::size_t n_specs = parts.front()->graphs.size();
  out.graphs.resize(n_specs);
  for (std::size_t s = 0; s < n_specs; ++s) out.graphs[s].origin_spec = parts.front()->graphs[s].origin_spec;
  for (const HasseEnsemble* e : parts) {
    if (e->graphs.size() != n_specs)
      throw error(errc::config_mismatch, "ensembles built from different spec lists");
    const auto offset = static_cast<CellId>(out.complex_size);
    for (std::size_t s = 0; s < n_specs; ++s) {
      auto& dst = out.graphs[s];
      const auto& src = e->graphs[s];
      const int node_offset = static_cast<int>(dst.node_cells.size());
      for (CellId c : src.node_cells) dst.node_cells.push_back(c + offset);
      for (auto [a, b] : src.edges) dst.edges.emplace_back(a + node_offset, b + node_offset);
    }
    out.complex_size += e->complex_size;
  }
  return out;
}

/// Edge-list dump: header "nodes=<n> cells=<ids>" then one "src dst" per line.
inline void write_edge_list(std::ostream& os, const DirectedCellGraph& g) {
  os << "nodes=" << g.node_count() << " cells=";
  for (std::size_t i = 0; i < g.node_cells.size(); ++i) os << (i ? "," : "") << g.node_cells[i];
  os << '\n';
  for (auto [s, d] : g.edges) os << s << ' ' << d << '\n';
}

inline DirectedCellGraph read_edge_list(std::istream& is) {
  DirectedCellGraph g;
  std::string header;
  if (!std::getline(is, header) || header.rfind("nodes=", 0) != 0)
    throw error(errc::parse_error, "edge list must start with 'nodes=<n> cells=...'");
  std::istringstream hs(header.substr(6));
  std::size_t n = 0;
  std::string cells_field;
  if (!(hs >> n >> cells_field) || cells_field.rfind("cells=", 0) != 0) {
    if (n != 0) throw error(errc::parse_error, "malformed edge list header '" + header + "'");
    cells_field = "cells=";
  }
  std::istringstream cs(cells_field.substr(6));
  std::string tok;
  while (std::getline(cs, tok, ','))
    if (!tok.empty()) g.node_cells.push_back(std::stoi(tok));
  if (g.node_cells.size() != n)
    throw error(errc::parse_error, "header lists " + std::to_string(g.node_cells.size()) +
                                       " cells but nodes=" + std::to_string(n));
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int s = -1, d = -1;
    if (!(ls >> s >> d) || s < 0 || d < 0 || static_cast<std::size_t>(s) >= n ||
        static_cast<std::size_t>(d) >= n)
      throw error(errc::malformed_line, "edge list line " + std::to_string(line_no));
    g.edges.emplace_back(s, d);
  }
  return g;
}

}  // namespace gccn
