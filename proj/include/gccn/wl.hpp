#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "gccn/complex.hpp"
#include "gccn/error.hpp"
#include "gccn/hasse.hpp"
#include "gccn/neighborhoods.hpp"

namespace gccn {

/// Color per unit (cell, graph node or k-set). Colors are dense 0..classes-1
/// in order of first occurrence; `round` counts partition-changing rounds.
struct Coloring {
  std::vector<int> color_of;
  int round = 0;

  std::size_t size() const noexcept { return color_of.size(); }
  int class_count() const {
    return color_of.empty() ? 0 : *std::max_element(color_of.begin(), color_of.end()) + 1;
  }

  static Coloring uniform(std::size_t n) { return Coloring{std::vector<int>(n, 0), 0}; }
  static Coloring distinct(std::size_t n) {
    Coloring c{std::vector<int>(n), 0};
    std::iota(c.color_of.begin(), c.color_of.end(), 0);
    return c;
  }
  friend bool operator==(const Coloring&, const Coloring&) = default;
};

/// Relabels colors densely by first occurrence.
inline std::vector<int> canonical_colors(const std::vector<int>& raw) {
  std::map<int, int> ids;
  std::vector<int> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = ids.emplace(raw[i], static_cast<int>(ids.size())).first->second;
  return out;
}

/// Injective map from color signatures to dense ids. Histograms built against
/// the same table are comparable.
class ColorTable {
 public:
  ColorTable() : id_(next_id()) {}
  ColorTable(const ColorTable&) = delete;
  ColorTable& operator=(const ColorTable&) = delete;

  int intern(const std::vector<std::int64_t>& signature) {
    return ids_.emplace(signature, static_cast<int>(ids_.size())).first->second;
  }
  std::uint64_t id() const noexcept { return id_; }
  std::size_t size() const noexcept { return ids_.size(); }

 private:
  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter++;
  }
  std::uint64_t id_;
  std::map<std::vector<std::int64_t>, int> ids_;
};

/// Process-wide table used when no table is passed explicitly.
inline ColorTable& default_color_table() {
  static ColorTable table;
  return table;
}

/// Color counts per round, from initialization to the first round that leaves
/// the partition unchanged (inclusive).
struct ColorHistogram {
  std::uint64_t table_id = 0;
  std::vector<std::map<int, std::size_t>> rounds;
  int stable_round = 0;
  std::size_t units = 0;

  const std::map<int, std::size_t>& final_counts() const { return rounds.back(); }
  const std::map<int, std::size_t>& initial_counts() const { return rounds.front(); }
  std::size_t class_count() const { return rounds.empty() ? 0 : final_counts().size(); }

  /// Class sizes of the stable coloring, largest first.
  std::vector<std::size_t> sorted_counts() const {
    std::vector<std::size_t> c;
    if (!rounds.empty())
      for (auto [color, n] : final_counts()) c.push_back(n);
    std::sort(c.rbegin(), c.rend());
    return c;
  }
};

/// True iff the two refinements differ at some round. Both must come from the
/// same color table.
inline bool distinguishable(const ColorHistogram& a, const ColorHistogram& b) {
  if (a.table_id != b.table_id)
    throw error(errc::histogram_mismatch, "histograms were built with different color tables");
  if (a.units != b.units || a.rounds.size() != b.rounds.size()) return true;
  for (std::size_t r = 0; r < a.rounds.size(); ++r)
    if (a.rounds[r] != b.rounds[r]) return true;
  return false;
}

namespace detail {

enum : std::int64_t { sig_init = 0, sig_refine = 1, sig_kinit = 2 };

struct Refinement {
  std::vector<std::vector<int>> history;  // interned colors per round
  int stable_round = 0;
};

inline std::size_t distinct_count(const std::vector<int>& c) {
  std::vector<int> s = c;
  std::sort(s.begin(), s.end());
  return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
}

// c' = intern(c, sorted multiset of neighbor colors), until the class count stops growing.
inline Refinement refine(const std::vector<std::vector<int>>& neighbors, std::vector<int> init, ColorTable& table) {
  Refinement out;
  out.history.push_back(std::move(init));
  std::vector<std::int64_t> sig;
  for (;;) {
    const auto& cur = out.history.back();
    std::vector<int> next(cur.size());
    for (std::size_t u = 0; u < cur.size(); ++u) {
      sig.assign({sig_refine, cur[u]});
      const std::size_t head = sig.size();
      for (int v : neighbors[u]) sig.push_back(cur[static_cast<std::size_t>(v)]);
      std::sort(sig.begin() + static_cast<std::ptrdiff_t>(head), sig.end());
      next[u] = table.intern(sig);
    }
    const bool changed = distinct_count(next) != distinct_count(cur);
    out.history.push_back(std::move(next));
    if (!changed) break;
    ++out.stable_round;
  }
  return out;
}

inline ColorHistogram histogram_of(const Refinement& r, const ColorTable& table) {
  ColorHistogram h;
  h.table_id = table.id();
  h.stable_round = r.stable_round;
  h.units = r.history.front().size();
  for (const auto& colors : r.history) {
    std::map<int, std::size_t> counts;
    for (int c : colors) ++counts[c];
    h.rounds.push_back(std::move(counts));
  }
  return h;
}

}  // namespace detail

/// Classical color refinement on a directed graph: a node's new color hashes
/// its old color with the multiset of its in-neighbors' colors.
inline Coloring wl_refine(const DirectedCellGraph& g, const Coloring& init) {
  if (init.size() != g.node_count())
    throw error(errc::uncolored_node, std::to_string(init.size()) + " colors for " +
                                          std::to_string(g.node_count()) + " nodes");
  for (int c : init.color_of)
    if (c < 0) throw error(errc::uncolored_node, "negative color");
  const auto in = g.in_neighbors();
  Coloring cur{canonical_colors(init.color_of), 0};
  int classes = cur.class_count();
  for (std::size_t step = 0; step <= g.node_count(); ++step) {
    std::map<std::pair<int, std::vector<int>>, int> ids;
    std::vector<int> next(g.node_count());
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      std::vector<int> ms;
      for (int u : in[v]) ms.push_back(cur.color_of[static_cast<std::size_t>(u)]);
      std::sort(ms.begin(), ms.end());
      next[v] = ids.emplace(std::make_pair(cur.color_of[v], std::move(ms)), static_cast<int>(ids.size())).first->second;
    }
    next = canonical_colors(next);
    const int next_classes = next.empty() ? 0 : *std::max_element(next.begin(), next.end()) + 1;
    if (next_classes == classes) break;
    cur.color_of = std::move(next);
    classes = next_classes;
    ++cur.round;
  }
  return cur;
}

/// Cells taking part in a neighborhood: non-empty rows and the cells they list.
inline std::vector<CellId> member_cells(const NeighborhoodMatrix& m) {
  std::vector<bool> member(m.n, false);
  for (std::size_t i = 0; i < m.n; ++i) {
    if (m.rows[i].empty()) continue;
    member[i] = true;
    for (CellId t : m.rows[i]) member[static_cast<std::size_t>(t)] = true;
  }
  std::vector<CellId> out;
  for (std::size_t i = 0; i < m.n; ++i)
    if (member[i]) out.push_back(static_cast<CellId>(i));
  return out;
}

namespace detail {

inline void check_labels(const CombinatorialComplex& cc, const Coloring& labels) {
  if (labels.size() != cc.size())
    throw error(errc::uncolored_node, std::to_string(labels.size()) + " labels for " +
                                          std::to_string(cc.size()) + " cells");
  for (int c : labels.color_of)
    if (c < 0) throw error(errc::uncolored_node, "negative label");
}

struct CcwlRun {
  std::vector<CellId> members;
  Refinement refinement;
};

// Works on the neighborhood relation itself: cell sigma hears the cells in N(sigma).
inline CcwlRun ccwl_run(const CombinatorialComplex& cc, const NeighborhoodSpec& spec, const Coloring& labels,
                        ColorTable& table) {
  check_labels(cc, labels);
  CcwlRun run;
  if (spec.rank_filter && *spec.rank_filter > cc.dim()) {
    run.refinement.history.emplace_back();
    return run;
  }
  const auto m = neighborhood_matrix(cc, spec);
  run.members = member_cells(m);
  std::vector<int> slot(cc.size(), -1);
  for (std::size_t k = 0; k < run.members.size(); ++k) slot[static_cast<std::size_t>(run.members[k])] = static_cast<int>(k);
  std::vector<std::vector<int>> nbrs(run.members.size());
  std::vector<int> init(run.members.size());
  for (std::size_t k = 0; k < run.members.size(); ++k) {
    const auto c = static_cast<std::size_t>(run.members[k]);
    for (CellId t : m.rows[c]) nbrs[k].push_back(slot[static_cast<std::size_t>(t)]);
    init[k] = table.intern({sig_init, labels.color_of[c]});
  }
  run.refinement = refine(nbrs, std::move(init), table);
  return run;
}

}  // namespace detail

/// Stable CCWL partition of the cells taking part in `spec`, reported over all
/// cells; cells outside the neighborhood get color -1.
inline Coloring ccwl_coloring(const CombinatorialComplex& cc, const NeighborhoodSpec& spec, const Coloring& labels) {
  ColorTable table;
  auto run = detail::ccwl_run(cc, spec, labels, table);
  const auto& last = run.refinement.history.back();
  const auto dense = canonical_colors(last);
  Coloring out{std::vector<int>(cc.size(), -1), run.refinement.stable_round};
  for (std::size_t k = 0; k < run.members.size(); ++k) out.color_of[static_cast<std::size_t>(run.members[k])] = dense[k];
  return out;
}

/// CCWL histogram over the cells taking part in `spec`.
inline ColorHistogram ccwl(const CombinatorialComplex& cc, const NeighborhoodSpec& spec, const Coloring& labels,
                           ColorTable& table = default_color_table()) {
  return detail::histogram_of(detail::ccwl_run(cc, spec, labels, table).refinement, table);
}

// ---------------------------------------------------------------------------
// k-sets

using KSet = std::vector<int>;

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Colex rank of a sorted k-set.
inline std::size_t kset_rank(const KSet& s) {
  std::size_t r = 0;
  for (std::size_t i = 0; i < s.size(); ++i) r += binomial(static_cast<std::uint64_t>(s[i]), i + 1);
  return r;
}

/// All k-sets of 0..n-1 in colex order.
inline std::vector<KSet> all_ksets(int n, int k) {
  std::vector<KSet> out;
  if (k < 1 || k > n) return out;
  KSet s(static_cast<std::size_t>(k));
  std::iota(s.begin(), s.end(), 0);
  for (;;) {
    out.push_back(s);
    std::size_t i = 0;
    while (i + 1 < s.size() && s[i] + 1 == s[i + 1]) ++i;
    if (i + 1 == s.size() && s[i] + 1 == n) break;
    ++s[i];
    for (std::size_t j = 0; j < i; ++j) s[j] = static_cast<int>(j);
  }
  return out;
}

/// k-sets of 0..universe_size-1 sharing exactly k-1 members with s, sorted.
inline std::vector<KSet> kset_neighbors(int universe_size, const KSet& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0 || s[i] >= universe_size)
      throw error(errc::out_of_range, "member " + std::to_string(s[i]) + " outside universe of " +
                                          std::to_string(universe_size));
    if (i > 0 && s[i] <= s[i - 1]) throw error(errc::invalid_argument, "k-set must be strictly increasing");
  }
  std::vector<KSet> out;
  for (std::size_t drop = 0; drop < s.size(); ++drop)
    for (int x = 0; x < universe_size; ++x) {
      if (std::binary_search(s.begin(), s.end(), x)) continue;
      KSet t = s;
      t[drop] = x;
      std::sort(t.begin(), t.end());
      out.push_back(std::move(t));
    }
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

// Smallest (labels, directed adjacency bits) code over all orderings of the members.
inline std::vector<std::int64_t> kset_type(const KSet& s, const std::vector<int>& label,
                                           const std::vector<std::vector<bool>>& adj) {
  std::vector<std::size_t> perm(s.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::int64_t> best;
  do {
    std::vector<std::int64_t> code;
    for (std::size_t i : perm) code.push_back(label[static_cast<std::size_t>(s[i])]);
    for (std::size_t i : perm)
      for (std::size_t j : perm)
        if (i != j) code.push_back(adj[static_cast<std::size_t>(s[i])][static_cast<std::size_t>(s[j])] ? 1 : 0);
    if (best.empty() || code < best) best = std::move(code);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace detail

/// Set-based k-WL on the cells of the strict graph of `spec`: each k-set starts
/// from the labeled isomorphism type of its induced directed sub-relation and
/// is refined over the k-sets sharing k-1 members. k is limited to 2 or 3.
inline ColorHistogram kccwl(const CombinatorialComplex& cc, const NeighborhoodSpec& spec, int k,
                            const Coloring& labels, ColorTable& table = default_color_table()) {
  if (k > 3) throw error(errc::k_too_large, "k = " + std::to_string(k) + " exceeds 3");
  if (k < 2) throw error(errc::invalid_argument, "k must be at least 2");
  detail::check_labels(cc, labels);
  const auto g = strict_hasse(cc, spec);
  const int n = static_cast<int>(g.node_count());
  std::vector<int> label(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) label[i] = labels.color_of[static_cast<std::size_t>(g.node_cells[i])];
  std::vector<std::vector<bool>> adj(g.node_count(), std::vector<bool>(g.node_count(), false));
  for (auto [a, b] : g.edges) adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;

  const auto sets = all_ksets(n, k);
  std::vector<int> init(sets.size());
  std::vector<std::vector<int>> nbrs(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) {
    auto sig = detail::kset_type(sets[i], label, adj);
    sig.insert(sig.begin(), detail::sig_kinit);
    init[i] = table.intern(sig);
    for (const auto& t : kset_neighbors(n, sets[i])) nbrs[i].push_back(static_cast<int>(kset_rank(t)));
  }
  return detail::histogram_of(detail::refine(nbrs, std::move(init), table), table);
}

}  // namespace gccn
