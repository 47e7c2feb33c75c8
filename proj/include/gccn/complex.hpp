#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gccn/error.hpp"
#include "gccn/tensor.hpp"

namespace gccn {

using VertexId = int;
using CellId = int;
using Rank = int;

struct Cell {
  std::vector<VertexId> vertices;  // strictly increasing, non-empty
  Rank rank = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Canonical cell order: rank first, then lexicographic vertex list.
inline bool canonical_less(const Cell& a, const Cell& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.vertices < b.vertices;
}

/// True iff sorted vertex list `a` is a subset of sorted vertex list `b`.
inline bool is_subset(const std::vector<VertexId>& a, const std::vector<VertexId>& b) {
  return a.size() <= b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

struct RankedVertexSet {
  std::vector<VertexId> vertices;
  Rank rank = 0;
};

class CombinatorialComplex;
CombinatorialComplex build_complex(int vertex_count, std::vector<RankedVertexSet> ranked_cells);

/// The triple (V, C, rk): a vertex count plus a table of ranked cells.
///
/// Cell ids are positions in the table. `build_complex` produces the canonical
/// ordering; `permute_cells` produces relabeled tables. Immutable once built.
class CombinatorialComplex {
 public:
  CombinatorialComplex() = default;

  int vertex_count() const noexcept { return vertex_count_; }
  std::size_t size() const noexcept { return cells_.size(); }
  Rank dim() const noexcept { return dim_; }

  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const Cell& cell(CellId id) const { return cells_.at(static_cast<std::size_t>(id)); }
  Rank rank_of(CellId id) const { return cell(id).rank; }

  /// Cell id holding exactly this (sorted) vertex set, or -1.
  CellId find(const std::vector<VertexId>& vertices) const {
    auto it = index_.find(vertices);
    return it == index_.end() ? -1 : it->second;
  }

  /// Number of cells per rank 0..dim.
  std::vector<std::size_t> rank_profile() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(dim_) + 1, 0);
    for (const auto& c : cells_) ++counts[static_cast<std::size_t>(c.rank)];
    return counts;
  }

  bool is_canonical() const {
    return std::is_sorted(cells_.begin(), cells_.end(), canonical_less);
  }

  friend bool operator==(const CombinatorialComplex& a, const CombinatorialComplex& b) {
    return a.vertex_count_ == b.vertex_count_ && a.cells_ == b.cells_;
  }

 private:
  friend CombinatorialComplex build_complex(int, std::vector<RankedVertexSet>);
  friend CombinatorialComplex make_from_table(int, std::vector<Cell>);

  void reindex() {
    index_.clear();
    dim_ = 0;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      index_.emplace(cells_[i].vertices, static_cast<CellId>(i));
      dim_ = std::max(dim_, cells_[i].rank);
    }
  }

  int vertex_count_ = 0;
  std::vector<Cell> cells_;
  std::map<std::vector<VertexId>, CellId> index_;
  Rank dim_ = 0;
};

namespace detail {

// Checks rk(sigma) <= rk(tau) for every sigma strictly contained in tau.
// Candidates are found through the minimum vertex of sigma, which must lie in tau.
inline void check_rank_order(int vertex_count, const std::vector<Cell>& cells) {
  std::vector<std::vector<std::size_t>> by_min_vertex(static_cast<std::size_t>(vertex_count));
  for (std::size_t i = 0; i < cells.size(); ++i)
    by_min_vertex[static_cast<std::size_t>(cells[i].vertices.front())].push_back(i);
  for (const auto& tau : cells) {
    for (VertexId v : tau.vertices) {
      for (std::size_t si : by_min_vertex[static_cast<std::size_t>(v)]) {
        const Cell& sigma = cells[si];
        if (sigma.rank > tau.rank && sigma.vertices.size() < tau.vertices.size() &&
            is_subset(sigma.vertices, tau.vertices)) {
          throw error(errc::rank_order_violation,
                      "cell of rank " + std::to_string(sigma.rank) +
                          " is contained in a cell of rank " + std::to_string(tau.rank));
        }
      }
    }
  }
}

}  // namespace detail

/// Builds a validated complex. Missing singletons are inserted at rank 0 and the
/// table is sorted canonically (rank, then lexicographic vertex list).
inline CombinatorialComplex build_complex(int vertex_count,
                                          std::vector<RankedVertexSet> ranked_cells) {
  if (vertex_count < 1) throw error(errc::invalid_argument, "vertex_count must be positive");
  std::vector<Cell> cells;
  cells.reserve(ranked_cells.size() + static_cast<std::size_t>(vertex_count));
  std::vector<bool> has_singleton(static_cast<std::size_t>(vertex_count), false);
  for (auto& rc : ranked_cells) {
    if (rc.vertices.empty()) throw error(errc::empty_cell, "cells must be non-empty");
    if (rc.rank < 0) throw error(errc::invalid_argument, "negative rank");
    std::sort(rc.vertices.begin(), rc.vertices.end());
    rc.vertices.erase(std::unique(rc.vertices.begin(), rc.vertices.end()), rc.vertices.end());
    for (VertexId v : rc.vertices)
      if (v < 0 || v >= vertex_count)
        throw error(errc::vertex_out_of_range, "vertex " + std::to_string(v) + " not in 0.." +
                                                   std::to_string(vertex_count - 1));
    if (rc.vertices.size() == 1) {
      if (rc.rank != 0)
        throw error(errc::singleton_rank_nonzero,
                    "singleton {" + std::to_string(rc.vertices[0]) + "} has rank " +
                        std::to_string(rc.rank));
      has_singleton[static_cast<std::size_t>(rc.vertices[0])] = true;
    }
    cells.push_back(Cell{std::move(rc.vertices), rc.rank});
  }
  for (int v = 0; v < vertex_count; ++v)
    if (!has_singleton[static_cast<std::size_t>(v)]) cells.push_back(Cell{{v}, 0});

  std::sort(cells.begin(), cells.end(), canonical_less);
  // Equal vertex sets may carry different ranks, so sorting by rank alone does not
  // make duplicates adjacent.
  {
    std::vector<const Cell*> by_set;
    by_set.reserve(cells.size());
    for (const auto& c : cells) by_set.push_back(&c);
    std::sort(by_set.begin(), by_set.end(),
              [](const Cell* a, const Cell* b) { return a->vertices < b->vertices; });
    for (std::size_t i = 1; i < by_set.size(); ++i)
      if (by_set[i]->vertices == by_set[i - 1]->vertices) {
        std::string s;
        for (VertexId v : by_set[i]->vertices) s += (s.empty() ? "" : ",") + std::to_string(v);
        throw error(errc::duplicate_cell, "{" + s + "}");
      }
  }
  detail::check_rank_order(vertex_count, cells);

  CombinatorialComplex cc;
  cc.vertex_count_ = vertex_count;
  cc.cells_ = std::move(cells);
  cc.reindex();
  return cc;
}

/// Internal constructor for already-validated tables in arbitrary order.
inline CombinatorialComplex make_from_table(int vertex_count, std::vector<Cell> cells) {
  CombinatorialComplex cc;
  cc.vertex_count_ = vertex_count;
  cc.cells_ = std::move(cells);
  cc.reindex();
  return cc;
}

/// Cells of rank r in table order; empty when r exceeds dim.
inline std::vector<CellId> cells_of_rank(const CombinatorialComplex& cc, Rank r) {
  std::vector<CellId> out;
  for (std::size_t i = 0; i < cc.size(); ++i)
    if (cc.cells()[i].rank == r) out.push_back(static_cast<CellId>(i));
  return out;
}

/// A bijection on cell ids: cell `i` moves to slot `mapping[i]`.
class CellPermutation {
 public:
  CellPermutation() = default;
  explicit CellPermutation(std::vector<CellId> mapping) : mapping_(std::move(mapping)) {
    std::vector<bool> seen(mapping_.size(), false);
    for (CellId t : mapping_) {
      if (t < 0 || static_cast<std::size_t>(t) >= mapping_.size() ||
          seen[static_cast<std::size_t>(t)])
        throw error(errc::not_a_bijection, "mapping is not a permutation of 0.." +
                                               std::to_string(mapping_.size()) + "-1");
      seen[static_cast<std::size_t>(t)] = true;
    }
  }

  static CellPermutation identity(std::size_t n) {
    std::vector<CellId> m(n);
    std::iota(m.begin(), m.end(), 0);
    return CellPermutation(std::move(m));
  }

  std::size_t size() const noexcept { return mapping_.size(); }
  CellId operator()(CellId i) const { return mapping_.at(static_cast<std::size_t>(i)); }
  const std::vector<CellId>& mapping() const noexcept { return mapping_; }

  CellPermutation inverse() const {
    std::vector<CellId> inv(mapping_.size());
    for (std::size_t i = 0; i < mapping_.size(); ++i)
      inv[static_cast<std::size_t>(mapping_[i])] = static_cast<CellId>(i);
    return CellPermutation(std::move(inv));
  }

  /// Permutes rows: out.row(p(i)) = in.row(i).
  Tensor2 apply_rows(const Tensor2& h) const {
    if (h.rows() != mapping_.size())
      throw error(errc::shape_mismatch, "permutation of size " + std::to_string(size()) +
                                            " applied to " + h.shape_string());
    Tensor2 out(h.rows(), h.cols());
    for (std::size_t i = 0; i < mapping_.size(); ++i) {
      auto src = h.row(i);
      std::copy(src.begin(), src.end(), out.row(static_cast<std::size_t>(mapping_[i])).begin());
    }
    return out;
  }

  bool preserves_rank(const CombinatorialComplex& cc) const {
    if (mapping_.size() != cc.size()) return false;
    for (std::size_t i = 0; i < mapping_.size(); ++i)
      if (cc.cells()[i].rank != cc.cells()[static_cast<std::size_t>(mapping_[i])].rank)
        return false;
    return true;
  }

 private:
  std::vector<CellId> mapping_;
};

/// Relabels the cell table and feature rows by p: row p(i) of the output holds
/// what row i held before.
inline std::pair<CombinatorialComplex, Tensor2> permute_cells(const CombinatorialComplex& cc,
                                                              const Tensor2& h,
                                                              const CellPermutation& p) {
  if (p.size() != cc.size())
    throw error(errc::not_a_bijection, "permutation size " + std::to_string(p.size()) +
                                           " != cell count " + std::to_string(cc.size()));
  std::vector<Cell> cells(cc.size());
  for (std::size_t i = 0; i < cc.size(); ++i)
    cells[static_cast<std::size_t>(p(static_cast<CellId>(i)))] = cc.cells()[i];
  return {make_from_table(cc.vertex_count(), std::move(cells)), p.apply_rows(h)};
}

}  // namespace gccn
