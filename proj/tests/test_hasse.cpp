#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "gccn/hasse.hpp"
#include "support.hpp"

using namespace gccn;
using K = NeighborhoodKind;

TEST(Hasse, TriangleDownIncidenceRankOne) {
  auto cc = fixtures::triangle_fixture();
  auto g = strict_hasse(cc, {K::down_incidence, 1});
  EXPECT_EQ(g.node_count(), 6u);
  EXPECT_EQ(g.edge_count(), 6u);
  EXPECT_EQ(g.node_cells, (std::vector<CellId>{0, 1, 2, 3, 4, 5}));
  auto deg = g.in_degrees();
  for (int i = 0; i < 3; ++i) EXPECT_EQ(deg[static_cast<std::size_t>(i)], 0);
  for (int i = 3; i < 6; ++i) EXPECT_EQ(deg[static_cast<std::size_t>(i)], 2);
}

TEST(Hasse, EmptyCases) {
  auto g = strict_hasse(build_complex(1, {}), {K::up_incidence, {}});
  EXPECT_EQ(g.node_count(), 0u);
  EXPECT_EQ(g.edge_count(), 0u);
  auto above = strict_hasse(fixtures::triangle_fixture(), {K::up_adjacency, 4});
  EXPECT_EQ(above.node_count(), 0u);
}

TEST(Hasse, AugmentedUnion) {
  auto cc = fixtures::triangle_fixture();
  auto g = augmented_hasse(cc, {{K::down_incidence, {}}, {K::up_adjacency, {}}});
  EXPECT_EQ(g.node_count(), 7u);
  EXPECT_EQ(g.edge_count(), 21u);
  EXPECT_FALSE(g.origin_spec.has_value());

  auto small = augmented_hasse(cc, {{K::down_incidence, {}}});
  auto e1 = small.global_edges();
  auto e2 = g.global_edges();
  EXPECT_TRUE(std::includes(e2.begin(), e2.end(), e1.begin(), e1.end()));
  EXPECT_LT(e1.size(), e2.size());
  EXPECT_THROW(augmented_hasse(cc, {}), error);
}

TEST(Hasse, EdgeUnionAndNnzIdentities) {
  std::mt19937_64 rng(5);
  const auto specs = fixtures::all_unfiltered_specs();
  for (int t = 0; t < 150; ++t) {
    auto cc = fixtures::random_simplicial(rng);
    std::set<std::pair<CellId, CellId>> expected;
    for (const auto& s : specs) {
      auto g = strict_hasse(cc, s);
      auto m = neighborhood_matrix(cc, s);
      EXPECT_EQ(g.edge_count(), m.nnz());
      for (auto e : g.global_edges()) expected.insert(e);
      // Node set = non-empty rows plus the columns they reference.
      std::set<CellId> nodes;
      for (std::size_t i = 0; i < m.n; ++i)
        if (!m.rows[i].empty()) {
          nodes.insert(static_cast<CellId>(i));
          nodes.insert(m.rows[i].begin(), m.rows[i].end());
        }
      EXPECT_EQ(std::vector<CellId>(nodes.begin(), nodes.end()), g.node_cells);
      for (auto [src, dst] : g.global_edges()) EXPECT_TRUE(m.contains(dst, src));
    }
    auto aug = augmented_hasse(cc, specs);
    auto got = aug.global_edges();
    const std::vector<std::pair<CellId, CellId>> want(expected.begin(), expected.end());
    EXPECT_EQ(want, got);
  }
}

TEST(Hasse, EnsemblePreservesOrder) {
  auto cc = fixtures::triangle_fixture();
  std::vector<NeighborhoodSpec> specs = {{K::up_adjacency, {}}, {K::down_incidence, 1}, {K::up_adjacency, {}}};
  auto ens = expand_ensemble(cc, specs);
  ASSERT_EQ(ens.graphs.size(), 3u);
  EXPECT_EQ(ens.complex_size, 7u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(*ens.graphs[i].origin_spec, specs[i]);
  EXPECT_EQ(ens.graphs[0].global_edges(), ens.graphs[2].global_edges());
  EXPECT_THROW(expand_ensemble(cc, {}), error);
}

TEST(Hasse, ConcatOffsetsCells) {
  auto a = fixtures::triangle_fixture();
  auto b = build_complex(2, {{{0, 1}, 1}});
  std::vector<NeighborhoodSpec> specs = {{K::down_incidence, {}}};
  auto ea = expand_ensemble(a, specs);
  auto eb = expand_ensemble(b, specs);
  auto cat = concat_ensembles({&ea, &eb});
  EXPECT_EQ(cat.complex_size, 10u);
  auto edges = cat.graphs[0].global_edges();
  EXPECT_EQ(edges.size(), ea.graphs[0].edge_count() + eb.graphs[0].edge_count());
  EXPECT_TRUE(std::binary_search(edges.begin(), edges.end(), std::pair<CellId, CellId>{7, 9}));
  EXPECT_TRUE(std::binary_search(edges.begin(), edges.end(), std::pair<CellId, CellId>{8, 9}));
}

TEST(Hasse, EdgeListRoundTrip) {
  auto cc = fixtures::triangle_fixture();
  for (const auto& s : fixtures::all_unfiltered_specs()) {
    auto g = strict_hasse(cc, s);
    std::stringstream ss;
    write_edge_list(ss, g);
    auto back = read_edge_list(ss);
    EXPECT_EQ(back.node_cells, g.node_cells);
    EXPECT_EQ(back.edges, g.edges);
  }
  std::stringstream empty;
  write_edge_list(empty, DirectedCellGraph{});
  EXPECT_EQ(read_edge_list(empty).node_count(), 0u);
  std::stringstream bad("nodes=2 cells=0,1\n0 7\n");
  EXPECT_THROW(read_edge_list(bad), error);
}
