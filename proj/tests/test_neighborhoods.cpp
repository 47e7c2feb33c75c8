#include <gtest/gtest.h>

#include <random>

#include "gccn/neighborhoods.hpp"
#include "support.hpp"

using namespace gccn;
using K = NeighborhoodKind;

TEST(Neighborhoods, TriangleCounts) {
  auto cc = fixtures::triangle_fixture();
  EXPECT_EQ(neighborhood_matrix(cc, {K::up_incidence, {}}).nnz(), 9u);
  auto a0 = neighborhood_matrix(cc, {K::up_adjacency, 0});
  EXPECT_EQ(a0.nnz(), 6u);
  for (CellId i = 3; i < 7; ++i) EXPECT_TRUE(a0.rows[static_cast<std::size_t>(i)].empty());
  EXPECT_EQ(neighborhood_matrix(cc, {K::up_adjacency, {}}).nnz(), 12u);
  EXPECT_EQ(neighborhood_matrix(cc, {K::down_adjacency, {}}).nnz(), 6u);
}

TEST(Neighborhoods, SingleVertexIsEmpty) {
  auto cc = build_complex(1, {});
  for (const auto& s : fixtures::all_unfiltered_specs()) {
    auto m = neighborhood_matrix(cc, s);
    EXPECT_EQ(m.n, 1u);
    EXPECT_EQ(m.nnz(), 0u);
  }
  EXPECT_EQ(union_neighborhood(cc, {{K::up_incidence, {}}, {K::down_incidence, {}}}).nnz(), 0u);
}

TEST(Neighborhoods, DownIncidenceUsesContainmentInSigma) {
  // The per-rank down incidence points from a cell to the faces it contains.
  auto cc = fixtures::triangle_fixture();
  auto m = neighborhood_matrix(cc, {K::down_incidence, 2});
  EXPECT_EQ(m.rows[6], (std::vector<CellId>{3, 4, 5}));
  EXPECT_EQ(m.nnz(), 3u);
}

TEST(Neighborhoods, RankFilterOutOfRange) {
  auto cc = fixtures::triangle_fixture();
  try {
    neighborhood_matrix(cc, {K::up_adjacency, 3});
    FAIL() << "expected RankFilterOutOfRange";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::rank_filter_out_of_range);
  }
}

TEST(Neighborhoods, UnionOnTriangle) {
  auto cc = fixtures::triangle_fixture();
  auto u = union_neighborhood(cc, {{K::down_incidence, {}}, {K::up_adjacency, {}}});
  EXPECT_EQ(u.nnz(), 21u);
  auto single = union_neighborhood(cc, {{K::up_incidence, {}}});
  EXPECT_TRUE(single.same_entries(neighborhood_matrix(cc, {K::up_incidence, {}})));
  EXPECT_THROW(union_neighborhood(cc, {}), error);
}

TEST(Neighborhoods, MatchesOracleOnRandomComplexes) {
  std::mt19937_64 rng(101);
  for (int t = 0; t < 300; ++t) {
    auto cc = (t % 2) ? fixtures::random_complex(rng) : fixtures::random_simplicial(rng);
    for (const auto& base : fixtures::all_unfiltered_specs()) {
      ASSERT_TRUE(fixtures::matches_oracle(neighborhood_matrix(cc, base), fixtures::oracle_neighbors(cc, base)));
      for (Rank r = 0; r <= cc.dim(); ++r) {
        NeighborhoodSpec s{base.kind, r};
        ASSERT_TRUE(fixtures::matches_oracle(neighborhood_matrix(cc, s), fixtures::oracle_neighbors(cc, s)));
      }
    }
  }
}

TEST(Neighborhoods, AlgebraicIdentities) {
  std::mt19937_64 rng(202);
  for (int t = 0; t < 200; ++t) {
    auto cc = fixtures::random_complex(rng);
    auto up = neighborhood_matrix(cc, {K::up_incidence, {}});
    auto down = neighborhood_matrix(cc, {K::down_incidence, {}});
    EXPECT_TRUE(down.same_entries(up.transposed()));
    EXPECT_TRUE(neighborhood_matrix(cc, {K::up_adjacency, {}}).is_symmetric());
    EXPECT_TRUE(neighborhood_matrix(cc, {K::down_adjacency, {}}).is_symmetric());
    for (const auto& base : fixtures::all_unfiltered_specs()) {
      std::vector<NeighborhoodSpec> parts;
      for (Rank r = 0; r <= cc.dim(); ++r) parts.push_back({base.kind, r});
      EXPECT_TRUE(union_neighborhood(cc, parts).same_entries(neighborhood_matrix(cc, base)));
      auto m = neighborhood_matrix(cc, base);
      for (std::size_t i = 0; i < m.n; ++i) EXPECT_FALSE(m.contains(static_cast<CellId>(i), static_cast<CellId>(i)));
    }
  }
}

TEST(Neighborhoods, SpecGrammar) {
  EXPECT_EQ(parse_spec("up_adjacency@0"), (NeighborhoodSpec{K::up_adjacency, 0}));
  EXPECT_EQ(parse_spec("down_incidence"), (NeighborhoodSpec{K::down_incidence, {}}));
  EXPECT_EQ(to_string(parse_spec("down_adjacency@12")), "down_adjacency@12");
  EXPECT_THROW(parse_spec("sideways"), error);
  EXPECT_THROW(parse_spec("up_incidence@"), error);
  EXPECT_THROW(parse_spec("up_incidence@x1"), error);
}

TEST(Neighborhoods, Presets) {
  EXPECT_EQ(neighborhood_presets().size(), 10u);
  EXPECT_EQ(preset_specs("adj0_adj1"),
            (std::vector<NeighborhoodSpec>{{K::up_adjacency, 0}, {K::up_adjacency, 1}}));
  EXPECT_EQ(preset_specs("uadj_dadj_dinc_uinc").size(), 4u);
  EXPECT_THROW(preset_specs("nope"), error);
}
