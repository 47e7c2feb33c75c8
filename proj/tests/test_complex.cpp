#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "gccn/complex.hpp"
#include "support.hpp"

using namespace gccn;

namespace {

errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const error& e) {
    return e.code();
  }
  return errc::invalid_argument;  // sentinel; tests below never expect it
}

}  // namespace

TEST(Complex, TriangleHasSevenCellsAndDimTwo) {
  auto cc = fixtures::triangle_fixture();
  EXPECT_EQ(cc.size(), 7u);
  EXPECT_EQ(cc.dim(), 2);
  EXPECT_EQ(cc.rank_profile(), (std::vector<std::size_t>{3, 3, 1}));
  EXPECT_TRUE(cc.is_canonical());
}

TEST(Complex, SingleVertex) {
  auto cc = build_complex(1, {});
  EXPECT_EQ(cc.size(), 1u);
  EXPECT_EQ(cc.dim(), 0);
}

TEST(Complex, EqualRanksUnderContainmentAccepted) {
  auto cc = build_complex(3, {{{0, 1}, 1}, {{0, 1, 2}, 1}});
  EXPECT_EQ(cc.size(), 5u);
  EXPECT_EQ(cc.dim(), 1);
}

TEST(Complex, NonConsecutiveRanksAccepted) {
  auto cc = build_complex(3, {{{0, 1}, 3}, {{0, 1, 2}, 7}});
  EXPECT_EQ(cc.dim(), 7);
  EXPECT_EQ(cells_of_rank(cc, 3).size(), 1u);
  EXPECT_TRUE(cells_of_rank(cc, 2).empty());
}

TEST(Complex, Errors) {
  EXPECT_EQ(code_of([] { build_complex(3, {{{0, 1}, 1}, {{1, 0}, 1}}); }), errc::duplicate_cell);
  EXPECT_EQ(code_of([] { build_complex(3, {{{0, 1}, 1}, {{0, 1}, 2}}); }), errc::duplicate_cell);
  EXPECT_EQ(code_of([] { build_complex(3, {{{0, 1}, 2}, {{0, 1, 2}, 1}}); }),
            errc::rank_order_violation);
  EXPECT_EQ(code_of([] { build_complex(3, {{{1}, 1}}); }), errc::singleton_rank_nonzero);
  EXPECT_EQ(code_of([] { build_complex(3, {{{0, 3}, 1}}); }), errc::vertex_out_of_range);
  EXPECT_EQ(code_of([] { build_complex(3, {{{}, 1}}); }), errc::empty_cell);
}

TEST(Complex, CellsOfRank) {
  auto cc = fixtures::triangle_fixture();
  auto edges = cells_of_rank(cc, 1);
  ASSERT_EQ(edges.size(), 3u);
  EXPECT_EQ(cc.cell(edges[0]).vertices, (std::vector<VertexId>{0, 1}));
  EXPECT_EQ(cc.cell(edges[2]).vertices, (std::vector<VertexId>{1, 2}));
  EXPECT_TRUE(cells_of_rank(cc, 5).empty());
  EXPECT_EQ(cells_of_rank(build_complex(1, {}), 0).size(), 1u);
}

TEST(Complex, ShuffledInputGivesIdenticalTable) {
  std::vector<RankedVertexSet> cells = {{{0, 1}, 1}, {{1, 2}, 1}, {{0, 2}, 1}, {{2, 3}, 1},
                                        {{0, 1, 2}, 2}, {{3}, 0}, {{0}, 0}};
  auto ref = build_complex(4, cells);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(cells.begin(), cells.end(), rng);
    for (auto& c : cells) std::shuffle(c.vertices.begin(), c.vertices.end(), rng);
    EXPECT_EQ(build_complex(4, cells), ref);
  }
}

TEST(Complex, RankOrderHoldsOnRandomComplexes) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    auto cc = fixtures::random_complex(rng);
    for (const auto& s : cc.cells()) {
      for (const auto& u : cc.cells()) {
        if (is_subset(s.vertices, u.vertices)) {
          EXPECT_LE(s.rank, u.rank);
        }
      }
    }
  }
}

TEST(Complex, FindLooksUpVertexSets) {
  auto cc = fixtures::triangle_fixture();
  EXPECT_EQ(cc.find({0, 1, 2}), 6);
  EXPECT_EQ(cc.find({0, 3}), -1);
}

TEST(Permutation, RejectsNonBijection) {
  EXPECT_EQ(code_of([] { CellPermutation({0, 0, 1}); }), errc::not_a_bijection);
  EXPECT_EQ(code_of([] { CellPermutation({0, 3, 1}); }), errc::not_a_bijection);
  auto cc = fixtures::triangle_fixture();
  EXPECT_EQ(code_of([&] { permute_cells(cc, Tensor2(7, 1), CellPermutation::identity(6)); }),
            errc::not_a_bijection);
}

TEST(Permutation, IdentityAndInverse) {
  auto cc = fixtures::triangle_fixture();
  Tensor2 h(7, 2);
  for (std::size_t i = 0; i < 7; ++i) h(i, 0) = static_cast<double>(i), h(i, 1) = -1.0 * i;

  auto [c1, h1] = permute_cells(cc, h, CellPermutation::identity(7));
  EXPECT_EQ(c1, cc);
  EXPECT_EQ(h1, h);

  CellPermutation p({0, 1, 2, 5, 4, 3, 6});  // swap two edges
  EXPECT_TRUE(p.preserves_rank(cc));
  auto [c2, h2] = permute_cells(cc, h, p);
  EXPECT_EQ(c2.cell(5), cc.cell(3));
  EXPECT_EQ(h2(5, 0), 3.0);
  EXPECT_EQ(h2(3, 0), 5.0);
  auto [c3, h3] = permute_cells(c2, h2, p.inverse());
  EXPECT_EQ(c3, cc);
  EXPECT_EQ(h3, h);
}

TEST(Permutation, RowsFollowTheirCells) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    auto cc = fixtures::random_complex(rng);
    std::vector<CellId> m(cc.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<CellId>(i);
    std::shuffle(m.begin(), m.end(), rng);
    CellPermutation p(m);
    Tensor2 h(cc.size(), 1);
    for (std::size_t i = 0; i < cc.size(); ++i) h(i, 0) = static_cast<double>(i);
    auto [pc, ph] = permute_cells(cc, h, p);
    for (std::size_t i = 0; i < cc.size(); ++i) {
      const auto slot = static_cast<std::size_t>(p(static_cast<CellId>(i)));
      EXPECT_EQ(pc.cells()[slot], cc.cells()[i]);
      EXPECT_EQ(ph(slot, 0), static_cast<double>(i));
    }
  }
}
