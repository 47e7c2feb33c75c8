// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "gccn/gccn.hpp"
#include "support.hpp"

using namespace gccn;
using K = NeighborhoodKind;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Tensor2 random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor2 t(r, c);
  for (auto& x : t.data()) x = u(rng);
  return t;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// Matrix of a spec, empty when the rank filter lies above the complex's dimension.
NeighborhoodMatrix matrix_or_empty(const CombinatorialComplex& cc, const NeighborhoodSpec& s) {
  if (s.rank_filter && *s.rank_filter > cc.dim()) {
    NeighborhoodMatrix m;
    m.n = cc.size();
    m.rows.resize(cc.size());
    m.specs = {s};
    return m;
  }
  return neighborhood_matrix(cc, s);
}

OmegaConfig conv_sum(std::size_t in, std::size_t out) {
  OmegaConfig o;
  o.kind = OmegaKind::conv;
  o.in_dim = in;
  o.out_dim = out;
  o.conv_norm = AggregateMode::sum;
  return o;
}

// ---------------------------------------------------------------------------

Outcome mutag_statistics() {
  const auto t0 = Clock::now();
  const auto ds = parse_tudataset(std::filesystem::path(GCCN_DATA_DIR) / "MUTAG");
  const auto clique = lift_totals(ds, LiftDomain::simplicial);
  const auto cycle = lift_totals(ds, LiftDomain::cell);
  const double secs = seconds_since(t0);
  const bool ok = ds.graphs.size() == 188 && clique == std::vector<std::size_t>{3371, 3721, 0} &&
                  cycle == std::vector<std::size_t>{3371, 3721, 538} && secs < 10.0;
  return {ok, "clique " + std::to_string(clique[0]) + "/" + std::to_string(clique[1]) + "/" +
                  std::to_string(clique[2]) + ", cycle " + std::to_string(cycle[0]) + "/" +
                  std::to_string(cycle[1]) + "/" + std::to_string(cycle[2]) + ", " + fmt(secs) + " s"};
}

Outcome generality() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  std::size_t comparisons = 0;
  const std::size_t in = 3, out = 2;
  for (int t = 0; t < 120; ++t) {
    auto cc = (t % 2) ? fixtures::random_complex(rng) : fixtures::random_simplicial(rng);
    const Tensor2 h = random_matrix(cc.size(), in, rng);
    for (const auto& preset : neighborhood_presets()) {
      std::vector<NeighborhoodMatrix> mats;
      for (const auto& s : preset.specs) mats.push_back(matrix_or_empty(cc, s));

      // One psi per neighborhood.
      {
        CcnnReference ref{preset.specs, AggregateMode::sum, true, cc.dim(), in, out};
        ParameterStore cs;
        init_ccnn(cs, ref, "c", rng);
        auto cfg = GccnLayerConfig::uniform(preset.specs, conv_sum(in, out), in, out, InterAggregation::sum);
        ParameterStore gs;
        gs.add("g.W0", cs.get("c.W0"));
        for (std::size_t s = 0; s < preset.specs.size(); ++s)
          gs.add("g.omega" + std::to_string(s) + ".W0", cs.get(ref.psi_name("c", s, 0)));
        const auto a = ccnn_layer(cc, h, mats, ref, cs, "c");
        const auto b = gccn_layer(h, expand_ensemble(cc, cfg.specs), cfg, gs, "g");
        worst = std::max(worst, max_abs_diff(a, b));
        ++comparisons;
      }
      // One psi per (neighborhood, receiving rank): split each spec by rank.
      {
        CcnnReference ref{preset.specs, AggregateMode::sum, false, cc.dim(), in, out};
        ParameterStore cs;
        init_ccnn(cs, ref, "c", rng);
        std::vector<NeighborhoodSpec> split;
        std::vector<std::string> psi;
        for (std::size_t s = 0; s < preset.specs.size(); ++s) {
          const auto& spec = preset.specs[s];
          if (spec.rank_filter) {
            if (*spec.rank_filter > cc.dim()) continue;
            split.push_back(spec);
            psi.push_back(ref.psi_name("c", s, *spec.rank_filter));
          } else {
            for (Rank r = 0; r <= cc.dim(); ++r) {
              split.push_back({spec.kind, r});
              psi.push_back(ref.psi_name("c", s, r));
            }
          }
        }
        const auto a = ccnn_layer(cc, h, mats, ref, cs, "c");
        Tensor2 b;
        if (split.empty()) {
          b = matmul(h, cs.get("c.W0"));
          for (auto& x : b.data()) x = std::max(0.0, x);
        } else {
          auto cfg = GccnLayerConfig::uniform(split, conv_sum(in, out), in, out, InterAggregation::sum);
          ParameterStore gs;
          gs.add("g.W0", cs.get("c.W0"));
          for (std::size_t s = 0; s < split.size(); ++s) gs.add("g.omega" + std::to_string(s) + ".W0", cs.get(psi[s]));
          b = gccn_layer(h, expand_ensemble(cc, cfg.specs), cfg, gs, "g");
        }
        worst = std::max(worst, max_abs_diff(a, b));
        ++comparisons;
      }
    }
  }
  return {worst < 1e-10, std::to_string(comparisons) + " comparisons (120 complexes x 10 presets x shared/per-rank), max diff " + fmt(worst)};
}

Outcome equivariance() {
  std::mt19937_64 rng(2002);
  double worst = 0.0;
  int pairs = 0;
  const auto& presets = neighborhood_presets();
  for (int t = 0; t < 50; ++t) {
    auto cc = (t % 2) ? fixtures::random_complex(rng) : fixtures::random_simplicial(rng);
    // Shuffle cells within each rank block.
    std::vector<CellId> m(cc.size());
    std::iota(m.begin(), m.end(), 0);
    for (std::size_t b = 0; b < m.size();) {
      std::size_t e = b;
      while (e < m.size() && cc.cells()[e].rank == cc.cells()[b].rank) ++e;
      std::shuffle(m.begin() + static_cast<std::ptrdiff_t>(b), m.begin() + static_cast<std::ptrdiff_t>(e), rng);
      b = e;
    }
    const CellPermutation p(m);
    if (!p.preserves_rank(cc)) return {false, "generated permutation does not preserve rank"};
    const auto& specs = presets[static_cast<std::size_t>(t) % presets.size()].specs;
    const Tensor2 h = random_matrix(cc.size(), 3, rng);
    auto [pc, ph] = permute_cells(cc, h, p);
    for (auto kind : {OmegaKind::conv, OmegaKind::gin, OmegaKind::sage}) {
      OmegaConfig o;
      o.kind = kind;
      o.sublayers = 2;
      for (auto inter : {InterAggregation::sum, InterAggregation::mean}) {
        auto cfg = GccnLayerConfig::uniform(specs, o, 3, 4, inter);
        ParameterStore ps;
        init_gccn_layer(ps, cfg, "l", rng);
        const auto a = gccn_layer(ph, expand_ensemble(pc, specs), cfg, ps, "l");
        const auto b = p.apply_rows(gccn_layer(h, expand_ensemble(cc, specs), cfg, ps, "l"));
        worst = std::max(worst, max_abs_diff(a, b));
        ++pairs;
      }
    }
  }
  return {worst < 1e-9, std::to_string(pairs) + " (complex, omega kind, inter-aggregation) cases, max diff " + fmt(worst)};
}

Outcome expressivity() {
  const auto t0 = Clock::now();
  const auto a = canonical_complex("icosahedron_faces");
  const auto b = canonical_complex("five_tetrahedra");
  const NeighborhoodSpec spec{K::down_adjacency, 2};
  ColorTable table;
  const auto la = Coloring::uniform(a.size()), lb = Coloring::uniform(b.size());
  const auto ha = ccwl(a, spec, la, table), hb = ccwl(b, spec, lb, table);
  const auto ka = kccwl(a, spec, 3, la, table), kb = kccwl(b, spec, 3, lb, table);
  const double secs = seconds_since(t0);

  // Oracle: 3-sets of mutually adjacent faces, counted on the strict graph.
  auto triangle_sets = [&](const CombinatorialComplex& cc) {
    const auto g = strict_hasse(cc, spec);
    std::set<std::pair<int, int>> e(g.edges.begin(), g.edges.end());
    auto both = [&](int x, int y) { return e.count({x, y}) && e.count({y, x}); };
    std::size_t n = 0;
    const int v = static_cast<int>(g.node_count());
    for (int x = 0; x < v; ++x)
      for (int y = x + 1; y < v; ++y)
        for (int z = y + 1; z < v; ++z)
          if (both(x, y) && both(x, z) && both(y, z)) ++n;
    return n;
  };
  const std::size_t ta = triangle_sets(a), tb = triangle_sets(b);
  // The triangle type must appear at initialization as a class of exactly tb sets in b and not in a.
  bool class_found = false;
  for (auto [color, n] : kb.initial_counts())
    if (n == tb && !ka.initial_counts().count(color)) class_found = true;
  const bool ok = !distinguishable(ha, hb) && distinguishable(ka, kb) &&
                  ka.initial_counts() != kb.initial_counts() && ta == 0 && tb == 20 && class_found && secs < 5.0;
  return {ok, std::string("ccwl ") + (distinguishable(ha, hb) ? "differs" : "identical") + ", 3-ccwl init " +
                  (ka.initial_counts() != kb.initial_counts() ? "differs" : "identical") + " (" + std::to_string(ta) +
                  " vs " + std::to_string(tb) + " triangle-typed 3-sets), " + fmt(secs) + " s"};
}

Outcome wl_equivalence() {
  std::vector<CombinatorialComplex> corpus;
  std::mt19937_64 rng(5005);
  for (int t = 0; t < 400; ++t) corpus.push_back((t % 2) ? fixtures::random_complex(rng) : fixtures::random_simplicial(rng));
  for (const char* name : {"triangle", "icosahedron_faces", "five_tetrahedra", "glued_triangles"})
    corpus.push_back(canonical_complex(name));
  const auto ds = parse_tudataset(std::filesystem::path(GCCN_DATA_DIR) / "MUTAG");
  for (const auto& g : ds.graphs) {
    corpus.push_back(clique_lift(g));
    corpus.push_back(cycle_lift(g));
  }
  std::size_t checks = 0, mismatches = 0;
  std::uniform_int_distribution<int> lab(0, 2);
  for (const auto& cc : corpus) {
    std::vector<NeighborhoodSpec> specs = fixtures::all_unfiltered_specs();
    for (Rank r = 0; r <= cc.dim(); ++r)
      for (const auto& s : fixtures::all_unfiltered_specs()) specs.push_back({s.kind, r});
    for (int variant = 0; variant < 2; ++variant) {
      Coloring labels = Coloring::uniform(cc.size());
      if (variant == 1)
        for (auto& c : labels.color_of) c = lab(rng);
      for (const auto& spec : specs) {
        const auto g = strict_hasse(cc, spec);
        Coloring init{std::vector<int>(g.node_count()), 0};
        for (std::size_t i = 0; i < g.node_count(); ++i)
          init.color_of[i] = labels.color_of[static_cast<std::size_t>(g.node_cells[i])];
        const auto reference = wl_refine(g, init);
        const auto cw = ccwl_coloring(cc, spec, labels);
        std::vector<int> restricted;
        for (CellId c : g.node_cells) restricted.push_back(cw.color_of[static_cast<std::size_t>(c)]);
        if (canonical_colors(restricted) != canonical_colors(reference.color_of)) ++mismatches;
        ++checks;
      }
    }
  }
  return {mismatches == 0, std::to_string(corpus.size()) + " complexes, " + std::to_string(checks) +
                               " (complex, spec, labeling) runs, " + std::to_string(mismatches) + " mismatches"};
}

Outcome gradients() {
  const auto cc = fixtures::triangle_fixture();
  double worst = 0.0;
  for (auto kind : {OmegaKind::conv, OmegaKind::gin, OmegaKind::sage}) {
    ModelConfig mc;
    mc.specs = {{K::up_adjacency, {}}, {K::down_incidence, {}}, {K::up_incidence, 0}};
    mc.omega = kind;
    mc.sublayers = 2;
    mc.gin_epsilon = 0.1;
    mc.hidden = 4;
    mc.layers = 2;
    mc.in_dim = 3;
    mc.outputs = 2;
    auto ps = init_model(mc, 77);
    std::mt19937_64 rng(78);
    const GraphBatch batch{expand_ensemble(cc, mc.specs), random_matrix(cc.size(), 3, rng), CellLayout::of(cc)};
    ScalarFn f = [&](Tape& tape, const ParameterStore& p) {
      return softmax_cross_entropy(model_forward(mc, batch, tape, p), {1});
    };
    worst = std::max(worst, gradient_check(f, ps).max_relative_error);
  }
  return {worst < 1e-5, "2-layer stacks (conv, gin, sage) on the 7-cell triangle, max relative error " + fmt(worst)};
}

Outcome training() {
  const auto ds = synth_dataset(100, 7);
  ModelConfig mc;
  mc.specs = {{K::up_adjacency, 0}, {K::up_incidence, {}}};
  mc.omega = OmegaKind::gin;
  mc.hidden = 32;
  mc.layers = 2;
  mc.in_dim = 1;
  mc.outputs = 2;
  TrainConfig tc;
  tc.max_epochs = 200;
  tc.patience = 200;
  tc.seed = 1;
  const auto t0 = Clock::now();
  const auto a = train(mc, ds, tc);
  const double secs = seconds_since(t0);
  const auto b = train(mc, ds, tc);
  bool identical = a.metrics.curve.size() == b.metrics.curve.size();
  for (std::size_t i = 0; identical && i < a.metrics.curve.size(); ++i) {
    const auto &x = a.metrics.curve[i], &y = b.metrics.curve[i];
    identical = std::memcmp(&x.train_loss, &y.train_loss, sizeof(double)) == 0 &&
                std::memcmp(&x.val_metric, &y.val_metric, sizeof(double)) == 0;
  }
  const auto& m = a.metrics;
  const bool ok = m.train.metric >= 0.95 && m.test.metric >= 0.80 && m.epochs_run <= 200 && secs < 60.0 && identical;
  return {ok, "train acc " + fmt(m.train.metric) + ", test acc " + fmt(m.test.metric) + ", best epoch " +
                  std::to_string(m.best_epoch) + " of " + std::to_string(m.epochs_run) + ", " + fmt(secs) +
                  " s, rerun " + (identical ? "bitwise identical" : "differs")};
}

Outcome flops() {
  const auto cc = fixtures::triangle_fixture();
  const auto est = estimate_layer_flops(cc, {{K::down_incidence, 1}}, 2);
  bool ok = est.message == 48 && est.aggregation == 12 && est.update == 6;
  // Additivity over specs with disjoint receiving ranks.
  std::mt19937_64 rng(8008);
  std::size_t checked = 0;
  for (int t = 0; t < 200; ++t) {
    auto c = fixtures::random_simplicial(rng);
    if (c.dim() < 1) continue;
    const auto kinds = fixtures::all_unfiltered_specs();
    const NeighborhoodSpec x{kinds[rng() % kinds.size()].kind, 0}, y{kinds[rng() % kinds.size()].kind, 1};
    const std::uint64_t F = 1 + rng() % 8;
    const auto ex = estimate_layer_flops(c, {x}, F), ey = estimate_layer_flops(c, {y}, F);
    const auto exy = estimate_layer_flops(c, {x, y}, F);
    ok = ok && exy.message == ex.message + ey.message && exy.aggregation == ex.aggregation + ey.aggregation &&
         exy.update == ex.update + ey.update && exy.inter_agg == ex.inter_agg + ey.inter_agg &&
         exy.total == ex.total + ey.total;
    ++checked;
  }
  return {ok, "triangle down_incidence@1 F=2: message " + std::to_string(est.message) + ", aggregation " +
                  std::to_string(est.aggregation) + ", update " + std::to_string(est.update) + "; additivity on " +
                  std::to_string(checked) + " spec pairs"};
}

Outcome neighborhood_algebra() {
  std::mt19937_64 rng(9009);
  std::size_t failures = 0, matrices = 0;
  for (int t = 0; t < 1000; ++t) {
    auto cc = (t % 2) ? fixtures::random_complex(rng) : fixtures::random_simplicial(rng);
    const auto up = neighborhood_matrix(cc, {K::up_incidence, {}});
    const auto down = neighborhood_matrix(cc, {K::down_incidence, {}});
    if (!down.same_entries(up.transposed())) ++failures;
    if (!neighborhood_matrix(cc, {K::up_adjacency, {}}).is_symmetric()) ++failures;
    if (!neighborhood_matrix(cc, {K::down_adjacency, {}}).is_symmetric()) ++failures;
    for (const auto& base : fixtures::all_unfiltered_specs()) {
      const auto whole = neighborhood_matrix(cc, base);
      if (!fixtures::matches_oracle(whole, fixtures::oracle_neighbors(cc, base))) ++failures;
      ++matrices;
      std::vector<NeighborhoodSpec> parts;
      std::size_t nnz = 0;
      for (Rank r = 0; r <= cc.dim(); ++r) {
        const NeighborhoodSpec s{base.kind, r};
        parts.push_back(s);
        const auto m = neighborhood_matrix(cc, s);
        if (!fixtures::matches_oracle(m, fixtures::oracle_neighbors(cc, s))) ++failures;
        ++matrices;
        // Rows outside rank r are empty, and the rank-r rows agree with the unfiltered matrix.
        for (std::size_t i = 0; i < cc.size(); ++i) {
          if (cc.cells()[i].rank != r ? !m.rows[i].empty() : m.rows[i] != whole.rows[i]) ++failures;
        }
        nnz += m.nnz();
      }
      if (nnz != whole.nnz() || !union_neighborhood(cc, parts).same_entries(whole)) ++failures;
    }
  }
  return {failures == 0, "1000 complexes, " + std::to_string(matrices) + " matrices against the subset oracle, " +
                             std::to_string(failures) + " failures"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"MUTAG lifting statistics", mutag_statistics},
      {"generality: conv GCCN equals CCNN", generality},
      {"permutation equivariance", equivariance},
      {"expressivity on the icosahedron / five-tetrahedra pair", expressivity},
      {"CCWL equals WL on the strict graph", wl_equivalence},
      {"gradient correctness", gradients},
      {"training smoke", training},
      {"FLOP estimator", flops},
      {"neighborhood algebra", neighborhood_algebra},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
