#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gccn/autodiff.hpp"
#include "gccn/complex.hpp"
#include "gccn/error.hpp"
#include "gccn/hasse.hpp"
#include "gccn/neighborhoods.hpp"

namespace gccn {

// ---------------------------------------------------------------------------
// Neighborhood message functions

enum class OmegaKind { conv, gin, sage };

constexpr std::string_view to_string(OmegaKind k) noexcept {
  switch (k) {
    case OmegaKind::conv: return "conv";
    case OmegaKind::gin: return "gin";
    case OmegaKind::sage: return "sage";
  }
  return "?";
}

inline OmegaKind parse_omega_kind(std::string_view s) {
  for (auto k : {OmegaKind::conv, OmegaKind::gin, OmegaKind::sage})
    if (s == to_string(k)) return k;
  throw error(errc::parse_error, "unknown omega kind '" + std::string(s) + "'");
}

struct OmegaConfig {
  OmegaKind kind = OmegaKind::conv;
  int sublayers = 1;
  std::size_t in_dim = 1;
  std::size_t out_dim = 1;
  double gin_epsilon = 0.0;
  // Intra-neighborhood normalization of the conv aggregate.
  AggregateMode conv_norm = AggregateMode::mean;

  void validate() const {
    if (in_dim == 0 || out_dim == 0) throw error(errc::config_mismatch, "omega dims must be positive");
    if (sublayers != 1 && sublayers != 2)
      throw error(errc::config_mismatch, "omega sublayers must be 1 or 2");
  }
};

/// Parameter names used by one omega, in registration order.
inline std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> omega_param_shapes(
    const OmegaConfig& cfg, const std::string& prefix) {
  cfg.validate();
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> shapes;
  for (int s = 0; s < cfg.sublayers; ++s) {
    const std::size_t d_in = s == 0 ? cfg.in_dim : cfg.out_dim;
    const std::string sfx = std::to_string(s);
    switch (cfg.kind) {
      case OmegaKind::conv: shapes.push_back({prefix + ".W" + sfx, {d_in, cfg.out_dim}}); break;
      case OmegaKind::sage: shapes.push_back({prefix + ".W" + sfx, {2 * d_in, cfg.out_dim}}); break;
      case OmegaKind::gin:
        shapes.push_back({prefix + ".A" + sfx, {d_in, cfg.out_dim}});
        shapes.push_back({prefix + ".B" + sfx, {cfg.out_dim, cfg.out_dim}});
        break;
    }
  }
  return shapes;
}

template <class Rng>
void init_omega(ParameterStore& store, const OmegaConfig& cfg, const std::string& prefix, Rng& rng) {
  for (const auto& [name, shape] : omega_param_shapes(cfg, prefix))
    store.add(name, glorot_uniform(shape.first, shape.second, rng));
}

/// Applies omega to the features of a strict graph's member cells.
///   conv: agg(G, X) W            (agg = mean by default)
///   gin:  relu(((1+eps) X + sum(G, X)) A) B
///   sage: [X | mean(G, X)] W
/// Two sublayers compose with a relu in between.
inline Var omega_forward(const OmegaConfig& cfg, const DirectedCellGraph& g, Var x, Tape& tape,
                         const ParameterStore& store, const std::string& prefix) {
  cfg.validate();
  if (x.rows() != g.node_count())
    throw error(errc::shape_mismatch, "omega input has " + std::to_string(x.rows()) +
                                          " rows for " + std::to_string(g.node_count()) + " nodes");
  if (x.cols() != cfg.in_dim)
    throw error(errc::shape_mismatch, "omega input width " + std::to_string(x.cols()) +
                                          " != in_dim " + std::to_string(cfg.in_dim));
  for (int s = 0; s < cfg.sublayers; ++s) {
    if (s > 0) x = relu(x);
    const std::string sfx = std::to_string(s);
    switch (cfg.kind) {
      case OmegaKind::conv:
        x = matmul(sparse_aggregate(g, x, cfg.conv_norm), tape.parameter(store, prefix + ".W" + sfx));
        break;
      case OmegaKind::sage:
        x = matmul(concat_cols({x, sparse_aggregate(g, x, AggregateMode::mean)}),
                   tape.parameter(store, prefix + ".W" + sfx));
        break;
      case OmegaKind::gin: {
        Var z = add(scale(x, 1.0 + cfg.gin_epsilon), sparse_aggregate(g, x, AggregateMode::sum));
        x = matmul(relu(matmul(z, tape.parameter(store, prefix + ".A" + sfx))),
                   tape.parameter(store, prefix + ".B" + sfx));
        break;
      }
    }
  }
  return x;
}

inline Tensor2 omega_forward(const OmegaConfig& cfg, const DirectedCellGraph& g, const Tensor2& x,
                             const ParameterStore& store, const std::string& prefix) {
  Tape tape;
  return omega_forward(cfg, g, tape.constant(x), tape, store, prefix).value();
}

// ---------------------------------------------------------------------------
// GCCN layer

enum class InterAggregation { sum, mean };

inline InterAggregation parse_inter_aggregation(std::string_view s) {
  if (s == "sum") return InterAggregation::sum;
  if (s == "mean") return InterAggregation::mean;
  throw error(errc::parse_error, "unknown inter-aggregation '" + std::string(s) + "'");
}

struct GccnLayerConfig {
  std::vector<NeighborhoodSpec> specs;
  std::vector<OmegaConfig> omega_per_spec;
  InterAggregation inter_agg = InterAggregation::sum;
  std::size_t in_dim = 1;
  std::size_t hidden = 32;

  void validate() const {
    if (specs.empty()) throw error(errc::config_mismatch, "layer needs at least one neighborhood");
    if (omega_per_spec.size() != specs.size())
      throw error(errc::config_mismatch, std::to_string(omega_per_spec.size()) + " omegas for " +
                                             std::to_string(specs.size()) + " neighborhoods");
    for (const auto& o : omega_per_spec) {
      o.validate();
      if (o.in_dim != in_dim || o.out_dim != hidden)
        throw error(errc::config_mismatch, "omega dims do not match layer dims");
    }
  }

  /// Same omega for every spec.
  static GccnLayerConfig uniform(std::vector<NeighborhoodSpec> specs, OmegaConfig omega,
                                 std::size_t in_dim, std::size_t hidden,
                                 InterAggregation inter = InterAggregation::sum) {
    omega.in_dim = in_dim;
    omega.out_dim = hidden;
    GccnLayerConfig cfg;
    cfg.omega_per_spec.assign(specs.size(), omega);
    cfg.specs = std::move(specs);
    cfg.inter_agg = inter;
    cfg.in_dim = in_dim;
    cfg.hidden = hidden;
    return cfg;
  }
};

template <class Rng>
void init_gccn_layer(ParameterStore& store, const GccnLayerConfig& cfg, const std::string& prefix,
                     Rng& rng) {
  cfg.validate();
  store.add(prefix + ".W0", glorot_uniform(cfg.in_dim, cfg.hidden, rng));
  for (std::size_t s = 0; s < cfg.specs.size(); ++s)
    init_omega(store, cfg.omega_per_spec[s], prefix + ".omega" + std::to_string(s), rng);
}

/// Pre-activation H W0 + M, where M inter-aggregates the omega outputs of every
/// graph at the cells that receive messages in it.
inline Var gccn_layer_preactivation(Var h, const HasseEnsemble& ens, const GccnLayerConfig& cfg,
                                    Tape& tape, const ParameterStore& store,
                                    const std::string& prefix) {
  cfg.validate();
  if (ens.graphs.size() != cfg.specs.size())
    throw error(errc::config_mismatch, "ensemble has " + std::to_string(ens.graphs.size()) +
                                           " graphs for " + std::to_string(cfg.specs.size()) +
                                           " specs");
  if (h.rows() != ens.complex_size)
    throw error(errc::shape_mismatch, "features have " + std::to_string(h.rows()) +
                                          " rows for " + std::to_string(ens.complex_size) + " cells");

  // Number of graphs in which each cell is a destination; drives mean inter-aggregation.
  std::vector<int> receive_count(ens.complex_size, 0);
  std::vector<std::vector<int>> dests(ens.graphs.size());
  for (std::size_t s = 0; s < ens.graphs.size(); ++s) {
    dests[s] = ens.graphs[s].destinations();
    for (int d : dests[s])
      ++receive_count[static_cast<std::size_t>(ens.graphs[s].node_cells[static_cast<std::size_t>(d)])];
  }

  Var out = matmul(h, tape.parameter(store, prefix + ".W0"));
  for (std::size_t s = 0; s < ens.graphs.size(); ++s) {
    const auto& g = ens.graphs[s];
    if (dests[s].empty()) continue;
    Var x = gather_rows(h, std::vector<int>(g.node_cells.begin(), g.node_cells.end()));
    Var y = omega_forward(cfg.omega_per_spec[s], g, x, tape, store, prefix + ".omega" + std::to_string(s));
    // Source-only nodes emit messages but their own rows are dropped here.
    Var yd = gather_rows(y, dests[s]);
    std::vector<int> target;
    std::vector<double> weight;
    for (int d : dests[s]) {
      const CellId c = g.node_cells[static_cast<std::size_t>(d)];
      target.push_back(c);
      if (cfg.inter_agg == InterAggregation::mean)
        weight.push_back(1.0 / receive_count[static_cast<std::size_t>(c)]);
    }
    out = add(out, scatter_add_rows(yd, std::move(target), ens.complex_size, std::move(weight)));
  }
  return out;
}

/// One GCCN layer: relu(H W0 + inter-aggregated omega outputs).
inline Var gccn_layer(Var h, const HasseEnsemble& ens, const GccnLayerConfig& cfg, Tape& tape,
                      const ParameterStore& store, const std::string& prefix) {
  return relu(gccn_layer_preactivation(h, ens, cfg, tape, store, prefix));
}

inline Tensor2 gccn_layer(const Tensor2& h, const HasseEnsemble& ens, const GccnLayerConfig& cfg,
                          const ParameterStore& store, const std::string& prefix) {
  Tape tape;
  return gccn_layer(tape.constant(h), ens, cfg, tape, store, prefix).value();
}

// ---------------------------------------------------------------------------
// Reference CCNN layer (message passing with rank-indexed linear messages)

struct CcnnReference {
  std::vector<NeighborhoodSpec> specs;
  AggregateMode intra_agg = AggregateMode::sum;
  bool shared_psi = false;  // one psi per neighborhood instead of per (neighborhood, rank)
  Rank max_rank = 2;
  std::size_t in_dim = 1;
  std::size_t out_dim = 1;

  std::string psi_name(const std::string& prefix, std::size_t spec, Rank r) const {
    return shared_psi ? prefix + ".psi" + std::to_string(spec)
                      : prefix + ".psi" + std::to_string(spec) + "_r" + std::to_string(r);
  }
};

template <class Rng>
void init_ccnn(ParameterStore& store, const CcnnReference& ref, const std::string& prefix, Rng& rng) {
  store.add(prefix + ".W0", glorot_uniform(ref.in_dim, ref.out_dim, rng));
  for (std::size_t s = 0; s < ref.specs.size(); ++s) {
    if (ref.shared_psi) {
      store.add(ref.psi_name(prefix, s, 0), glorot_uniform(ref.in_dim, ref.out_dim, rng));
    } else {
      for (Rank r = 0; r <= ref.max_rank; ++r)
        store.add(ref.psi_name(prefix, s, r), glorot_uniform(ref.in_dim, ref.out_dim, rng));
    }
  }
}

/// h'_sigma = relu(h_sigma W0 + sum_N AGG_{tau in N(sigma)} h_tau psi_{N, rk(sigma)}),
/// evaluated cell by cell straight from the neighborhood matrices.
inline Tensor2 ccnn_layer(const CombinatorialComplex& cc, const Tensor2& h,
                          const std::vector<NeighborhoodMatrix>& mats, const CcnnReference& ref,
                          const ParameterStore& store, const std::string& prefix) {
  if (mats.size() != ref.specs.size())
    throw error(errc::config_mismatch, "one neighborhood matrix per spec required");
  if (h.rows() != cc.size() || h.cols() != ref.in_dim)
    throw error(errc::shape_mismatch, "features " + h.shape_string() + " for " +
                                          std::to_string(cc.size()) + " cells");
  Tensor2 out = matmul(h, store.get(prefix + ".W0"));
  for (std::size_t s = 0; s < mats.size(); ++s) {
    if (mats[s].n != cc.size()) throw error(errc::config_mismatch, "matrix size vs complex");
    for (std::size_t i = 0; i < cc.size(); ++i) {
      const auto& nbrs = mats[s].rows[i];
      if (nbrs.empty()) continue;
      const Rank r = cc.cells()[i].rank;
      if (!ref.shared_psi && r > ref.max_rank)
        throw error(errc::config_mismatch, "no psi for rank " + std::to_string(r));
      const Tensor2& psi = store.get(ref.psi_name(prefix, s, r));
      const double w = ref.intra_agg == AggregateMode::mean ? 1.0 / static_cast<double>(nbrs.size()) : 1.0;
      for (CellId t : nbrs) {
        for (std::size_t k = 0; k < ref.in_dim; ++k) {
          const double hk = h(static_cast<std::size_t>(t), k);
          for (std::size_t j = 0; j < ref.out_dim; ++j) out(i, j) += w * hk * psi(k, j);
        }
      }
    }
  }
  for (auto& x : out.data()) x = x > 0.0 ? x : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Readout

enum class TaskKind { graph_class, graph_reg, node_class };

constexpr std::string_view to_string(TaskKind t) noexcept {
  switch (t) {
    case TaskKind::graph_class: return "graph_class";
    case TaskKind::graph_reg: return "graph_reg";
    case TaskKind::node_class: return "node_class";
  }
  return "?";
}

inline TaskKind parse_task(std::string_view s) {
  for (auto t : {TaskKind::graph_class, TaskKind::graph_reg, TaskKind::node_class})
    if (s == to_string(t)) return t;
  throw error(errc::parse_error, "unknown task '" + std::string(s) + "'");
}

/// Layout of a (possibly batched) set of complexes: owning graph and rank per cell row.
struct CellLayout {
  std::vector<int> cell_graph;
  std::vector<Rank> cell_rank;
  std::size_t graph_count = 0;

  static CellLayout of(const CombinatorialComplex& cc) {
    CellLayout l;
    l.graph_count = 1;
    for (const auto& c : cc.cells()) {
      l.cell_graph.push_back(0);
      l.cell_rank.push_back(c.rank);
    }
    return l;
  }
};

/// Readout head parameter: ((max_rank+1) * width + 1) x outputs for graph tasks,
/// (width + 1) x outputs for node tasks. The trailing row acts as a bias.
template <class Rng>
void init_readout(ParameterStore& store, TaskKind task, Rank max_rank, std::size_t width,
                  std::size_t outputs, const std::string& name, Rng& rng) {
  const std::size_t in = task == TaskKind::node_class
                             ? width + 1
                             : static_cast<std::size_t>(max_rank + 1) * width + 1;
  store.add(name, glorot_uniform(in, outputs, rng));
}

/// Graph tasks: per-graph mean pool of each rank 0..max_rank (an absent rank
/// contributes a zero block), concatenated, then a linear head.
/// Node tasks: linear head on rank-0 rows only.
inline Var readout(Var h, const CellLayout& layout, TaskKind task, Rank max_rank, Tape& tape,
                   const ParameterStore& store, const std::string& name) {
  if (layout.cell_rank.size() != h.rows())
    throw error(errc::shape_mismatch, "layout does not match feature rows");
  std::vector<Var> blocks;
  std::size_t rows = 0;
  if (task == TaskKind::node_class) {
    std::vector<int> nodes;
    for (std::size_t i = 0; i < layout.cell_rank.size(); ++i)
      if (layout.cell_rank[i] == 0) nodes.push_back(static_cast<int>(i));
    rows = nodes.size();
    blocks.push_back(gather_rows(h, std::move(nodes)));
  } else {
    rows = layout.graph_count;
    for (Rank r = 0; r <= max_rank; ++r) {
      std::vector<int> group(layout.cell_rank.size(), -1);
      for (std::size_t i = 0; i < group.size(); ++i)
        if (layout.cell_rank[i] == r) group[i] = layout.cell_graph[i];
      blocks.push_back(group_mean_pool(h, std::move(group), layout.graph_count));
    }
  }
  blocks.push_back(tape.constant(Tensor2(rows, 1, 1.0)));
  return matmul(concat_cols(blocks), tape.parameter(store, name));
}

// ---------------------------------------------------------------------------
// FLOP estimate for one layer

struct FlopEstimate {
  std::uint64_t message = 0;      // 2 |E| F^2
  std::uint64_t aggregation = 0;  // sum_n deg(n) F
  std::uint64_t update = 0;       // |N|
  std::uint64_t inter_agg = 0;    // sum_r n_r * (#neighborhoods sending to rank r) * F
  std::uint64_t total = 0;

  friend bool operator==(const FlopEstimate&, const FlopEstimate&) = default;
};

/// Closed-form count, one single-layer omega per spec with constant per-message
/// cost F^2, per-neighbor aggregation cost F and unit update cost.
inline FlopEstimate estimate_layer_flops(const CombinatorialComplex& cc,
                                         const std::vector<NeighborhoodSpec>& specs, std::uint64_t F) {
  FlopEstimate est;
  std::vector<std::uint64_t> senders(static_cast<std::size_t>(cc.dim()) + 1, 0);
  for (const auto& spec : specs) {
    const auto g = strict_hasse(cc, spec);
    const std::uint64_t edges = g.edge_count();
    est.message += 2 * edges * F * F;
    for (int d : g.in_degrees()) est.aggregation += static_cast<std::uint64_t>(d) * F;
    est.update += g.node_count();
    std::vector<bool> receives(senders.size(), false);
    for (int d : g.destinations())
      receives[static_cast<std::size_t>(cc.rank_of(g.node_cells[static_cast<std::size_t>(d)]))] = true;
    for (std::size_t r = 0; r < senders.size(); ++r) senders[r] += receives[r] ? 1 : 0;
  }
  const auto profile = cc.rank_profile();
  for (std::size_t r = 0; r < senders.size(); ++r) est.inter_agg += profile[r] * senders[r] * F;
  est.total = est.message + est.aggregation + est.update + est.inter_agg;
  return est;
}

inline FlopEstimate estimate_layer_flops(const CombinatorialComplex& cc, const GccnLayerConfig& cfg,
                                         std::uint64_t F) {
  return estimate_layer_flops(cc, cfg.specs, F);
}

// ---------------------------------------------------------------------------
// Model stack

struct ModelConfig {
  std::vector<NeighborhoodSpec> specs;
  OmegaKind omega = OmegaKind::gin;
  int sublayers = 1;
  double gin_epsilon = 0.0;
  std::size_t hidden = 32;
  int layers = 2;
  InterAggregation inter_agg = InterAggregation::sum;
  std::size_t in_dim = 1;
  std::size_t outputs = 2;
  TaskKind task = TaskKind::graph_class;
  Rank max_rank = 2;

  GccnLayerConfig layer(int l) const {
    OmegaConfig o;
    o.kind = omega;
    o.sublayers = sublayers;
    o.gin_epsilon = gin_epsilon;
    return GccnLayerConfig::uniform(specs, o, l == 0 ? in_dim : hidden, hidden, inter_agg);
  }

  void validate() const {
    if (layers < 1) throw error(errc::config_mismatch, "model needs at least one layer");
    if (outputs == 0) throw error(errc::config_mismatch, "model needs at least one output");
    for (int l = 0; l < layers; ++l) layer(l).validate();
  }
};

inline std::string layer_prefix(int l) { return "layer" + std::to_string(l); }

inline ParameterStore init_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  ParameterStore store;
  for (int l = 0; l < cfg.layers; ++l) init_gccn_layer(store, cfg.layer(l), layer_prefix(l), rng);
  init_readout(store, cfg.task, cfg.max_rank, cfg.hidden, cfg.outputs, "head", rng);
  return store;
}

/// Cell features, expansion and layout of one or more complexes processed together.
struct GraphBatch {
  HasseEnsemble ensemble;
  Tensor2 features;
  CellLayout layout;
};

/// Stacked GCCN layers followed by the readout; returns logits or predictions.
inline Var model_forward(const ModelConfig& cfg, const GraphBatch& batch, Tape& tape,
                         const ParameterStore& store) {
  Var h = tape.constant(batch.features);
  for (int l = 0; l < cfg.layers; ++l)
    h = gccn_layer(h, batch.ensemble, cfg.layer(l), tape, store, layer_prefix(l));
  return readout(h, batch.layout, cfg.task, cfg.max_rank, tape, store, "head");
}

}  // namespace gccn
