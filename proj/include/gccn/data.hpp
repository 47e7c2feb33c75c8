#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gccn/complex.hpp"
#include "gccn/error.hpp"
#include "gccn/models.hpp"
#include "gccn/tensor.hpp"

namespace gccn {

/// A simple undirected graph before lifting.
struct GraphRecord {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;  // u < v, sorted, unique
  Tensor2 node_features;                   // node_count x F
  std::vector<int> node_labels;            // raw labels, empty if the dataset has none
  int label = 0;                           // class index
  double target = 0.0;                     // raw graph label / regression target

  friend bool operator==(const GraphRecord&, const GraphRecord&) = default;
};

struct Splits {
  std::vector<int> train, val, test;
};

struct Dataset {
  std::string name;
  std::vector<GraphRecord> graphs;
  TaskKind task = TaskKind::graph_class;
  int class_count = 0;
  Splits splits;
};

/// Adjacency lists of a record (sorted).
inline std::vector<std::vector<int>> adjacency(const GraphRecord& g) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.node_count));
  for (auto [u, v] : g.edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

/// Sorts, orients (u < v) and deduplicates edges; drops self-loops.
inline void normalize_edges(GraphRecord& g) {
  std::vector<std::pair<int, int>> e;
  for (auto [u, v] : g.edges) {
    if (u == v) continue;
    e.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  g.edges = std::move(e);
}

/// Seeded shuffle into 50% train, 25% validation, remainder test.
inline Splits make_splits(std::size_t n, std::uint64_t seed) {
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n_train = n / 2, n_val = n / 4;
  Splits s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
               idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
  for (auto* v : {&s.train, &s.val, &s.test}) std::sort(v->begin(), v->end());
  return s;
}

// ---------------------------------------------------------------------------
// TUDataset text format

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw error(errc::missing_file, p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string::npos) lines.pop_back();
  return lines;
}

// Parses whitespace- or comma-separated numbers; returns false on junk.
inline bool parse_numbers(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::string s = line;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) return false;
      out.push_back(v);
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

inline std::vector<long long> read_int_column(const std::filesystem::path& p) {
  std::vector<long long> out;
  std::vector<double> nums;
  auto lines = read_lines(p);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!parse_numbers(lines[i], nums) || nums.size() != 1 || nums[0] != std::floor(nums[0]))
      throw error(errc::malformed_line, p.filename().string() + " line " + std::to_string(i + 1));
    out.push_back(static_cast<long long>(nums[0]));
  }
  return out;
}

inline bool is_integral(double x) { return std::floor(x) == x && std::abs(x) < 1e15; }

}  // namespace detail

/// Reads DS_A.txt, DS_graph_indicator.txt, DS_graph_labels.txt and, when
/// present, DS_node_labels.txt. Node labels become one-hot features, otherwise
/// every node gets the scalar feature 1. Integral graph labels make a
/// classification task with classes in sorted label order.
inline Dataset parse_tudataset(const std::filesystem::path& dir, std::uint64_t split_seed = 0) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw error(errc::missing_file, dir.string() + " is not a directory");
  std::string prefix;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string fname = entry.path().filename().string();
    if (fname.size() > 6 && fname.compare(fname.size() - 6, 6, "_A.txt") == 0) {
      if (prefix.empty() || fname < prefix + "_A.txt") prefix = fname.substr(0, fname.size() - 6);
    }
  }
  if (prefix.empty()) throw error(errc::missing_file, "no *_A.txt in " + dir.string());
  auto file = [&](const std::string& suffix) { return dir / (prefix + "_" + suffix + ".txt"); };

  const auto indicator = detail::read_int_column(file("graph_indicator"));
  const auto graph_label_lines = detail::read_lines(file("graph_labels"));
  std::vector<double> raw_labels;
  {
    std::vector<double> nums;
    for (std::size_t i = 0; i < graph_label_lines.size(); ++i) {
      if (!detail::parse_numbers(graph_label_lines[i], nums) || nums.size() != 1)
        throw error(errc::malformed_line, prefix + "_graph_labels.txt line " + std::to_string(i + 1));
      raw_labels.push_back(nums[0]);
    }
  }
  std::vector<long long> node_labels;
  if (fs::exists(file("node_labels"))) node_labels = detail::read_int_column(file("node_labels"));

  const std::size_t n_nodes = indicator.size();
  const std::size_t n_graphs = raw_labels.size();
  if (!node_labels.empty() && node_labels.size() != n_nodes)
    throw error(errc::dangling_node_reference, "node_labels has " + std::to_string(node_labels.size()) +
                                                   " rows for " + std::to_string(n_nodes) + " nodes");

  Dataset ds;
  ds.name = prefix;
  ds.graphs.resize(n_graphs);
  std::vector<int> local(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const long long gid = indicator[i];
    if (gid < 1 || static_cast<std::size_t>(gid) > n_graphs)
      throw error(errc::dangling_node_reference,
                  "graph_indicator line " + std::to_string(i + 1) + " names graph " + std::to_string(gid));
    auto& g = ds.graphs[static_cast<std::size_t>(gid - 1)];
    local[i] = g.node_count++;
    if (!node_labels.empty()) g.node_labels.push_back(static_cast<int>(node_labels[i]));
  }

  const auto a_lines = detail::read_lines(file("A"));
  std::vector<double> nums;
  for (std::size_t i = 0; i < a_lines.size(); ++i) {
    if (!detail::parse_numbers(a_lines[i], nums) || nums.size() != 2 || !detail::is_integral(nums[0]) ||
        !detail::is_integral(nums[1]))
      throw error(errc::malformed_line, prefix + "_A.txt line " + std::to_string(i + 1));
    const long long a = static_cast<long long>(nums[0]), b = static_cast<long long>(nums[1]);
    if (a < 1 || b < 1 || static_cast<std::size_t>(a) > n_nodes || static_cast<std::size_t>(b) > n_nodes)
      throw error(errc::dangling_node_reference, prefix + "_A.txt line " + std::to_string(i + 1));
    const auto ga = indicator[static_cast<std::size_t>(a - 1)], gb = indicator[static_cast<std::size_t>(b - 1)];
    if (ga != gb)
      throw error(errc::dangling_node_reference,
                  prefix + "_A.txt line " + std::to_string(i + 1) + " joins two graphs");
    ds.graphs[static_cast<std::size_t>(ga - 1)].edges.emplace_back(local[static_cast<std::size_t>(a - 1)],
                                                                   local[static_cast<std::size_t>(b - 1)]);
  }

  // One-hot width covers every label value seen in the dataset.
  std::vector<int> label_values;
  for (long long l : node_labels) label_values.push_back(static_cast<int>(l));
  std::sort(label_values.begin(), label_values.end());
  label_values.erase(std::unique(label_values.begin(), label_values.end()), label_values.end());

  const bool classification =
      std::all_of(raw_labels.begin(), raw_labels.end(), [](double x) { return detail::is_integral(x); });
  std::vector<double> classes = raw_labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  ds.task = classification ? TaskKind::graph_class : TaskKind::graph_reg;
  ds.class_count = classification ? static_cast<int>(classes.size()) : 0;

  for (std::size_t gi = 0; gi < n_graphs; ++gi) {
    auto& g = ds.graphs[gi];
    normalize_edges(g);
    g.target = raw_labels[gi];
    if (classification)
      g.label = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), raw_labels[gi]) - classes.begin());
    if (label_values.empty()) {
      g.node_features = Tensor2(static_cast<std::size_t>(g.node_count), 1, 1.0);
    } else {
      g.node_features = Tensor2(static_cast<std::size_t>(g.node_count), label_values.size());
      for (std::size_t v = 0; v < g.node_labels.size(); ++v) {
        auto pos = std::lower_bound(label_values.begin(), label_values.end(), g.node_labels[v]) - label_values.begin();
        g.node_features(v, static_cast<std::size_t>(pos)) = 1.0;
      }
    }
  }
  ds.splits = make_splits(n_graphs, split_seed);
  return ds;
}

/// Writes the dataset in TUDataset text form (symmetric edge listing, 1-based ids).
inline void write_tudataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  const std::string p = ds.name.empty() ? "DS" : ds.name;
  std::ofstream a(dir / (p + "_A.txt")), ind(dir / (p + "_graph_indicator.txt")),
      gl(dir / (p + "_graph_labels.txt"));
  const bool has_node_labels =
      std::any_of(ds.graphs.begin(), ds.graphs.end(), [](const GraphRecord& g) { return !g.node_labels.empty(); });
  std::ofstream nl;
  if (has_node_labels) nl.open(dir / (p + "_node_labels.txt"));
  gl.precision(17);
  long long offset = 0;
  for (std::size_t gi = 0; gi < ds.graphs.size(); ++gi) {
    const auto& g = ds.graphs[gi];
    for (int v = 0; v < g.node_count; ++v) {
      ind << gi + 1 << '\n';
      if (has_node_labels) nl << g.node_labels.at(static_cast<std::size_t>(v)) << '\n';
    }
    for (auto [u, v] : g.edges) {
      a << offset + u + 1 << ", " << offset + v + 1 << '\n';
      a << offset + v + 1 << ", " << offset + u + 1 << '\n';
    }
    gl << g.target << '\n';
    offset += g.node_count;
  }
}

// ---------------------------------------------------------------------------
// Liftings

enum class LiftDomain { simplicial, cell };

inline LiftDomain parse_domain(std::string_view s) {
  if (s == "simplicial") return LiftDomain::simplicial;
  if (s == "cell") return LiftDomain::cell;
  throw error(errc::parse_error, "unknown domain '" + std::string(s) + "'");
}

/// Triangles u < v < w of a record.
inline std::vector<std::vector<VertexId>> triangles(const GraphRecord& g) {
  auto adj = adjacency(g);
  std::vector<std::vector<VertexId>> out;
  for (auto [u, v] : g.edges) {
    const auto& au = adj[static_cast<std::size_t>(u)];
    const auto& av = adj[static_cast<std::size_t>(v)];
    std::vector<int> common;
    std::set_intersection(au.begin(), au.end(), av.begin(), av.end(), std::back_inserter(common));
    for (int w : common)
      if (w > v) out.push_back({u, v, w});
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<RankedVertexSet> graph_cells(const GraphRecord& g, int max_rank) {
  std::vector<RankedVertexSet> cells;
  if (max_rank >= 1)
    for (auto [u, v] : g.edges) cells.push_back({{u, v}, 1});
  return cells;
}

/// Clique lifting: nodes, edges and (for max_rank >= 2) all triangles.
inline CombinatorialComplex clique_lift(const GraphRecord& g, int max_rank = 2) {
  if (g.node_count < 1) throw error(errc::invalid_argument, "cannot lift an empty graph");
  auto cells = graph_cells(g, max_rank);
  if (max_rank >= 2)
    for (auto& t : triangles(g)) cells.push_back({std::move(t), 2});
  return build_complex(g.node_count, std::move(cells));
}

/// Fundamental cycles of a breadth-first spanning forest, rooted at the lowest
/// vertex of each component; each cycle is listed in traversal order.
inline std::vector<std::vector<VertexId>> cycle_basis(const GraphRecord& g) {
  const auto adj = adjacency(g);
  const auto n = static_cast<std::size_t>(g.node_count);
  std::vector<int> parent(n, -1), depth(n, -1);
  std::set<std::pair<int, int>> tree;
  for (std::size_t root = 0; root < n; ++root) {
    if (depth[root] >= 0) continue;
    depth[root] = 0;
    std::queue<int> q;
    q.push(static_cast<int>(root));
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (depth[static_cast<std::size_t>(v)] >= 0) continue;
        depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(u)] + 1;
        parent[static_cast<std::size_t>(v)] = u;
        tree.insert({std::min(u, v), std::max(u, v)});
        q.push(v);
      }
    }
  }
  std::vector<std::vector<VertexId>> cycles;
  for (auto e : g.edges) {
    if (tree.count(e)) continue;
    int a = e.first, b = e.second;
    std::vector<int> left{a}, right{b};
    while (a != b) {
      if (depth[static_cast<std::size_t>(a)] >= depth[static_cast<std::size_t>(b)]) {
        a = parent[static_cast<std::size_t>(a)];
        left.push_back(a);
      } else {
        b = parent[static_cast<std::size_t>(b)];
        right.push_back(b);
      }
    }
    right.pop_back();  // the meeting vertex is already at the end of `left`
    left.insert(left.end(), right.rbegin(), right.rend());
    cycles.push_back(std::move(left));
  }
  return cycles;
}

struct CycleLiftReport {
  std::size_t basis_cycles = 0;
  std::size_t merged_duplicates = 0;  // basis cycles dropped for repeating a vertex set
};

/// Cycle lifting: nodes, edges and (for max_rank >= 2) one 2-cell per distinct
/// vertex set among the basis cycles.
inline CombinatorialComplex cycle_lift(const GraphRecord& g, int max_rank = 2,
                                       CycleLiftReport* report = nullptr) {
  if (g.node_count < 1) throw error(errc::invalid_argument, "cannot lift an empty graph");
  auto cells = graph_cells(g, max_rank);
  CycleLiftReport rep;
  if (max_rank >= 2) {
    std::set<std::vector<VertexId>> seen;
    for (auto cyc : cycle_basis(g)) {
      ++rep.basis_cycles;
      std::sort(cyc.begin(), cyc.end());
      if (!seen.insert(cyc).second) {
        ++rep.merged_duplicates;
        continue;
      }
      cells.push_back({std::move(cyc), 2});
    }
  }
  if (report) *report = rep;
  return build_complex(g.node_count, std::move(cells));
}

inline CombinatorialComplex lift(const GraphRecord& g, LiftDomain domain, int max_rank = 2) {
  return domain == LiftDomain::simplicial ? clique_lift(g, max_rank) : cycle_lift(g, max_rank);
}

enum class FeatureLiftMethod { sum, mean };

/// Rank-0 rows copy the node features; a higher cell's row is the sum (or
/// mean) of its vertices' rows.
inline Tensor2 lift_features(const CombinatorialComplex& cc, const Tensor2& node_features,
                             FeatureLiftMethod method = FeatureLiftMethod::sum) {
  if (node_features.rows() != static_cast<std::size_t>(cc.vertex_count()))
    throw error(errc::shape_mismatch, "node features " + node_features.shape_string() + " for " +
                                          std::to_string(cc.vertex_count()) + " vertices");
  Tensor2 out(cc.size(), node_features.cols());
  for (std::size_t i = 0; i < cc.size(); ++i) {
    const auto& vs = cc.cells()[i].vertices;
    const double w = method == FeatureLiftMethod::mean ? 1.0 / static_cast<double>(vs.size()) : 1.0;
    auto dst = out.row(i);
    for (VertexId v : vs) {
      auto src = node_features.row(static_cast<std::size_t>(v));
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixture complexes

inline std::vector<RankedVertexSet> faces_with_edges(const std::vector<std::vector<VertexId>>& faces) {
  std::set<std::vector<VertexId>> edges;
  std::vector<RankedVertexSet> cells;
  for (auto f : faces) {
    std::sort(f.begin(), f.end());
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = i + 1; j < f.size(); ++j) edges.insert({f[i], f[j]});
    cells.push_back({f, 2});
  }
  for (const auto& e : edges) cells.push_back({e, 1});
  return cells;
}

/// Named fixtures: "triangle" (one filled triangle), "icosahedron_faces"
/// (12/30/20), "five_tetrahedra" (five disjoint tetrahedron boundaries, 20/30/20)
/// and "glued_triangles" (two triangles glued along an edge).
inline CombinatorialComplex canonical_complex(std::string_view name) {
  if (name == "triangle") return build_complex(3, faces_with_edges({{0, 1, 2}}));
  if (name == "icosahedron_faces") {
    // 0 = top, 1..5 upper ring, 6..10 lower ring, 11 = bottom.
    std::vector<std::vector<VertexId>> faces;
    for (int i = 0; i < 5; ++i) {
      const int u = 1 + i, un = 1 + (i + 1) % 5, l = 6 + i, ln = 6 + (i + 1) % 5;
      faces.push_back({0, u, un});
      faces.push_back({11, l, ln});
      faces.push_back({u, un, l});
      faces.push_back({l, ln, un});
    }
    return build_complex(12, faces_with_edges(faces));
  }
  if (name == "five_tetrahedra") {
    std::vector<std::vector<VertexId>> faces;
    for (int t = 0; t < 5; ++t) {
      const int b = 4 * t;
      faces.push_back({b, b + 1, b + 2});
      faces.push_back({b, b + 1, b + 3});
      faces.push_back({b, b + 2, b + 3});
      faces.push_back({b + 1, b + 2, b + 3});
    }
    return build_complex(20, faces_with_edges(faces));
  }
  if (name == "glued_triangles") return build_complex(4, faces_with_edges({{0, 1, 2}, {1, 2, 3}}));
  throw error(errc::unknown_name, "no canonical complex named '" + std::string(name) + "'");
}

/// Neighborhoods used with the glued_triangles fixture: edges hear from two graphs,
/// nodes and faces from one.
inline std::vector<NeighborhoodSpec> glued_specs() {
  return {{NeighborhoodKind::up_adjacency, {}},
          {NeighborhoodKind::down_incidence, 1},
          {NeighborhoodKind::down_incidence, 2}};
}

// ---------------------------------------------------------------------------
// Synthetic triangle-detection task

inline bool has_triangle(const GraphRecord& g) { return !triangles(g).empty(); }

/// Balanced binary task on connected graphs with 6..12 nodes: label 1 graphs
/// contain at least one triangle, label 0 graphs contain none. Split 50/25/25.
inline Dataset synth_dataset(std::size_t n_graphs, std::uint64_t seed) {
  if (n_graphs < 2) throw error(errc::invalid_argument, "synth_dataset needs at least 2 graphs");
  std::mt19937_64 rng(seed);
  Dataset ds;
  ds.name = "synth";
  ds.task = TaskKind::graph_class;
  ds.class_count = 2;
  std::uniform_int_distribution<int> size_dist(6, 12);
  for (std::size_t i = 0; i < n_graphs; ++i) {
    const int label = static_cast<int>(i % 2);
    GraphRecord g;
    g.node_count = size_dist(rng);
    g.label = label;
    g.target = label;
    std::set<std::pair<int, int>> edges;
    std::vector<std::set<int>> adj(static_cast<std::size_t>(g.node_count));
    auto closes_triangle = [&](int u, int v) {
      for (int w : adj[static_cast<std::size_t>(u)])
        if (adj[static_cast<std::size_t>(v)].count(w)) return true;
      return false;
    };
    auto add_edge = [&](int u, int v) {
      edges.insert({std::min(u, v), std::max(u, v)});
      adj[static_cast<std::size_t>(u)].insert(v);
      adj[static_cast<std::size_t>(v)].insert(u);
    };
    // Random tree (always triangle-free), then extra edges.
    for (int v = 1; v < g.node_count; ++v) add_edge(v, std::uniform_int_distribution<int>(0, v - 1)(rng));
    const int extra = std::uniform_int_distribution<int>(1, g.node_count / 2)(rng);
    std::uniform_int_distribution<int> node(0, g.node_count - 1);
    for (int k = 0, tries = 0; k < extra && tries < 200; ++tries) {
      const int u = node(rng), v = node(rng);
      if (u == v || adj[static_cast<std::size_t>(u)].count(v)) continue;
      if (label == 0 && closes_triangle(u, v)) continue;
      add_edge(u, v);
      ++k;
    }
    if (label == 1 && !std::any_of(edges.begin(), edges.end(), [&](auto e) { return closes_triangle(e.first, e.second); })) {
      // Close a path u - m - w into a triangle.
      for (int m = 0; m < g.node_count; ++m) {
        const auto& nb = adj[static_cast<std::size_t>(m)];
        if (nb.size() >= 2) {
          add_edge(*nb.begin(), *std::next(nb.begin()));
          break;
        }
      }
    }
    g.edges.assign(edges.begin(), edges.end());
    g.node_features = Tensor2(static_cast<std::size_t>(g.node_count), 1, 1.0);
    ds.graphs.push_back(std::move(g));
  }
  ds.splits = make_splits(n_graphs, seed ^ 0x9e3779b97f4a7c15ULL);
  return ds;
}

/// Per-rank cell totals of a dataset under a lifting, ranks 0..max_rank.
inline std::vector<std::size_t> lift_totals(const Dataset& ds, LiftDomain domain, int max_rank = 2) {
  std::vector<std::size_t> totals(static_cast<std::size_t>(max_rank) + 1, 0);
  for (const auto& g : ds.graphs) {
    const auto profile = lift(g, domain, max_rank).rank_profile();
    for (std::size_t r = 0; r < profile.size() && r < totals.size(); ++r) totals[r] += profile[r];
  }
  return totals;
}

}  // namespace gccn
