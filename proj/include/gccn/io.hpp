#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gccn/complex.hpp"
#include "gccn/data.hpp"
#include "gccn/error.hpp"
#include "gccn/models.hpp"
#include "gccn/neighborhoods.hpp"
#include "gccn/train.hpp"
#include "gccn/wl.hpp"

namespace gccn {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Files

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw error(errc::missing_file, p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw error(errc::missing_file, "cannot write " + p.string());
  out << text;
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw error(errc::parse_error, origin + ": " + e.what());
  }
}

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// Complex JSON: {"vertices": n, "cells": [{"v": [...], "rank": r}], "features": [[...]], "labels": [...]}

struct ComplexFile {
  CombinatorialComplex cc;
  Tensor2 features;         // empty if absent
  std::vector<int> labels;  // empty if absent
};

inline json tensor_rows_json(const Tensor2& t) {
  json rows = json::array();
  for (std::size_t i = 0; i < t.rows(); ++i) {
    json r = json::array();
    for (double x : t.row(i)) r.push_back(x);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json complex_to_json(const CombinatorialComplex& cc, const Tensor2* features = nullptr,
                            const std::vector<int>* labels = nullptr) {
  json j;
  j["vertices"] = cc.vertex_count();
  json cells = json::array();
  for (const auto& c : cc.cells()) cells.push_back({{"v", c.vertices}, {"rank", c.rank}});
  j["cells"] = std::move(cells);
  if (features) j["features"] = tensor_rows_json(*features);
  if (labels) j["labels"] = *labels;
  return j;
}

inline ComplexFile complex_from_json(const json& j) {
  ComplexFile out;
  try {
    const int n = j.at("vertices").get<int>();
    std::vector<RankedVertexSet> cells;
    for (const auto& c : j.at("cells")) cells.push_back({c.at("v").get<std::vector<VertexId>>(), c.at("rank").get<Rank>()});
    out.cc = build_complex(n, cells);
    // Features and labels follow the order of "cells", which must then be canonical.
    const bool aligned = j.contains("features") || j.contains("labels");
    if (aligned) {
      if (cells.size() != out.cc.size()) throw error(errc::parse_error, "features need every cell listed");
      for (std::size_t i = 0; i < cells.size(); ++i) {
        auto v = cells[i].vertices;
        std::sort(v.begin(), v.end());
        if (v != out.cc.cells()[i].vertices) throw error(errc::parse_error, "cells must be in canonical order");
      }
    }
    if (j.contains("features")) {
      const auto rows = j.at("features").get<std::vector<std::vector<double>>>();
      if (rows.size() != out.cc.size()) throw error(errc::parse_error, "one feature row per cell required");
      const std::size_t cols = rows.empty() ? 0 : rows[0].size();
      out.features = Tensor2(rows.size(), cols);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw error(errc::parse_error, "ragged feature rows");
        std::copy(rows[i].begin(), rows[i].end(), out.features.row(i).begin());
      }
    }
    if (j.contains("labels")) {
      out.labels = j.at("labels").get<std::vector<int>>();
      if (out.labels.size() != out.cc.size()) throw error(errc::parse_error, "one label per cell required");
    }
  } catch (const json::exception& e) {
    throw error(errc::parse_error, std::string("complex JSON: ") + e.what());
  }
  return out;
}

/// Reads a single complex from a file. A lift output holding exactly one
/// complex is accepted too.
inline ComplexFile load_complex(const std::filesystem::path& p) {
  json j = parse_json(read_text(p), p.string());
  if (j.is_object() && j.contains("complexes")) {
    if (j["complexes"].size() != 1)
      throw error(errc::parse_error, p.string() + " holds " + std::to_string(j["complexes"].size()) + " complexes");
    return complex_from_json(j["complexes"][0]);
  }
  return complex_from_json(j);
}

// ---------------------------------------------------------------------------
// Checkpoints: {"name": {"rows": r, "cols": c, "data": [...]}} in registration order

inline json checkpoint_to_json(const ParameterStore& store) {
  json j = json::object();
  for (const auto& p : store) {
    json e;
    e["rows"] = p.tensor.rows();
    e["cols"] = p.tensor.cols();
    e["data"] = p.tensor.data();
    j[p.name] = std::move(e);
  }
  return j;
}

inline ParameterStore checkpoint_from_json(const json& j) {
  ParameterStore store;
  try {
    for (const auto& [name, e] : j.items()) {
      const auto rows = e.at("rows").get<std::size_t>(), cols = e.at("cols").get<std::size_t>();
      auto data = e.at("data").get<std::vector<double>>();
      if (data.size() != rows * cols) throw error(errc::shape_mismatch, name + ": data length");
      store.add(name, Tensor2(rows, cols, std::move(data)));
    }
  } catch (const json::exception& e) {
    throw error(errc::parse_error, std::string("checkpoint JSON: ") + e.what());
  }
  return store;
}

// ---------------------------------------------------------------------------
// Run config: TOML-style sections with `key = value` lines. Values are
// quoted strings, numbers, booleans or flat arrays of those.

class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text) {
    ConfigFile cf;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = strip(strip_comment(line));
      if (line.empty()) continue;
      const std::string where = "config line " + std::to_string(lineno);
      if (line.front() == '[') {
        if (line.back() != ']') throw error(errc::parse_error, where + ": unterminated section");
        section = strip(line.substr(1, line.size() - 2));
        if (section.empty()) throw error(errc::parse_error, where + ": empty section name");
        cf.values_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw error(errc::parse_error, where + ": expected key = value");
      if (section.empty()) throw error(errc::parse_error, where + ": key outside a section");
      const std::string key = strip(line.substr(0, eq));
      if (key.empty()) throw error(errc::parse_error, where + ": empty key");
      auto& sec = cf.values_[section];
      if (sec.count(key)) throw error(errc::parse_error, where + ": duplicate key " + key);
      sec[key] = parse_value(strip(line.substr(eq + 1)), where);
    }
    return cf;
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    return s != values_.end() && s->second.count(key);
  }
  bool has_section(const std::string& section) const { return values_.count(section) > 0; }

  std::vector<std::string> list(const std::string& section, const std::string& key) const {
    const auto& v = at(section, key);
    if (!v.is_list) return {v.items.at(0)};
    return v.items;
  }
  std::string str(const std::string& section, const std::string& key, const std::string& fallback) const {
    if (!has(section, key)) return fallback;
    const auto& v = at(section, key);
    if (v.is_list) throw error(errc::parse_error, section + "." + key + " must be a single value");
    return v.items.at(0);
  }
  double real(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string s = str(section, key, "");
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || *end) throw error(errc::parse_error, section + "." + key + ": not a number: " + s);
    return x;
  }
  long long integer(const std::string& section, const std::string& key, long long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string s = str(section, key, "");
    char* end = nullptr;
    const long long x = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end) throw error(errc::parse_error, section + "." + key + ": not an integer: " + s);
    return x;
  }

  /// Rejects keys outside `allowed` (catches typos).
  void check_keys(const std::string& section, const std::vector<std::string>& allowed) const {
    auto s = values_.find(section);
    if (s == values_.end()) return;
    for (const auto& [k, v] : s->second)
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        throw error(errc::parse_error, "unknown key " + section + "." + k);
  }
  std::vector<std::string> sections() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
  }

 private:
  struct Value {
    bool is_list = false;
    std::vector<std::string> items;
  };

  static std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  }
  static std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
  }
  static std::string scalar(const std::string& s, const std::string& where) {
    if (s.empty()) throw error(errc::parse_error, where + ": missing value");
    if (s.front() == '"') {
      if (s.size() < 2 || s.back() != '"') throw error(errc::parse_error, where + ": unterminated string");
      return s.substr(1, s.size() - 2);
    }
    if (s.find_first_of(" \t\"[],") != std::string::npos) throw error(errc::parse_error, where + ": bad value " + s);
    return s;
  }
  static Value parse_value(const std::string& s, const std::string& where) {
    Value v;
    if (!s.empty() && s.front() == '[') {
      if (s.back() != ']') throw error(errc::parse_error, where + ": unterminated array");
      v.is_list = true;
      const std::string body = strip(s.substr(1, s.size() - 2));
      if (body.empty()) return v;
      std::size_t start = 0;
      bool quoted = false;
      for (std::size_t i = 0; i <= body.size(); ++i) {
        if (i < body.size() && body[i] == '"') quoted = !quoted;
        if (i == body.size() || (body[i] == ',' && !quoted)) {
          v.items.push_back(scalar(strip(body.substr(start, i - start)), where));
          start = i + 1;
        }
      }
      return v;
    }
    v.items.push_back(scalar(s, where));
    return v;
  }
  const Value& at(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw error(errc::parse_error, "missing " + section + "." + key);
    return values_.at(section).at(key);
  }

  std::map<std::string, std::map<std::string, Value>> values_;
};

struct DataConfig {
  std::string source = "synth";  // "synth" or a TUDataset directory
  int synth_graphs = 100;
  std::uint64_t synth_seed = 0;
  std::uint64_t split_seed = 0;
};

struct RunConfig {
  DataConfig data;
  ModelConfig model;
  TrainConfig train;
  std::filesystem::path base_dir;  // relative data paths resolve against this
};

inline FeatureLiftMethod parse_feature_lift(std::string_view s) {
  if (s == "sum") return FeatureLiftMethod::sum;
  if (s == "mean") return FeatureLiftMethod::mean;
  throw error(errc::parse_error, "unknown feature lift '" + std::string(s) + "'");
}

inline RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = ".") {
  const auto cf = ConfigFile::parse(text);
  for (const auto& s : cf.sections())
    if (s != "data" && s != "model" && s != "train") throw error(errc::parse_error, "unknown section [" + s + "]");
  cf.check_keys("data", {"source", "synth_graphs", "synth_seed", "split_seed", "domain", "max_rank", "feature_lift"});
  cf.check_keys("model", {"specs", "preset", "omega", "sublayers", "gin_epsilon", "hidden", "layers", "inter_agg", "task"});
  cf.check_keys("train", {"lr", "max_epochs", "patience", "step_size", "gamma", "seed"});

  RunConfig rc;
  rc.base_dir = base_dir;
  rc.data.source = cf.str("data", "source", rc.data.source);
  rc.data.synth_graphs = static_cast<int>(cf.integer("data", "synth_graphs", rc.data.synth_graphs));
  rc.data.synth_seed = static_cast<std::uint64_t>(cf.integer("data", "synth_seed", 0));
  rc.data.split_seed = static_cast<std::uint64_t>(cf.integer("data", "split_seed", 0));
  rc.train.domain = parse_domain(cf.str("data", "domain", "simplicial"));
  rc.train.feature_lift = parse_feature_lift(cf.str("data", "feature_lift", "sum"));

  auto& m = rc.model;
  m.max_rank = static_cast<Rank>(cf.integer("data", "max_rank", 2));
  if (cf.has("model", "specs") && cf.has("model", "preset"))
    throw error(errc::parse_error, "give either model.specs or model.preset");
  if (cf.has("model", "preset")) {
    m.specs = preset_specs(cf.str("model", "preset", ""));
  } else if (cf.has("model", "specs")) {
    for (const auto& s : cf.list("model", "specs")) m.specs.push_back(parse_spec(s));
  } else {
    throw error(errc::parse_error, "missing model.specs");
  }
  m.omega = parse_omega_kind(cf.str("model", "omega", "gin"));
  m.sublayers = static_cast<int>(cf.integer("model", "sublayers", 1));
  m.gin_epsilon = cf.real("model", "gin_epsilon", 0.0);
  m.hidden = static_cast<std::size_t>(cf.integer("model", "hidden", 32));
  m.layers = static_cast<int>(cf.integer("model", "layers", 2));
  m.inter_agg = parse_inter_aggregation(cf.str("model", "inter_agg", "sum"));
  m.task = parse_task(cf.str("model", "task", "graph_class"));

  auto& t = rc.train;
  t.lr = cf.real("train", "lr", t.lr);
  t.max_epochs = static_cast<int>(cf.integer("train", "max_epochs", t.max_epochs));
  t.patience = static_cast<int>(cf.integer("train", "patience", t.patience));
  t.step_size = static_cast<int>(cf.integer("train", "step_size", t.step_size));
  t.gamma = cf.real("train", "gamma", t.gamma);
  t.seed = static_cast<std::uint64_t>(cf.integer("train", "seed", 0));
  t.validate();
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& p) {
  return parse_run_config(read_text(p), p.has_parent_path() ? p.parent_path() : ".");
}

/// Loads the dataset named by the config and sizes the model's input and output to it.
inline Dataset load_run_dataset(RunConfig& rc) {
  Dataset ds;
  if (rc.data.source == "synth") {
    ds = synth_dataset(static_cast<std::size_t>(rc.data.synth_graphs), rc.data.synth_seed);
  } else {
    std::filesystem::path p = rc.data.source;
    if (p.is_relative()) p = rc.base_dir / p;
    ds = parse_tudataset(p, rc.data.split_seed);
  }
  if (ds.graphs.empty()) throw error(errc::parse_error, "dataset has no graphs");
  if (ds.task != rc.model.task) throw error(errc::config_mismatch, "model.task differs from the dataset's task");
  rc.model.in_dim = ds.graphs.front().node_features.cols();
  rc.model.outputs = ds.task == TaskKind::graph_reg ? 1 : static_cast<std::size_t>(ds.class_count);
  return ds;
}

inline json run_config_json(const RunConfig& rc) {
  json j;
  j["data"] = {{"source", rc.data.source},
               {"synth_graphs", rc.data.synth_graphs},
               {"synth_seed", rc.data.synth_seed},
               {"split_seed", rc.data.split_seed},
               {"domain", rc.train.domain == LiftDomain::simplicial ? "simplicial" : "cell"},
               {"max_rank", rc.model.max_rank},
               {"feature_lift", rc.train.feature_lift == FeatureLiftMethod::sum ? "sum" : "mean"}};
  std::vector<std::string> specs;
  for (const auto& s : rc.model.specs) specs.push_back(to_string(s));
  j["model"] = {{"specs", specs},
                {"omega", to_string(rc.model.omega)},
                {"sublayers", rc.model.sublayers},
                {"gin_epsilon", rc.model.gin_epsilon},
                {"hidden", rc.model.hidden},
                {"layers", rc.model.layers},
                {"inter_agg", rc.model.inter_agg == InterAggregation::sum ? "sum" : "mean"},
                {"task", to_string(rc.model.task)},
                {"in_dim", rc.model.in_dim},
                {"outputs", rc.model.outputs}};
  j["train"] = {{"lr", rc.train.lr},
                {"max_epochs", rc.train.max_epochs},
                {"patience", rc.train.patience},
                {"step_size", rc.train.step_size},
                {"gamma", rc.train.gamma},
                {"seed", rc.train.seed}};
  return j;
}

// ---------------------------------------------------------------------------
// Run outputs

inline std::string metrics_csv(const Metrics& m) {
  std::string out = "epoch,lr,train_loss,val_metric\n";
  for (const auto& r : m.curve)
    out += std::to_string(r.epoch) + "," + format_double(r.lr) + "," + format_double(r.train_loss) + "," +
           format_double(r.val_metric) + "\n";
  return out;
}

struct CurveRow {
  int epoch = 0;
  double lr = 0.0, train_loss = 0.0, val_metric = 0.0;
};

inline std::vector<CurveRow> parse_metrics_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::vector<CurveRow> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line.rfind("epoch,lr,train_loss,val_metric", 0) != 0)
        throw error(errc::malformed_line, origin + " line 1: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    CurveRow r;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &r.epoch, &r.lr, &r.train_loss, &r.val_metric) != 4)
      throw error(errc::malformed_line, origin + " line " + std::to_string(lineno));
    rows.push_back(r);
  }
  return rows;
}

inline json summary_json(const RunConfig& rc, const Metrics& m) {
  json j;
  j["metric"] = m.metric;
  j["train"] = {{"loss", m.train.loss}, {m.metric, m.train.metric}};
  j["val"] = {{"loss", m.val.loss}, {m.metric, m.val.metric}};
  j["test"] = {{"loss", m.test.loss}, {m.metric, m.test.metric}};
  j["best_epoch"] = m.best_epoch;
  j["epochs_run"] = m.epochs_run;
  j["parameter_count"] = m.parameter_count;
  j["config"] = run_config_json(rc);
  return j;
}

/// Writes metrics.csv, summary.json, checkpoint.json and timing.json. Only
/// timing.json depends on the machine.
inline void write_run_outputs(const std::filesystem::path& dir, const RunConfig& rc, const TrainResult& r) {
  write_text(dir / "metrics.csv", metrics_csv(r.metrics));
  write_text(dir / "summary.json", summary_json(rc, r.metrics).dump(2) + "\n");
  write_text(dir / "checkpoint.json", checkpoint_to_json(r.params).dump() + "\n");
  write_text(dir / "timing.json", json{{"wall_seconds", r.metrics.wall_seconds}}.dump(2) + "\n");
}

inline json flops_json(const FlopEstimate& f) {
  return {{"message", f.message}, {"aggregation", f.aggregation}, {"update", f.update},
          {"inter_agg", f.inter_agg}, {"total", f.total}};
}

/// "rounds=R classes=C histogram=6×1,2×3": class size × number of classes of that size.
inline std::string histogram_line(const ColorHistogram& h) {
  std::map<std::size_t, std::size_t> by_size;
  for (auto n : h.sorted_counts()) ++by_size[n];
  std::string hist;
  for (auto it = by_size.rbegin(); it != by_size.rend(); ++it) {
    if (!hist.empty()) hist += ",";
    hist += std::to_string(it->first) + "×" + std::to_string(it->second);
  }
  return "rounds=" + std::to_string(h.stable_round) + " classes=" + std::to_string(h.class_count()) +
         " histogram=" + (hist.empty() ? "-" : hist);
}

}  // namespace gccn
