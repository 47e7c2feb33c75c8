// gccn: lift, expand, wl, train, flops, report.
//
// Exit status: 0 success (for wl: indistinguishable), 1 wl distinguishable,
// 2 usage error, 3 data error, 4 other failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gccn/gccn.hpp"

namespace fs = std::filesystem;
using namespace gccn;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_data = 3;
constexpr int exit_failure = 4;

constexpr std::string_view canonical_prefix = "canonical:";

struct Common {
  std::uint64_t seed = 0;
  std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

/// A complex file, or canonical:NAME for a built-in fixture.
ComplexFile load_input(const std::string& arg) {
  if (arg.rfind(canonical_prefix, 0) == 0) return {canonical_complex(arg.substr(canonical_prefix.size())), {}, {}};
  return load_complex(arg);
}

std::vector<NeighborhoodSpec> parse_specs(const std::vector<std::string>& raw) {
  std::vector<NeighborhoodSpec> out;
  for (const auto& s : raw) out.push_back(parse_spec(s));
  return out;
}

const CLI::Validator spec_check(
    [](std::string& s) -> std::string {
      try {
        parse_spec(s);
        return {};
      } catch (const error& e) {
        return e.what();
      }
    },
    "SPEC");

std::string file_safe(const std::string& s) {
  std::string out = s;
  for (char& ch : out)
    if (ch == '@') ch = '_';
  return out;
}

// ---------------------------------------------------------------------------

struct LiftArgs {
  Common common;
  std::string input;
  std::string domain = "simplicial";
  int max_rank = 2;
};

int run_lift(const LiftArgs& a) {
  const LiftDomain domain = parse_domain(a.domain);
  const fs::path out = a.common.out;
  if (a.input.rfind(canonical_prefix, 0) == 0) {
    const std::string name = a.input.substr(canonical_prefix.size());
    auto cc = canonical_complex(name);
    write_text(out / (name + ".json"), complex_to_json(cc).dump(1) + "\n");
    const auto p = cc.rank_profile();
    std::cout << name << ":";
    for (std::size_t r = 0; r < p.size(); ++r) std::cout << " rank" << r << "=" << p[r];
    std::cout << "\n";
    return 0;
  }
  const Dataset ds = parse_tudataset(a.input, a.common.seed);
  json complexes = json::array();
  std::vector<std::size_t> totals(static_cast<std::size_t>(a.max_rank) + 1, 0);
  for (const auto& g : ds.graphs) {
    auto cc = lift(g, domain, a.max_rank);
    auto f = lift_features(cc, g.node_features);
    const auto p = cc.rank_profile();
    for (std::size_t r = 0; r < p.size() && r < totals.size(); ++r) totals[r] += p[r];
    json j = complex_to_json(cc, &f);
    j["label"] = g.label;
    complexes.push_back(std::move(j));
  }
  json doc;
  doc["domain"] = a.domain;
  doc["max_rank"] = a.max_rank;
  doc["complexes"] = std::move(complexes);
  write_text(out / "complexes.json", doc.dump() + "\n");
  std::cout << "graphs=" << ds.graphs.size();
  for (std::size_t r = 0; r < totals.size(); ++r) std::cout << " rank" << r << "=" << totals[r];
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ExpandArgs {
  Common common;
  std::string input;
  std::vector<std::string> specs;
  bool augmented = false;
};

int run_expand(const ExpandArgs& a) {
  auto in = load_input(a.input);
  const auto specs = parse_specs(a.specs);
  const fs::path out = a.common.out;
  fs::create_directories(out);
  if (a.augmented) {
    auto g = augmented_hasse(in.cc, specs);
    std::ofstream f(out / "augmented.edges", std::ios::binary);
    write_edge_list(f, g);
    std::cout << "augmented nodes=" << g.node_count() << " edges=" << g.edge_count() << "\n";
    return 0;
  }
  const auto ens = expand_ensemble(in.cc, specs);
  for (std::size_t i = 0; i < ens.graphs.size(); ++i) {
    const auto& g = ens.graphs[i];
    const std::string name = to_string(specs[i]);
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%02zu_", i);
    std::ofstream f(out / (prefix + file_safe(name) + ".edges"), std::ios::binary);
    write_edge_list(f, g);
    std::cout << name << " nodes=" << g.node_count() << " edges=" << g.edge_count() << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct WlArgs {
  Common common;
  std::vector<std::string> inputs;
  std::string spec;
  int k = 0;
};

int run_wl(const WlArgs& a, bool out_given) {
  const auto spec = parse_spec(a.spec);
  ColorTable table;
  std::vector<ColorHistogram> hs;
  json report = json::array();
  for (const auto& path : a.inputs) {
    auto in = load_input(path);
    const Coloring labels = in.labels.empty() ? Coloring::uniform(in.cc.size()) : Coloring{in.labels, 0};
    hs.push_back(a.k ? kccwl(in.cc, spec, a.k, labels, table) : ccwl(in.cc, spec, labels, table));
    const auto line = histogram_line(hs.back());
    std::cout << path << ": " << line << "\n";
    report.push_back({{"input", path}, {"rounds", hs.back().stable_round}, {"classes", hs.back().class_count()},
                      {"class_sizes", hs.back().sorted_counts()}});
  }
  const bool differ = distinguishable(hs[0], hs[1]);
  std::cout << (differ ? "distinguishable" : "indistinguishable") << "\n";
  if (out_given) {
    json doc;
    doc["spec"] = a.spec;
    doc["k"] = a.k;
    doc["inputs"] = std::move(report);
    doc["distinguishable"] = differ;
    write_text(fs::path(a.common.out) / "wl.json", doc.dump(2) + "\n");
  }
  return differ ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string config;
  bool seed_given = false;
};

int run_train(TrainArgs& a) {
  RunConfig rc = load_run_config(a.config);
  if (a.seed_given) rc.train.seed = a.common.seed;
  const Dataset ds = load_run_dataset(rc);
  const auto result = train(rc.model, ds, rc.train);
  write_run_outputs(a.common.out, rc, result);
  const auto& m = result.metrics;
  std::cout << "epochs=" << m.epochs_run << " best_epoch=" << m.best_epoch << " " << m.metric
            << " train=" << format_double(m.train.metric) << " val=" << format_double(m.val.metric)
            << " test=" << format_double(m.test.metric) << " params=" << m.parameter_count << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct FlopsArgs {
  Common common;
  std::string input;
  std::string config;
  std::vector<std::string> specs;
  std::size_t width = 0;
};

int run_flops(const FlopsArgs& a) {
  auto in = load_input(a.input);
  std::vector<NeighborhoodSpec> specs;
  std::size_t width = 32;
  if (!a.config.empty()) {
    const RunConfig rc = load_run_config(a.config);
    specs = rc.model.specs;
    width = rc.model.hidden;
  }
  if (!a.specs.empty()) specs = parse_specs(a.specs);
  if (specs.empty()) throw error(errc::empty_spec_list, "give --spec or --config");
  if (a.width) width = a.width;
  json doc = flops_json(estimate_layer_flops(in.cc, specs, width));
  doc["width"] = width;
  json per = json::array();
  for (const auto& s : specs) {
    json e = flops_json(estimate_layer_flops(in.cc, {s}, width));
    e["spec"] = to_string(s);
    per.push_back(std::move(e));
  }
  doc["per_spec"] = std::move(per);
  write_text(fs::path(a.common.out) / "flops.json", doc.dump(2) + "\n");
  std::cout << doc.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  Common common;
  std::vector<std::string> inputs;
};

struct Stat {
  std::vector<double> xs;
  std::string str() const {
    if (xs.empty()) return "-";
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f ± %.4f", mean, sd);
    return buf;
  }
};

int run_report(const ReportArgs& a) {
  Stat best_val, final_loss, epochs, test;
  std::string rows = "run,epochs,best_epoch,best_val_metric,final_train_loss,test_metric\n";
  for (const auto& arg : a.inputs) {
    fs::path csv = arg;
    if (fs::is_directory(csv)) csv /= "metrics.csv";
    const auto curve = parse_metrics_csv(read_text(csv), csv.string());
    if (curve.empty()) throw error(errc::malformed_line, csv.string() + ": no epochs");
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.size(); ++i)
      if (curve[i].val_metric > curve[best].val_metric) best = i;
    // Regression runs report an error metric; the summary says which way is better.
    std::string test_cell = "";
    const fs::path summary = csv.parent_path() / "summary.json";
    if (fs::exists(summary)) {
      const json s = parse_json(read_text(summary), summary.string());
      const std::string metric = s.value("metric", "accuracy");
      if (metric == "mae")
        for (std::size_t i = 1; i < curve.size(); ++i)
          if (curve[i].val_metric < curve[best].val_metric) best = i;
      if (s.contains("test") && s["test"].contains(metric)) {
        const double t = s["test"][metric].get<double>();
        test.xs.push_back(t);
        test_cell = format_double(t);
      }
    }
    best_val.xs.push_back(curve[best].val_metric);
    final_loss.xs.push_back(curve.back().train_loss);
    epochs.xs.push_back(static_cast<double>(curve.size()));
    rows += csv.parent_path().string() + "," + std::to_string(curve.size()) + "," +
            std::to_string(curve[best].epoch) + "," + format_double(curve[best].val_metric) + "," +
            format_double(curve.back().train_loss) + "," + test_cell + "\n";
  }
  write_text(fs::path(a.common.out) / "report.csv", rows);
  std::cout << "runs=" << a.inputs.size() << "\n"
            << "epochs           " << epochs.str() << "\n"
            << "best val metric  " << best_val.str() << "\n"
            << "final train loss " << final_loss.str() << "\n"
            << "test metric      " << test.str() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GCCN toolkit: graph lifting, Hasse expansion, WL tests, training"};
  app.require_subcommand(1);
  app.footer("Exit status: 0 ok (wl: indistinguishable), 1 wl distinguishable, 2 usage error, 3 data error.");

  LiftArgs lift_args;
  auto* lift_cmd = app.add_subcommand("lift", "Lift a TUDataset directory (or canonical:NAME) to complexes");
  add_common(lift_cmd, lift_args.common);
  lift_cmd->add_option("input", lift_args.input, "TUDataset directory or canonical:NAME")->required();
  lift_cmd->add_option("--domain", lift_args.domain, "Lifting domain")
      ->check(CLI::IsMember({"simplicial", "cell"}))
      ->capture_default_str();
  lift_cmd->add_option("--max-rank", lift_args.max_rank, "Highest cell rank")
      ->check(CLI::Range(0, 16))
      ->capture_default_str();

  ExpandArgs expand_args;
  auto* expand_cmd = app.add_subcommand("expand", "Write the strictly augmented Hasse graph of each neighborhood");
  add_common(expand_cmd, expand_args.common);
  expand_cmd->add_option("input", expand_args.input, "Complex JSON or canonical:NAME")->required();
  expand_cmd->add_option("--spec", expand_args.specs, "Neighborhood spec, e.g. up_adjacency@0 (repeatable)")
      ->required()
      ->check(spec_check);
  expand_cmd->add_flag("--augmented", expand_args.augmented, "Write one graph over all cells instead");

  WlArgs wl_args;
  auto* wl_cmd = app.add_subcommand("wl", "Compare two complexes with CCWL (or k-CCWL); exit 0 if indistinguishable");
  add_common(wl_cmd, wl_args.common);
  wl_cmd->add_option("inputs", wl_args.inputs, "Two complex files or canonical:NAME")->required()->expected(2);
  wl_cmd->add_option("--spec", wl_args.spec, "Neighborhood spec")->required()->check(spec_check);
  wl_cmd->add_option("--k", wl_args.k, "Use set-based k-CCWL with this k (2 or 3)");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a run config");
  add_common(train_cmd, train_args.common);
  train_cmd->get_option("--out")->default_str("run");
  train_args.common.out = "run";
  train_cmd->add_option("--config", train_args.config, "Run config file")->required();

  FlopsArgs flops_args;
  auto* flops_cmd = app.add_subcommand("flops", "Estimate the FLOPs of one layer on a complex");
  add_common(flops_cmd, flops_args.common);
  flops_cmd->add_option("input", flops_args.input, "Complex JSON or canonical:NAME")->required();
  flops_cmd->add_option("--config", flops_args.config, "Run config supplying specs and width");
  flops_cmd->add_option("--spec", flops_args.specs, "Neighborhood spec (repeatable, overrides config)")->check(spec_check);
  flops_cmd->add_option("--width", flops_args.width, "Feature width F (default: config hidden or 32)");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Aggregate metrics.csv files over seeds (mean ± std)");
  add_common(report_cmd, report_args.common);
  report_cmd->add_option("inputs", report_args.inputs, "metrics.csv files or run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*lift_cmd) return run_lift(lift_args);
    if (*expand_cmd) return run_expand(expand_args);
    if (*wl_cmd) return run_wl(wl_args, wl_cmd->count("--out") > 0);
    if (*train_cmd) {
      train_args.seed_given = train_cmd->count("--seed") > 0;
      return run_train(train_args);
    }
    if (*flops_cmd) return run_flops(flops_args);
    if (*report_cmd) return run_report(report_args);
  } catch (const error& e) {
    std::cerr << "gccn: " << e.what() << "\n";
    if (e.is_data_error()) return exit_data;
    return e.code() == errc::diverged_loss ? exit_failure : exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "gccn: " << e.what() << "\n";
    return exit_failure;
  }
  return exit_usage;
}
