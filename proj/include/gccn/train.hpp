#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gccn/autodiff.hpp"
#include "gccn/data.hpp"
#include "gccn/error.hpp"
#include "gccn/models.hpp"

namespace gccn {

struct TrainConfig {
  double lr = 0.01;
  int max_epochs = 200;
  int patience = 50;
  int step_size = 50;
  double gamma = 0.5;
  std::uint64_t seed = 0;
  LiftDomain domain = LiftDomain::simplicial;
  FeatureLiftMethod feature_lift = FeatureLiftMethod::sum;

  void validate() const {
    if (!(lr > 0.0)) throw error(errc::config_mismatch, "lr must be positive");
    if (patience < 1) throw error(errc::config_mismatch, "patience must be at least 1");
    if (max_epochs < 0) throw error(errc::config_mismatch, "max_epochs must be non-negative");
    if (step_size < 1) throw error(errc::config_mismatch, "step_size must be at least 1");
  }

  /// Step decay: lr * gamma^floor(epoch / step_size).
  double lr_at(int epoch) const {
    double v = lr;
    for (int k = 0; k < epoch / step_size; ++k) v *= gamma;
    return v;
  }
};

/// Adam with bias correction.
class Adam {
 public:
  explicit Adam(const ParameterStore& store, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : b1_(beta1), b2_(beta2), eps_(eps) {
    for (const auto& p : store) {
      m_.emplace_back(p.tensor.rows(), p.tensor.cols());
      v_.emplace_back(p.tensor.rows(), p.tensor.cols());
    }
  }

  void step(ParameterStore& store, const Gradients& grads, double lr) {
    if (grads.size() != store.size()) throw error(errc::shape_mismatch, "gradient count differs from parameter count");
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, t_), c2 = 1.0 - std::pow(b2_, t_);
    for (std::size_t i = 0; i < store.size(); ++i) {
      auto& w = store[i].tensor.data();
      const auto& g = grads[i].data();
      auto& m = m_[i].data();
      auto& v = v_[i].data();
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = b1_ * m[j] + (1.0 - b1_) * g[j];
        v[j] = b2_ * v[j] + (1.0 - b2_) * g[j] * g[j];
        w[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
      }
    }
  }

  int steps() const noexcept { return t_; }

 private:
  double b1_, b2_, eps_;
  int t_ = 0;
  std::vector<Tensor2> m_, v_;
};

/// A lifted graph ready for batching.
struct LiftedSample {
  CombinatorialComplex cc;
  Tensor2 features;
  int label = 0;
  double target = 0.0;
  std::vector<int> node_labels;
};

inline std::vector<LiftedSample> lift_dataset(const Dataset& ds, LiftDomain domain, Rank max_rank,
                                              FeatureLiftMethod method = FeatureLiftMethod::sum) {
  std::vector<LiftedSample> out;
  out.reserve(ds.graphs.size());
  for (const auto& g : ds.graphs) {
    LiftedSample s{lift(g, domain, max_rank), Tensor2(), g.label, g.target, g.node_labels};
    s.features = lift_features(s.cc, g.node_features, method);
    out.push_back(std::move(s));
  }
  return out;
}

/// A batch plus its supervision.
struct SplitData {
  GraphBatch batch;
  std::vector<int> labels;  // graph or node classes
  Tensor2 targets;          // regression targets, one row per graph
  std::size_t count() const { return batch.layout.graph_count; }
  bool empty() const { return batch.layout.graph_count == 0; }
};

/// Concatenates the selected samples into one disconnected batch.
inline SplitData make_split(const std::vector<LiftedSample>& samples, const std::vector<int>& indices,
                            const ModelConfig& cfg) {
  SplitData out;
  std::vector<HasseEnsemble> parts;
  parts.reserve(indices.size());
  std::size_t rows = 0, cols = cfg.in_dim;
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= samples.size())
      throw error(errc::out_of_range, "split index " + std::to_string(i));
    const auto& s = samples[static_cast<std::size_t>(i)];
    if (s.features.cols() != cols)
      throw error(errc::config_mismatch, "feature width " + std::to_string(s.features.cols()) +
                                             " does not match model input " + std::to_string(cols));
    parts.push_back(expand_ensemble(s.cc, cfg.specs));
    rows += s.cc.size();
  }
  std::vector<const HasseEnsemble*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  out.batch.ensemble = ptrs.empty() ? HasseEnsemble{} : concat_ensembles(ptrs);
  out.batch.features = Tensor2(rows, cols);
  out.targets = Tensor2(indices.size(), 1);
  std::size_t row = 0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto& s = samples[static_cast<std::size_t>(indices[k])];
    for (std::size_t c = 0; c < s.cc.size(); ++c) {
      auto src = s.features.row(c);
      std::copy(src.begin(), src.end(), out.batch.features.row(row + c).begin());
      out.batch.layout.cell_graph.push_back(static_cast<int>(k));
      out.batch.layout.cell_rank.push_back(s.cc.cells()[c].rank);
    }
    row += s.cc.size();
    out.targets(k, 0) = s.target;
    if (cfg.task == TaskKind::node_class) {
      if (s.node_labels.size() != static_cast<std::size_t>(s.cc.vertex_count()))
        throw error(errc::config_mismatch, "node task needs a label per node");
      out.labels.insert(out.labels.end(), s.node_labels.begin(), s.node_labels.end());
    } else {
      out.labels.push_back(s.label);
    }
  }
  out.batch.layout.graph_count = indices.size();
  return out;
}

inline Var task_loss(const ModelConfig& cfg, Var pred, const SplitData& split) {
  return cfg.task == TaskKind::graph_reg ? mse_loss(pred, split.targets)
                                         : softmax_cross_entropy(pred, split.labels);
}

/// Accuracy for classification, mean absolute error for regression.
struct SplitMetrics {
  double loss = 0.0;
  double metric = 0.0;
  friend bool operator==(const SplitMetrics&, const SplitMetrics&) = default;
};

inline bool higher_is_better(TaskKind t) { return t != TaskKind::graph_reg; }
inline std::string metric_name(TaskKind t) { return t == TaskKind::graph_reg ? "mae" : "accuracy"; }

inline SplitMetrics evaluate(const ParameterStore& store, const ModelConfig& cfg, const SplitData& split) {
  if (split.empty()) return {};
  Tape tape;
  Var pred = model_forward(cfg, split.batch, tape, store);
  SplitMetrics m;
  m.loss = task_loss(cfg, pred, split).value()(0, 0);
  const Tensor2& p = pred.value();
  if (cfg.task == TaskKind::graph_reg) {
    if (p.rows() != split.targets.rows())
      throw error(errc::shape_mismatch, "prediction rows " + std::to_string(p.rows()));
    double s = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) s += std::abs(p(i, 0) - split.targets(i, 0));
    m.metric = s / static_cast<double>(p.rows());
  } else {
    if (p.rows() != split.labels.size())
      throw error(errc::shape_mismatch, "prediction rows " + std::to_string(p.rows()));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < p.cols(); ++j)
        if (p(i, j) > p(i, best)) best = j;
      if (static_cast<int>(best) == split.labels[i]) ++correct;
    }
    m.metric = static_cast<double>(correct) / static_cast<double>(p.rows());
  }
  return m;
}

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct Metrics {
  std::vector<EpochRecord> curve;
  std::string metric;  // "accuracy" or "mae"
  SplitMetrics train, val, test;
  int best_epoch = -1;  // -1: the initialized model was kept
  int epochs_run = 0;
  double wall_seconds = 0.0;
  std::size_t parameter_count = 0;
};

/// Non-finite loss or gradient; carries the parameters from before the failing step.
class DivergedLoss : public error {
 public:
  DivergedLoss(int epoch, ParameterStore last_finite)
      : error(errc::diverged_loss, "non-finite loss at epoch " + std::to_string(epoch)),
        epoch_(epoch),
        last_(std::move(last_finite)) {}
  int epoch() const noexcept { return epoch_; }
  const ParameterStore& last_finite() const noexcept { return last_; }

 private:
  int epoch_;
  ParameterStore last_;
};

struct TrainResult {
  ParameterStore params;  // best-validation checkpoint
  Metrics metrics;
};

/// Full-batch training with per-epoch validation. The returned parameters are
/// the best validation checkpoint (the training split stands in when there is
/// no validation split).
inline TrainResult train(const ModelConfig& cfg, const std::vector<LiftedSample>& samples, const Splits& splits,
                         const TrainConfig& tc) {
  tc.validate();
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const SplitData tr = make_split(samples, splits.train, cfg);
  const SplitData va = make_split(samples, splits.val, cfg);
  const SplitData te = make_split(samples, splits.test, cfg);
  if (tr.empty()) throw error(errc::invalid_argument, "empty training split");
  if (cfg.task != TaskKind::graph_reg)
    for (int y : tr.labels)
      if (y < 0 || static_cast<std::size_t>(y) >= cfg.outputs)
        throw error(errc::config_mismatch, "label " + std::to_string(y) + " outside model outputs");
  const SplitData& watch = va.empty() ? tr : va;

  ParameterStore store = init_model(cfg, tc.seed);
  ParameterStore best = store;
  const bool up = higher_is_better(cfg.task);
  double best_metric = evaluate(store, cfg, watch).metric;
  Metrics m;
  m.metric = metric_name(cfg.task);
  int since = 0;
  Adam opt(store);
  for (int epoch = 0; epoch < tc.max_epochs; ++epoch) {
    const double lr = tc.lr_at(epoch);
    double loss = 0.0;
    Gradients grads;
    try {
      Tape tape;
      Var l = task_loss(cfg, model_forward(cfg, tr.batch, tape, store), tr);
      loss = l.value()(0, 0);
      grads = tape.backward(l, store);
    } catch (const error& e) {
      if (e.code() == errc::non_finite_value) throw DivergedLoss(epoch, store);
      throw;
    }
    for (const auto& g : grads)
      if (!std::isfinite(loss) || !g.all_finite()) throw DivergedLoss(epoch, store);
    ParameterStore before = store;
    opt.step(store, grads, lr);
    double val_metric = 0.0;
    try {
      val_metric = evaluate(store, cfg, watch).metric;
    } catch (const error& e) {
      if (e.code() == errc::non_finite_value) throw DivergedLoss(epoch, std::move(before));
      throw;
    }
    m.curve.push_back({epoch, lr, loss, val_metric});
    m.epochs_run = epoch + 1;
    if (up ? val_metric > best_metric : val_metric < best_metric) {
      best_metric = val_metric;
      best = store;
      m.best_epoch = epoch;
      since = 0;
    } else if (++since >= tc.patience) {
      break;
    }
  }
  m.train = evaluate(best, cfg, tr);
  m.val = evaluate(best, cfg, va);
  m.test = evaluate(best, cfg, te);
  m.parameter_count = best.scalar_count();
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(best), std::move(m)};
}

inline TrainResult train(const ModelConfig& cfg, const Dataset& ds, const TrainConfig& tc) {
  if (cfg.task != ds.task) throw error(errc::config_mismatch, "model task differs from dataset task");
  return train(cfg, lift_dataset(ds, tc.domain, cfg.max_rank, tc.feature_lift), ds.splits, tc);
}

}  // namespace gccn
