#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gccn/error.hpp"
#include "gccn/hasse.hpp"
#include "gccn/tensor.hpp"

namespace gccn {

struct Parameter {
  std::string name;
  Tensor2 tensor;
};

/// Named model parameters in registration order; each name registers once.
class ParameterStore {
 public:
  void add(std::string name, Tensor2 value) {
    if (index_.count(name)) throw error(errc::duplicate_parameter, name);
    index_.emplace(name, params_.size());
    params_.push_back(Parameter{std::move(name), std::move(value)});
  }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }
  std::size_t index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw error(errc::unknown_parameter, std::string(name));
    return it->second;
  }
  const Tensor2& get(std::string_view name) const { return params_[index_of(name)].tensor; }
  Tensor2& get(std::string_view name) { return params_[index_of(name)].tensor; }

  std::size_t size() const noexcept { return params_.size(); }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  /// Total scalar count over all parameters.
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.tensor.size();
    return n;
  }

  friend bool operator==(const ParameterStore& a, const ParameterStore& b) {
    if (a.params_.size() != b.params_.size()) return false;
    for (std::size_t i = 0; i < a.params_.size(); ++i)
      if (a.params_[i].name != b.params_[i].name || !(a.params_[i].tensor == b.params_[i].tensor))
        return false;
    return true;
  }

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

/// Gradients aligned with a ParameterStore's registration order.
using Gradients = std::vector<Tensor2>;

class Tape;

/// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  const Tensor2& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Receives the output gradient and accumulates into the parents' gradients
/// (aligned with the parent list given at record time).
using BackwardFn = std::function<void(const Tensor2& grad_out, std::span<Tensor2* const> grad_in)>;

/// Append-only record of primitive applications. Node order is a topological
/// order, so backward is a single reverse sweep.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor2 value) { return push(std::move(value), {}, nullptr, std::nullopt); }

  /// Leaf bound to a stored parameter; gradients flow back to it by index.
  Var parameter(const ParameterStore& store, std::string_view name) {
    const std::size_t idx = store.index_of(name);
    return push(store[idx].tensor, {}, nullptr, idx);
  }

  /// Records a primitive. Throws NonFiniteValue if `value` has NaN/Inf entries.
  Var record(Tensor2 value, const std::vector<Var>& parents, BackwardFn backward) {
    if (!value.all_finite()) throw error(errc::non_finite_value, "primitive produced NaN/Inf");
    std::vector<std::size_t> ids;
    ids.reserve(parents.size());
    for (const Var& p : parents) {
      if (p.tape() != this) throw error(errc::invalid_argument, "parent recorded on another tape");
      ids.push_back(p.id());
    }
    return push(std::move(value), std::move(ids), std::move(backward), std::nullopt);
  }

  const Tensor2& value(std::size_t id) const { return nodes_.at(id).value; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// d(loss)/d(param) for every parameter in `store`; unused parameters get zeros.
  Gradients backward(Var loss, const ParameterStore& store) {
    if (loss.tape() != this || loss.id() >= nodes_.size())
      throw error(errc::detached_loss, "loss is not recorded on this tape");
    const Tensor2& lv = nodes_[loss.id()].value;
    if (lv.rows() != 1 || lv.cols() != 1)
      throw error(errc::detached_loss, "loss must be 1x1, got " + lv.shape_string());

    std::vector<std::optional<Tensor2>> grads(nodes_.size());
    grads[loss.id()] = Tensor2(1, 1, 1.0);
    Gradients out;
    out.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i)
      out.emplace_back(store[i].tensor.rows(), store[i].tensor.cols());

    for (std::size_t k = loss.id() + 1; k-- > 0;) {
      if (!grads[k]) continue;
      Node& n = nodes_[k];
      if (n.param_index) {
        if (*n.param_index >= out.size())
          throw error(errc::unknown_parameter, "tape references a parameter outside the store");
        out[*n.param_index] += *grads[k];
      }
      if (!n.backward) continue;
      std::vector<Tensor2*> parent_grads;
      parent_grads.reserve(n.parents.size());
      for (std::size_t p : n.parents) {
        if (!grads[p]) grads[p] = Tensor2(nodes_[p].value.rows(), nodes_[p].value.cols());
        parent_grads.push_back(&*grads[p]);
      }
      n.backward(*grads[k], parent_grads);
    }
    return out;
  }

 private:
  struct Node {
    Tensor2 value;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    std::optional<std::size_t> param_index;
  };

  Var push(Tensor2 value, std::vector<std::size_t> parents, BackwardFn fn,
           std::optional<std::size_t> param) {
    nodes_.push_back(Node{std::move(value), std::move(parents), std::move(fn), param});
    return Var(this, nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
};

inline const Tensor2& Var::value() const {
  if (!tape_) throw error(errc::detached_loss, "unbound variable");
  return tape_->value(id_);
}

// ---------------------------------------------------------------------------
// Primitives

inline Var matmul(Var a, Var b) {
  Tensor2 av = a.value(), bv = b.value();
  Tensor2 out = gccn::matmul(av, bv);
  return a.tape()->record(std::move(out), {a, b},
                          [av, bv](const Tensor2& g, std::span<Tensor2* const> in) {
                            *in[0] += matmul_nt(g, bv);
                            *in[1] += matmul_tn(av, g);
                          });
}

inline Var add(Var a, Var b) {
  a.value().require_same_shape(b.value(), "add");
  return a.tape()->record(a.value() + b.value(), {a, b},
                          [](const Tensor2& g, std::span<Tensor2* const> in) {
                            *in[0] += g;
                            *in[1] += g;
                          });
}

inline Var scale(Var a, double s) {
  return a.tape()->record(s * a.value(), {a}, [s](const Tensor2& g, std::span<Tensor2* const> in) {
    *in[0] += s * g;
  });
}

inline Var relu(Var a) {
  Tensor2 out = a.value();
  for (auto& x : out.data()) x = x > 0.0 ? x : 0.0;
  Tensor2 mask = out;
  for (auto& x : mask.data()) x = x > 0.0 ? 1.0 : 0.0;
  return a.tape()->record(std::move(out), {a},
                          [mask = std::move(mask)](const Tensor2& g, std::span<Tensor2* const> in) {
                            auto& d = in[0]->data();
                            for (std::size_t i = 0; i < d.size(); ++i) d[i] += g.data()[i] * mask.data()[i];
                          });
}

inline Var sum_all(Var a) {
  double s = 0.0;
  for (double x : a.value().data()) s += x;
  const std::size_t r = a.rows(), c = a.cols();
  return a.tape()->record(Tensor2(1, 1, s), {a},
                          [r, c](const Tensor2& g, std::span<Tensor2* const> in) {
                            *in[0] += Tensor2(r, c, g(0, 0));
                          });
}

/// out.row(k) = a.row(index[k]).
inline Var gather_rows(Var a, std::vector<int> index) {
  const Tensor2& av = a.value();
  Tensor2 out(index.size(), av.cols());
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] < 0 || static_cast<std::size_t>(index[k]) >= av.rows())
      throw error(errc::shape_mismatch, "gather index " + std::to_string(index[k]) +
                                            " outside " + av.shape_string());
    auto src = av.row(static_cast<std::size_t>(index[k]));
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return a.tape()->record(std::move(out), {a},
                          [index = std::move(index)](const Tensor2& g, std::span<Tensor2* const> in) {
                            for (std::size_t k = 0; k < index.size(); ++k) {
                              auto dst = in[0]->row(static_cast<std::size_t>(index[k]));
                              auto src = g.row(k);
                              for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
                            }
                          });
}

/// out has `rows` rows; out.row(target[k]) += weight[k] * a.row(k). Empty weights mean 1.
inline Var scatter_add_rows(Var a, std::vector<int> target, std::size_t rows,
                            std::vector<double> weight = {}) {
  const Tensor2& av = a.value();
  if (target.size() != av.rows() || (!weight.empty() && weight.size() != target.size()))
    throw error(errc::shape_mismatch, "scatter targets do not match " + av.shape_string());
  Tensor2 out(rows, av.cols());
  for (std::size_t k = 0; k < target.size(); ++k) {
    if (target[k] < 0 || static_cast<std::size_t>(target[k]) >= rows)
      throw error(errc::shape_mismatch, "scatter target out of range");
    const double w = weight.empty() ? 1.0 : weight[k];
    auto dst = out.row(static_cast<std::size_t>(target[k]));
    auto src = av.row(k);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
  }
  return a.tape()->record(
      std::move(out), {a},
      [target = std::move(target), weight = std::move(weight)](const Tensor2& g,
                                                               std::span<Tensor2* const> in) {
        for (std::size_t k = 0; k < target.size(); ++k) {
          const double w = weight.empty() ? 1.0 : weight[k];
          auto dst = in[0]->row(k);
          auto src = g.row(static_cast<std::size_t>(target[k]));
          for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
        }
      });
}

enum class AggregateMode { sum, mean };

namespace detail {

// Per-edge weights: 1 for sum, 1/in_degree(dst) for mean.
inline std::vector<double> edge_weights(const DirectedCellGraph& g, AggregateMode mode) {
  std::vector<double> w(g.edges.size(), 1.0);
  if (mode == AggregateMode::mean) {
    auto deg = g.in_degrees();
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      w[e] = 1.0 / deg[static_cast<std::size_t>(g.edges[e].second)];
  }
  return w;
}

}  // namespace detail

/// Row i = sum (or mean) of h.row(j) over edges (j, i). Nodes with no in-edges get zero rows.
inline Tensor2 sparse_aggregate(const DirectedCellGraph& g, const Tensor2& h, AggregateMode mode) {
  if (h.rows() != g.node_count())
    throw error(errc::shape_mismatch, "aggregate over " + std::to_string(g.node_count()) +
                                          " nodes given " + h.shape_string());
  const auto w = detail::edge_weights(g, mode);
  Tensor2 out(h.rows(), h.cols());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    auto dst = out.row(static_cast<std::size_t>(g.edges[e].second));
    auto src = h.row(static_cast<std::size_t>(g.edges[e].first));
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w[e] * src[j];
  }
  return out;
}

inline Var sparse_aggregate(const DirectedCellGraph& g, Var h, AggregateMode mode) {
  Tensor2 out = sparse_aggregate(g, h.value(), mode);
  return h.tape()->record(
      std::move(out), {h},
      [edges = g.edges, w = detail::edge_weights(g, mode)](const Tensor2& grad,
                                                           std::span<Tensor2* const> in) {
        for (std::size_t e = 0; e < edges.size(); ++e) {
          auto dst = in[0]->row(static_cast<std::size_t>(edges[e].first));
          auto src = grad.row(static_cast<std::size_t>(edges[e].second));
          for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w[e] * src[j];
        }
      });
}

/// Horizontal concatenation of matrices with equal row counts.
inline Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw error(errc::invalid_argument, "concat of nothing");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw error(errc::shape_mismatch, "concat_cols row mismatch");
    widths.push_back(p.cols());
    cols += p.cols();
  }
  Tensor2 out(rows, cols);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor2& v = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(v.row(i).begin(), v.row(i).end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(off));
    off += v.cols();
  }
  return parts.front().tape()->record(
      std::move(out), parts, [widths](const Tensor2& g, std::span<Tensor2* const> in) {
        std::size_t o = 0;
        for (std::size_t p = 0; p < widths.size(); ++p) {
          for (std::size_t i = 0; i < g.rows(); ++i) {
            auto dst = in[p]->row(i);
            for (std::size_t j = 0; j < widths[p]; ++j) dst[j] += g(i, o + j);
          }
          o += widths[p];
        }
      });
}

/// out.row(k) = mean of a.row(i) over i with group[i] == k; group -1 is ignored,
/// empty groups give zero rows.
inline Var group_mean_pool(Var a, std::vector<int> group, std::size_t n_groups) {
  const Tensor2& av = a.value();
  if (group.size() != av.rows()) throw error(errc::shape_mismatch, "group ids vs rows");
  std::vector<double> count(n_groups, 0.0);
  for (int gi : group) {
    if (gi >= static_cast<int>(n_groups)) throw error(errc::shape_mismatch, "group id too large");
    if (gi >= 0) count[static_cast<std::size_t>(gi)] += 1.0;
  }
  Tensor2 out(n_groups, av.cols());
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i] < 0) continue;
    const auto k = static_cast<std::size_t>(group[i]);
    auto dst = out.row(k);
    auto src = av.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j] / count[k];
  }
  return a.tape()->record(std::move(out), {a},
                          [group = std::move(group), count = std::move(count)](
                              const Tensor2& g, std::span<Tensor2* const> in) {
                            for (std::size_t i = 0; i < group.size(); ++i) {
                              if (group[i] < 0) continue;
                              const auto k = static_cast<std::size_t>(group[i]);
                              auto dst = in[0]->row(i);
                              auto src = g.row(k);
                              for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j] / count[k];
                            }
                          });
}

/// Mean over rows of -log softmax(logits)[label].
inline Var softmax_cross_entropy(Var logits, std::vector<int> labels) {
  const Tensor2& z = logits.value();
  if (labels.size() != z.rows() || z.rows() == 0)
    throw error(errc::shape_mismatch, "labels vs logits " + z.shape_string());
  Tensor2 prob(z.rows(), z.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= z.cols())
      throw error(errc::shape_mismatch, "label out of range");
    double m = -std::numeric_limits<double>::infinity();
    for (double x : z.row(i)) m = std::max(m, x);
    double s = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) s += std::exp(z(i, j) - m);
    for (std::size_t j = 0; j < z.cols(); ++j) prob(i, j) = std::exp(z(i, j) - m) / s;
    loss += -(z(i, static_cast<std::size_t>(labels[i])) - m - std::log(s));
  }
  const double n = static_cast<double>(z.rows());
  return logits.tape()->record(
      Tensor2(1, 1, loss / n), {logits},
      [prob = std::move(prob), labels = std::move(labels), n](const Tensor2& g,
                                                              std::span<Tensor2* const> in) {
        const double s = g(0, 0) / n;
        for (std::size_t i = 0; i < prob.rows(); ++i)
          for (std::size_t j = 0; j < prob.cols(); ++j)
            (*in[0])(i, j) += s * (prob(i, j) - (static_cast<int>(j) == labels[i] ? 1.0 : 0.0));
      });
}

/// Mean over all entries of (pred - target)^2.
inline Var mse_loss(Var pred, Tensor2 target) {
  pred.value().require_same_shape(target, "mse_loss");
  const Tensor2& p = pred.value();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p.data()[i] - target.data()[i];
    s += d * d;
  }
  const double n = static_cast<double>(p.size());
  Tensor2 pv = p;
  return pred.tape()->record(Tensor2(1, 1, s / n), {pred},
                             [pv = std::move(pv), target = std::move(target), n](
                                 const Tensor2& g, std::span<Tensor2* const> in) {
                               auto& d = in[0]->data();
                               for (std::size_t i = 0; i < d.size(); ++i)
                                 d[i] += g(0, 0) * 2.0 * (pv.data()[i] - target.data()[i]) / n;
                             });
}

// ---------------------------------------------------------------------------
// Verification harness

/// Scalar function of the parameters, recorded on the given tape.
using ScalarFn = std::function<Var(Tape&, const ParameterStore&)>;

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_entry = 0;
};

/// Compares tape gradients against central differences with step h:
/// max |analytic - numeric| / max(1, |numeric|) over all parameter entries.
inline GradientCheckReport gradient_check(const ScalarFn& f, const ParameterStore& params,
                                          double h = 1e-6) {
  Gradients analytic;
  {
    Tape tape;
    Var loss = f(tape, params);
    analytic = tape.backward(loss, params);
  }
  auto eval = [&](const ParameterStore& p) {
    Tape tape;
    const double v = f(tape, p).value()(0, 0);
    if (!std::isfinite(v)) throw error(errc::non_finite_value, "function value is not finite");
    return v;
  };
  GradientCheckReport report;
  ParameterStore work = params;
  for (std::size_t pi = 0; pi < work.size(); ++pi) {
    auto& data = work[pi].tensor.data();
    for (std::size_t e = 0; e < data.size(); ++e) {
      const double orig = data[e];
      const double xp = orig + h, xm = orig - h;  // actual representable step
      data[e] = xp;
      const double fp = eval(work);
      data[e] = xm;
      const double fm = eval(work);
      data[e] = orig;
      const double numeric = (fp - fm) / (xp - xm);
      const double a = analytic[pi].data()[e];
      const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      if (rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = work[pi].name;
        report.worst_entry = e;
      }
    }
  }
  return report;
}

}  // namespace gccn
