/* Copyright 2026 the parplan authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "parplan/base.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <variant>
#include <vector>

namespace parplan {

// ---------------------------------------------------------------------------
// Layer kinds
// ---------------------------------------------------------------------------

/// Source of the graph; carries the (channel, height, width) extents of one
/// sample. The sample extent comes from the graph-level batch size.
struct Input {
  i64 channel = 1;
  i64 height = 1;
  i64 width = 1;
};

struct Conv2D {
  i64 out_channels = 1;
  i64 kernel_h = 1, kernel_w = 1;
  i64 stride_h = 1, stride_w = 1;
  i64 pad_h = 0, pad_w = 0;
};

struct Pool2D {
  i64 kernel_h = 1, kernel_w = 1;
  i64 stride_h = 1, stride_w = 1;
  i64 pad_h = 0, pad_w = 0;
};

struct FullyConnected {
  i64 out_channels = 1;
};

/// Folds (channel, height, width) into the channel dimension.
struct Flatten {};

/// Joins its inputs along one dimension; all other extents must match.
struct Concat {
  Dim axis = Dim::Channel;
};

struct Softmax {};

using LayerKind =
    std::variant<Input, Conv2D, Pool2D, FullyConnected, Flatten, Concat,
                 Softmax>;

inline const char *kind_name(const LayerKind &k) {
  struct Namer {
    const char *operator()(const Input &) { return "input"; }
    const char *operator()(const Conv2D &) { return "conv2d"; }
    const char *operator()(const Pool2D &) { return "pool2d"; }
    const char *operator()(const FullyConnected &) {
      return "fully_connected";
    }
    const char *operator()(const Flatten &) { return "flatten"; }
    const char *operator()(const Concat &) { return "concat"; }
    const char *operator()(const Softmax &) { return "softmax"; }
  };
  return std::visit(Namer{}, k);
}

template <typename T> bool is_kind(const LayerKind &k) {
  return std::holds_alternative<T>(k);
}

/// Layers that carry trainable parameters (conv filters, FC weight matrices).
inline bool has_parameters(const LayerKind &k) {
  return is_kind<Conv2D>(k) || is_kind<FullyConnected>(k);
}

struct Layer {
  std::string id;
  LayerKind kind;
};

/// One tensor flowing from `src` to `dst`. Edges are identified by a dense
/// index so that parallel edges (same endpoints) stay distinguishable;
/// `dst_input_pos` is the position in the destination's input list, which
/// Concat uses to locate the band each branch feeds.
struct Edge {
  int id = -1;
  int src = -1;
  int dst = -1;
  int dst_input_pos = 0;
};

// ---------------------------------------------------------------------------
// Computation graph
// ---------------------------------------------------------------------------

/// A directed acyclic multigraph of layers. Immutable once created; create()
/// validates structure and infers every output shape.
class ComputationGraph {
public:
  ComputationGraph() = default;

  /// Builds and validates a graph. `inputs[i]` lists the ids feeding layer i,
  /// in order. Throws InputError naming the offending element on dangling
  /// references, bad arity, cycles, or invalid layer parameters.
  static ComputationGraph
  create(std::vector<Layer> layers,
         const std::vector<std::vector<std::string>> &inputs, i64 batch);

  i64 batch() const { return batch_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const Layer &layer(int i) const { return layers_[static_cast<size_t>(i)]; }
  const Edge &edge(int e) const { return edges_[static_cast<size_t>(e)]; }
  const std::vector<Layer> &layers() const { return layers_; }
  const std::vector<Edge> &edges() const { return edges_; }

  /// Output shape of layer i (the shape of every edge leaving it).
  const TensorShape &shape(int i) const {
    return shapes_[static_cast<size_t>(i)];
  }

  /// Shape of the tensor an edge carries = its source's output shape.
  const TensorShape &edge_shape(const Edge &e) const { return shape(e.src); }

  const std::vector<int> &in_edges(int layer) const {
    return in_edges_[static_cast<size_t>(layer)];
  }
  const std::vector<int> &out_edges(int layer) const {
    return out_edges_[static_cast<size_t>(layer)];
  }

  /// Layer indices in a fixed topological order (ties broken by file order).
  const std::vector<int> &topo_order() const { return topo_; }
  int topo_rank(int layer) const { return topo_rank_[static_cast<size_t>(layer)]; }

  int index_of(const std::string &id) const {
    auto it = index_.find(id);
    return it == index_.end() ? -1 : it->second;
  }

  /// Shape of the tensor feeding layer i (layers with exactly one input).
  const TensorShape &input_shape(int i) const {
    return shape(edge(in_edges(i).front()).src);
  }

private:
  friend ComputationGraph infer_shapes(ComputationGraph g);

  std::vector<Layer> layers_;
  std::vector<Edge> edges_;
  std::vector<TensorShape> shapes_;
  std::vector<std::vector<int>> in_edges_, out_edges_;
  std::vector<int> topo_, topo_rank_;
  std::map<std::string, int> index_;
  i64 batch_ = 1;
};

/// Recomputes every layer's output shape from the Input extents and the
/// batch size. Deterministic and idempotent. Throws InputError on
/// non-positive inferred extents or Concat extent mismatches.
ComputationGraph infer_shapes(ComputationGraph g);

// ---------------------------------------------------------------------------
// Device graph
// ---------------------------------------------------------------------------

/// Devices with compute rates plus a fully materialized ordered-pair
/// bandwidth table. Intra-device transfers cost zero by definition and the
/// diagonal is never consulted.
class DeviceGraph {
public:
  DeviceGraph() = default;

  DeviceGraph(std::vector<double> compute_rates,
              std::vector<double> bandwidth_table)
      : rates_(std::move(compute_rates)), bw_(std::move(bandwidth_table)) {
    if (bw_.size() != rates_.size() * rates_.size())
      throw InputError("device graph: bandwidth table size mismatch");
    for (double r : rates_)
      if (!(r > 0))
        throw InputError("device graph: compute rate must be positive");
    for (size_t i = 0; i < rates_.size(); ++i)
      for (size_t j = 0; j < rates_.size(); ++j)
        if (i != j && !(bw_[i * rates_.size() + j] > 0))
          throw InputError("device graph: bandwidth must be positive");
  }

  /// n identical devices, every ordered pair at the same bandwidth.
  static DeviceGraph uniform(int n, double compute_rate = kDefaultComputeRate,
                             double bandwidth = kDefaultBandwidth) {
    if (n < 1)
      throw InputError("device graph: need at least one device");
    return DeviceGraph(std::vector<double>(static_cast<size_t>(n), compute_rate),
                       std::vector<double>(static_cast<size_t>(n) * n, bandwidth));
  }

  int count() const { return static_cast<int>(rates_.size()); }
  double compute_rate(int d) const { return rates_[static_cast<size_t>(d)]; }
  double bandwidth(int from, int to) const {
    return bw_[static_cast<size_t>(from) * rates_.size() + to];
  }

private:
  std::vector<double> rates_;
  std::vector<double> bw_; // row-major [from][to]
};

// ---------------------------------------------------------------------------
// Implementation
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_kind_params(const Layer &l) {
  if (const auto *c = std::get_if<Conv2D>(&l.kind)) {
    if (c->out_channels < 1)
      throw InputError("layer '" + l.id + "': out_channels must be >= 1");
    if (c->kernel_h < 1 || c->kernel_w < 1 || c->stride_h < 1 ||
        c->stride_w < 1)
      throw InputError("layer '" + l.id + "': kernel/stride must be >= 1");
    if (c->pad_h < 0 || c->pad_w < 0)
      throw InputError("layer '" + l.id + "': padding must be >= 0");
  } else if (const auto *p = std::get_if<Pool2D>(&l.kind)) {
    if (p->kernel_h < 1 || p->kernel_w < 1 || p->stride_h < 1 ||
        p->stride_w < 1)
      throw InputError("layer '" + l.id + "': kernel/stride must be >= 1");
    if (p->pad_h < 0 || p->pad_w < 0)
      throw InputError("layer '" + l.id + "': padding must be >= 0");
  } else if (const auto *f = std::get_if<FullyConnected>(&l.kind)) {
    if (f->out_channels < 1)
      throw InputError("layer '" + l.id + "': out_channels must be >= 1");
  } else if (const auto *in = std::get_if<Input>(&l.kind)) {
    if (in->channel < 1 || in->height < 1 || in->width < 1)
      throw InputError("layer '" + l.id + "': input extents must be >= 1");
  }
}

inline i64 conv_out_extent(i64 in, i64 kernel, i64 stride, i64 pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

} // namespace detail

inline ComputationGraph
ComputationGraph::create(std::vector<Layer> layers,
                         const std::vector<std::vector<std::string>> &inputs,
                         i64 batch) {
  if (batch < 1)
    throw InputError("batch must be >= 1");
  if (layers.empty())
    throw InputError("graph needs at least one layer");
  if (inputs.size() != layers.size())
    throw InputError("one input list per layer required");

  ComputationGraph g;
  g.batch_ = batch;
  g.layers_ = std::move(layers);
  const int n = g.layer_count();

  for (int i = 0; i < n; ++i) {
    const Layer &l = g.layers_[static_cast<size_t>(i)];
    if (l.id.empty())
      throw InputError("layer at position " + std::to_string(i) +
                       " has an empty id");
    if (!g.index_.emplace(l.id, i).second)
      throw InputError("duplicate layer id '" + l.id + "'");
    detail::validate_kind_params(l);
  }

  g.in_edges_.resize(static_cast<size_t>(n));
  g.out_edges_.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto &in_ids = inputs[static_cast<size_t>(i)];
    const Layer &l = g.layers_[static_cast<size_t>(i)];
    if (is_kind<Input>(l.kind)) {
      if (!in_ids.empty())
        throw InputError("input layer '" + l.id + "' cannot have inputs");
    } else if (is_kind<Concat>(l.kind)) {
      if (in_ids.size() < 2)
        throw InputError("concat layer '" + l.id +
                         "' needs at least 2 inputs");
    } else if (in_ids.size() != 1) {
      throw InputError("layer '" + l.id + "' must have exactly 1 input, got " +
                       std::to_string(in_ids.size()));
    }
    for (size_t pos = 0; pos < in_ids.size(); ++pos) {
      int src = g.index_of(in_ids[pos]);
      if (src < 0)
        throw InputError("layer '" + l.id + "' references undeclared layer '" +
                         in_ids[pos] + "'");
      Edge e;
      e.id = g.edge_count();
      e.src = src;
      e.dst = i;
      e.dst_input_pos = static_cast<int>(pos);
      g.out_edges_[static_cast<size_t>(src)].push_back(e.id);
      g.in_edges_[static_cast<size_t>(i)].push_back(e.id);
      g.edges_.push_back(e);
    }
  }

  // Kahn topological sort, lowest file index first, doubling as cycle check.
  std::vector<int> indeg(static_cast<size_t>(n), 0);
  for (const Edge &e : g.edges_)
    ++indeg[static_cast<size_t>(e.dst)];
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int i = 0; i < n; ++i)
    if (indeg[static_cast<size_t>(i)] == 0)
      ready.push(i);
  g.topo_.reserve(static_cast<size_t>(n));
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    g.topo_.push_back(v);
    for (int eid : g.out_edges_[static_cast<size_t>(v)])
      if (--indeg[static_cast<size_t>(g.edges_[static_cast<size_t>(eid)].dst)] == 0)
        ready.push(g.edges_[static_cast<size_t>(eid)].dst);
  }
  if (static_cast<int>(g.topo_.size()) != n) {
    std::string stuck;
    for (int i = 0; i < n; ++i)
      if (indeg[static_cast<size_t>(i)] > 0) {
        stuck = g.layers_[static_cast<size_t>(i)].id;
        break;
      }
    throw InputError("graph contains a cycle through layer '" + stuck + "'");
  }
  g.topo_rank_.assign(static_cast<size_t>(n), 0);
  for (int r = 0; r < n; ++r)
    g.topo_rank_[static_cast<size_t>(g.topo_[static_cast<size_t>(r)])] = r;

  // Zero-in-degree nodes must be Input layers; together with acyclicity this
  // makes every other node reachable from an Input.
  for (int i = 0; i < n; ++i)
    if (g.in_edges_[static_cast<size_t>(i)].empty() &&
        !is_kind<Input>(g.layers_[static_cast<size_t>(i)].kind))
      throw InputError("layer '" + g.layers_[static_cast<size_t>(i)].id +
                       "' has no inputs but is not an input layer");

  return infer_shapes(std::move(g));
}

inline ComputationGraph infer_shapes(ComputationGraph g) {
  const int n = g.layer_count();
  g.shapes_.assign(static_cast<size_t>(n), TensorShape{});
  for (int v : g.topo_) {
    const Layer &l = g.layer(v);
    TensorShape &out = g.shapes_[static_cast<size_t>(v)];

    struct Infer {
      const ComputationGraph &g;
      const Layer &l;
      int v;

      TensorShape in() const { return g.input_shape(v); }

      TensorShape operator()(const Input &p) const {
        return {g.batch(), p.channel, p.height, p.width};
      }
      TensorShape operator()(const Conv2D &p) const {
        TensorShape s = in();
        TensorShape out{s.sample, p.out_channels,
                        detail::conv_out_extent(s.height, p.kernel_h,
                                                p.stride_h, p.pad_h),
                        detail::conv_out_extent(s.width, p.kernel_w,
                                                p.stride_w, p.pad_w)};
        if (out.height < 1 || out.width < 1)
          throw InputError("layer '" + l.id +
                           "': non-positive inferred extent " +
                           to_string(out));
        return out;
      }
      TensorShape operator()(const Pool2D &p) const {
        TensorShape s = in();
        TensorShape out{s.sample, s.channel,
                        detail::conv_out_extent(s.height, p.kernel_h,
                                                p.stride_h, p.pad_h),
                        detail::conv_out_extent(s.width, p.kernel_w,
                                                p.stride_w, p.pad_w)};
        if (out.height < 1 || out.width < 1)
          throw InputError("layer '" + l.id +
                           "': non-positive inferred extent " +
                           to_string(out));
        return out;
      }
      TensorShape operator()(const FullyConnected &p) const {
        return {in().sample, p.out_channels, 1, 1};
      }
      TensorShape operator()(const Flatten &) const {
        TensorShape s = in();
        return {s.sample, s.channel * s.height * s.width, 1, 1};
      }
      TensorShape operator()(const Concat &p) const {
        const auto &ins = g.in_edges(v);
        TensorShape acc = g.edge_shape(g.edge(ins.front()));
        for (size_t k = 1; k < ins.size(); ++k) {
          TensorShape s = g.edge_shape(g.edge(ins[k]));
          for (Dim d : kAllDims) {
            if (d == p.axis)
              continue;
            if (s.extent(d) != acc.extent(d))
              throw InputError("layer '" + l.id + "': concat extent mismatch on " +
                               dim_name(d) + ": " + to_string(acc) + " vs " +
                               to_string(s));
          }
          acc.extent(p.axis) += s.extent(p.axis);
        }
        return acc;
      }
      TensorShape operator()(const Softmax &) const { return in(); }
    };

    out = std::visit(Infer{g, l, v}, l.kind);
  }
  return g;
}

} // namespace parplan
