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

#include "parplan/partition.hpp"

#include <map>
#include <utility>

namespace parplan {

// ---------------------------------------------------------------------------
// Per-layer analytic costs
// ---------------------------------------------------------------------------

/// Forward-pass floating point operations. Structural layers (input,
/// flatten, concat) move data without arithmetic and cost zero.
inline i64 layer_flops(const LayerKind &kind, const TensorShape &out,
                       const TensorShape &in) {
  if (const auto *c = std::get_if<Conv2D>(&kind))
    return 2 * out.sample * out.channel * out.height * out.width * in.channel *
           c->kernel_h * c->kernel_w;
  if (const auto *p = std::get_if<Pool2D>(&kind))
    return out.sample * out.channel * out.height * out.width * p->kernel_h *
           p->kernel_w;
  if (is_kind<FullyConnected>(kind))
    return 2 * out.sample * in.volume() / in.sample * out.channel;
  if (is_kind<Softmax>(kind))
    return 5 * out.sample * out.channel;
  return 0;
}

/// Trainable parameter footprint in bytes (float32 elements).
inline double parameter_bytes(const LayerKind &kind, const TensorShape &out,
                              const TensorShape &in) {
  if (const auto *c = std::get_if<Conv2D>(&kind))
    return kBytesPerElement * static_cast<double>(out.channel) * in.channel *
           c->kernel_h * c->kernel_w;
  if (is_kind<FullyConnected>(kind))
    return kBytesPerElement * static_cast<double>(in.volume() / in.sample) *
           out.channel;
  return 0.0;
}

/// Time to run one training step of the layer's arithmetic under `config`:
/// per-partition FLOPs (forward plus a 2x backward pass) on the slowest
/// device the identity placement assigns.
inline double compute_cost(const LayerKind &kind, const TensorShape &out,
                           const TensorShape &in, const Config &config,
                           const DeviceGraph &devices) {
  const i64 flops = layer_flops(kind, out, in);
  if (flops == 0)
    return 0.0;
  const Placement pl = place(config, devices);
  double slowest = devices.compute_rate(pl.device(0));
  for (i64 p = 1; p < config.total(); ++p)
    slowest = std::min(slowest, devices.compute_rate(pl.device(p)));
  return static_cast<double>(flops) / static_cast<double>(config.total()) *
         3.0 / slowest;
}

/// Gradient synchronization time. Parameters shard across the channel degree
/// and replicate across every other degree; replicas exchange gradients and
/// updated parameters with a parameter server on device 0 (a round trip of
/// twice the shard size per device, zero for the co-located device). With no
/// replication each device owns a disjoint shard and nothing moves.
inline double sync_cost(const LayerKind &kind, const TensorShape &out,
                        const TensorShape &in, const Config &config,
                        const DeviceGraph &devices) {
  const double param = parameter_bytes(kind, out, in);
  if (param == 0.0)
    return 0.0;
  const i64 replicas = config.total() / config.channel;
  if (replicas == 1)
    return 0.0;
  const Placement pl = place(config, devices);
  const double shard = param / static_cast<double>(config.channel);
  double t = 0.0;
  for (i64 p = 1; p < config.total(); ++p)
    t += 2.0 * shard / devices.bandwidth(pl.device(p), 0);
  return t;
}

/// Cross-device traffic on one edge: per-pair byte totals and the bottleneck
/// transfer time assuming all links run concurrently.
struct TransferProfile {
  double seconds = 0.0;
  double bytes = 0.0; // summed over all cross-device pairs
};

inline TransferProfile transfer_profile(const ComputationGraph &graph,
                                        const Edge &edge, const Config &c_src,
                                        const Config &c_dst,
                                        const DeviceGraph &devices) {
  const TensorShape &src_shape = graph.edge_shape(edge);
  const Placement src_pl = place(c_src, devices);
  const Placement dst_pl = place(c_dst, devices);
  std::map<std::pair<int, int>, double> pair_bytes;
  for (i64 q = 0; q < c_dst.total(); ++q) {
    const Region need = required_input_region(graph, edge, c_dst, q);
    if (need.empty())
      continue;
    for (i64 p = 0; p < c_src.total(); ++p) {
      if (src_pl.device(p) == dst_pl.device(q))
        continue;
      const i64 vol = intersect(owned_region(src_shape, c_src, p), need).volume();
      if (vol > 0)
        pair_bytes[{src_pl.device(p), dst_pl.device(q)}] +=
            kBytesPerElement * static_cast<double>(vol);
    }
  }
  TransferProfile out;
  for (const auto &[pair, bytes] : pair_bytes) {
    out.bytes += bytes;
    out.seconds =
        std::max(out.seconds, bytes / devices.bandwidth(pair.first, pair.second));
  }
  return out;
}

inline double transfer_cost(const ComputationGraph &graph, const Edge &edge,
                            const Config &c_src, const Config &c_dst,
                            const DeviceGraph &devices) {
  return transfer_profile(graph, edge, c_src, c_dst, devices).seconds;
}

// ---------------------------------------------------------------------------
// Cost tables
// ---------------------------------------------------------------------------

/// Precomputed costs over each layer's config catalog: node[l][i] is the
/// combined compute + sync time of layer l under its i-th config, and
/// xfer[e][i][j] is the transfer time of edge e between its endpoints'
/// i-th/j-th configs. compute/sync hold the analytic split when available
/// (empty for externally measured tables).
struct CostTables {
  std::vector<std::vector<Config>> catalog;
  std::vector<std::vector<double>> node;
  std::vector<std::vector<double>> compute;
  std::vector<std::vector<double>> sync;
  std::vector<std::vector<std::vector<double>>> xfer;

  int config_count(int layer) const {
    return static_cast<int>(catalog[static_cast<size_t>(layer)].size());
  }

  /// Index of `c` in layer's catalog, or -1. Catalogs are lexicographically
  /// sorted, so this is a binary search.
  int config_index(int layer, const Config &c) const {
    const auto &cat = catalog[static_cast<size_t>(layer)];
    auto it = std::lower_bound(cat.begin(), cat.end(), c);
    if (it == cat.end() || !(*it == c))
      return -1;
    return static_cast<int>(it - cat.begin());
  }
};

inline CostTables build_cost_tables(const ComputationGraph &graph,
                                    const DeviceGraph &devices) {
  CostTables t;
  const int n = graph.layer_count();
  t.catalog.resize(static_cast<size_t>(n));
  t.node.resize(static_cast<size_t>(n));
  t.compute.resize(static_cast<size_t>(n));
  t.sync.resize(static_cast<size_t>(n));
  for (int l = 0; l < n; ++l) {
    const Layer &layer = graph.layer(l);
    const TensorShape &out = graph.shape(l);
    const TensorShape in =
        graph.in_edges(l).empty() ? out : graph.input_shape(l);
    auto &cat = t.catalog[static_cast<size_t>(l)];
    cat = enumerate_configs(layer.kind, out, devices.count());
    for (const Config &c : cat) {
      const double tc = compute_cost(layer.kind, out, in, c, devices);
      const double ts = sync_cost(layer.kind, out, in, c, devices);
      t.compute[static_cast<size_t>(l)].push_back(tc);
      t.sync[static_cast<size_t>(l)].push_back(ts);
      t.node[static_cast<size_t>(l)].push_back(tc + ts);
    }
  }
  t.xfer.resize(static_cast<size_t>(graph.edge_count()));
  for (const Edge &e : graph.edges()) {
    const auto &src_cat = t.catalog[static_cast<size_t>(e.src)];
    const auto &dst_cat = t.catalog[static_cast<size_t>(e.dst)];
    auto &m = t.xfer[static_cast<size_t>(e.id)];
    m.resize(src_cat.size());
    for (size_t i = 0; i < src_cat.size(); ++i) {
      m[i].resize(dst_cat.size());
      for (size_t j = 0; j < dst_cat.size(); ++j)
        m[i][j] = transfer_cost(graph, e, src_cat[i], dst_cat[j], devices);
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Strategy evaluation
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<int> strategy_indices(const ComputationGraph &graph,
                                         const CostTables &tables,
                                         const Strategy &strategy) {
  if (strategy.size() != static_cast<size_t>(graph.layer_count()))
    throw InputError("strategy covers " + std::to_string(strategy.size()) +
                     " layers, graph has " +
                     std::to_string(graph.layer_count()));
  std::vector<int> idx(strategy.size());
  for (int l = 0; l < graph.layer_count(); ++l) {
    idx[static_cast<size_t>(l)] =
        tables.config_index(l, strategy[static_cast<size_t>(l)]);
    if (idx[static_cast<size_t>(l)] < 0)
      throw InputError("config " + to_string(strategy[static_cast<size_t>(l)]) +
                       " is not valid for layer '" + graph.layer(l).id + "'");
  }
  return idx;
}

/// The one pinned summation order for a full-strategy cost: node entries in
/// layer-index order, then xfer entries in edge-index order. Planner, oracle,
/// and evaluator all funnel through this so their results compare bit-exact.
inline double total_cost_by_index(const ComputationGraph &graph,
                                  const CostTables &tables,
                                  const std::vector<int> &idx) {
  double t = 0.0;
  for (int l = 0; l < graph.layer_count(); ++l)
    t += tables.node[static_cast<size_t>(l)][static_cast<size_t>(idx[static_cast<size_t>(l)])];
  for (const Edge &e : graph.edges())
    t += tables.xfer[static_cast<size_t>(e.id)]
                    [static_cast<size_t>(idx[static_cast<size_t>(e.src)])]
                    [static_cast<size_t>(idx[static_cast<size_t>(e.dst)])];
  return t;
}

} // namespace detail

inline double evaluate_strategy(const ComputationGraph &graph,
                                const CostTables &tables,
                                const Strategy &strategy) {
  return detail::total_cost_by_index(
      graph, tables, detail::strategy_indices(graph, tables, strategy));
}

/// Itemized strategy cost for reporting.
struct CostBreakdown {
  double total = 0.0;
  double node_total = 0.0;
  double xfer_total = 0.0;
  std::vector<double> per_layer_node; // by layer index
  std::vector<double> per_layer_compute; // empty if tables lack the split
  std::vector<double> per_layer_sync;
  std::vector<double> per_edge_xfer; // by edge index
};

inline CostBreakdown evaluate_components(const ComputationGraph &graph,
                                         const CostTables &tables,
                                         const Strategy &strategy) {
  const auto idx = detail::strategy_indices(graph, tables, strategy);
  CostBreakdown b;
  const bool split = !tables.compute.empty();
  for (int l = 0; l < graph.layer_count(); ++l) {
    auto li = static_cast<size_t>(l);
    auto ci = static_cast<size_t>(idx[li]);
    b.per_layer_node.push_back(tables.node[li][ci]);
    if (split) {
      b.per_layer_compute.push_back(tables.compute[li][ci]);
      b.per_layer_sync.push_back(tables.sync[li][ci]);
    }
    b.node_total += tables.node[li][ci];
  }
  for (const Edge &e : graph.edges()) {
    double x = tables.xfer[static_cast<size_t>(e.id)]
                          [static_cast<size_t>(idx[static_cast<size_t>(e.src)])]
                          [static_cast<size_t>(idx[static_cast<size_t>(e.dst)])];
    b.per_edge_xfer.push_back(x);
    b.xfer_total += x;
  }
  b.total = detail::total_cost_by_index(graph, tables, idx);
  return b;
}

} // namespace parplan
