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

#include "parplan/cost.hpp"
#include "parplan/io.hpp"

#include <iomanip>
#include <ostream>

namespace parplan {

/// Cross-device traffic of one training step in raw bytes: tensor transfers
/// along edges plus gradient/parameter round trips. Geometry only, so it is
/// meaningful even when the cost tables came from measurements.
inline double sync_traffic_bytes(const LayerKind &kind, const TensorShape &out,
                                 const TensorShape &in, const Config &config) {
  const double param = parameter_bytes(kind, out, in);
  if (param == 0.0)
    return 0.0;
  if (config.total() / config.channel == 1)
    return 0.0;
  return static_cast<double>(config.total() - 1) * 2.0 *
         (param / static_cast<double>(config.channel));
}

struct Report {
  std::string label;
  double total = 0.0;
  double node_total = 0.0;
  double xfer_total = 0.0;
  bool has_split = false;
  double compute_total = 0.0;
  double sync_total = 0.0;

  struct LayerRow {
    std::string id;
    Config config;
    double node = 0.0, compute = 0.0, sync = 0.0;
  };
  struct EdgeRow {
    std::string src, dst;
    double seconds = 0.0;
    double bytes = 0.0;
  };
  std::vector<LayerRow> layers;
  std::vector<EdgeRow> edges;

  bool with_bytes = false;
  double xfer_bytes = 0.0;
  double sync_bytes = 0.0;

  double planning_ms = -1.0;
  int final_graph_nodes = -1;
  int eliminations = -1;
};

inline Report make_report(const std::string &label,
                          const ComputationGraph &graph,
                          const CostTables &tables, const Strategy &strategy,
                          const DeviceGraph &devices, bool with_bytes = false) {
  const CostBreakdown b = evaluate_components(graph, tables, strategy);
  Report r;
  r.label = label;
  r.total = b.total;
  r.node_total = b.node_total;
  r.xfer_total = b.xfer_total;
  r.has_split = !b.per_layer_compute.empty();
  r.with_bytes = with_bytes;

  for (int l = 0; l < graph.layer_count(); ++l) {
    auto li = static_cast<size_t>(l);
    Report::LayerRow row;
    row.id = graph.layer(l).id;
    row.config = strategy[li];
    row.node = b.per_layer_node[li];
    if (r.has_split) {
      row.compute = b.per_layer_compute[li];
      row.sync = b.per_layer_sync[li];
      r.compute_total += row.compute;
      r.sync_total += row.sync;
    }
    r.layers.push_back(row);
    if (with_bytes) {
      const TensorShape &out = graph.shape(l);
      const TensorShape in_shape =
          graph.in_edges(l).empty() ? out : graph.input_shape(l);
      r.sync_bytes +=
          sync_traffic_bytes(graph.layer(l).kind, out, in_shape, strategy[li]);
    }
  }
  for (const Edge &e : graph.edges()) {
    Report::EdgeRow row;
    row.src = graph.layer(e.src).id;
    row.dst = graph.layer(e.dst).id;
    row.seconds = b.per_edge_xfer[static_cast<size_t>(e.id)];
    if (with_bytes) {
      row.bytes = transfer_profile(graph, e,
                                   strategy[static_cast<size_t>(e.src)],
                                   strategy[static_cast<size_t>(e.dst)],
                                   devices)
                      .bytes;
      r.xfer_bytes += row.bytes;
    }
    r.edges.push_back(row);
  }
  return r;
}

inline json report_json(const Report &r) {
  json j;
  j["strategy"] = r.label;
  j["cost_seconds"] = r.total;
  j["node_seconds"] = r.node_total;
  j["transfer_seconds"] = r.xfer_total;
  if (r.has_split) {
    j["compute_seconds"] = r.compute_total;
    j["sync_seconds"] = r.sync_total;
  }
  if (r.with_bytes) {
    j["transfer_bytes"] = r.xfer_bytes;
    j["sync_bytes"] = r.sync_bytes;
  }
  if (r.planning_ms >= 0)
    j["planning_ms"] = r.planning_ms;
  if (r.final_graph_nodes >= 0)
    j["final_graph_nodes"] = r.final_graph_nodes;
  if (r.eliminations >= 0)
    j["eliminations"] = r.eliminations;
  json layers = json::object();
  for (const auto &row : r.layers) {
    json lj;
    lj["config"] = config_json(row.config);
    lj["node_seconds"] = row.node;
    if (r.has_split) {
      lj["compute_seconds"] = row.compute;
      lj["sync_seconds"] = row.sync;
    }
    layers[row.id] = lj;
  }
  j["layers"] = layers;
  json edges = json::array();
  for (const auto &row : r.edges) {
    json ej;
    ej["src"] = row.src;
    ej["dst"] = row.dst;
    ej["transfer_seconds"] = row.seconds;
    if (r.with_bytes)
      ej["transfer_bytes"] = row.bytes;
    edges.push_back(ej);
  }
  j["edges"] = edges;
  return j;
}

inline void render_report(std::ostream &os, const Report &r) {
  const auto flags = os.flags();
  os << "strategy: " << r.label << "\n";
  os << std::scientific << std::setprecision(6);
  os << "total " << r.total << " s";
  if (r.has_split)
    os << "  (compute " << r.compute_total << " s, sync " << r.sync_total
       << " s, transfer " << r.xfer_total << " s)";
  else
    os << "  (node " << r.node_total << " s, transfer " << r.xfer_total
       << " s)";
  os << "\n";
  if (r.with_bytes)
    os << "traffic: transfer " << r.xfer_bytes << " B, sync " << r.sync_bytes
       << " B\n";
  if (r.final_graph_nodes >= 0)
    os << "final graph nodes: " << r.final_graph_nodes
       << "  eliminations: " << r.eliminations << "  planning: " << std::fixed
       << std::setprecision(3) << r.planning_ms << " ms\n"
       << std::scientific << std::setprecision(6);

  size_t idw = 5;
  for (const auto &row : r.layers)
    idw = std::max(idw, row.id.size());
  os << "\n" << std::left << std::setw(static_cast<int>(idw) + 2) << "layer"
     << std::setw(26) << "config" << std::right << std::setw(14) << "node s";
  if (r.has_split)
    os << std::setw(14) << "compute s" << std::setw(14) << "sync s";
  os << "\n";
  for (const auto &row : r.layers) {
    os << std::left << std::setw(static_cast<int>(idw) + 2) << row.id
       << std::setw(26) << to_string(row.config) << std::right << std::setw(14)
       << row.node;
    if (r.has_split)
      os << std::setw(14) << row.compute << std::setw(14) << row.sync;
    os << "\n";
  }

  bool any = false;
  for (const auto &row : r.edges)
    any = any || row.seconds > 0 || (r.with_bytes && row.bytes > 0);
  if (any) {
    os << "\nedges with traffic:\n";
    for (const auto &row : r.edges) {
      if (row.seconds <= 0 && !(r.with_bytes && row.bytes > 0))
        continue;
      os << "  " << row.src << " -> " << row.dst << "  " << row.seconds
         << " s";
      if (r.with_bytes)
        os << "  " << row.bytes << " B";
      os << "\n";
    }
  }
  os.flags(flags);
}

} // namespace parplan
