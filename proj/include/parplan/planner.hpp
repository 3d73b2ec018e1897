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

#include <optional>
#include <variant>

namespace parplan {

// ---------------------------------------------------------------------------
// Elimination log
// ---------------------------------------------------------------------------

/// Removal of a node with one in-edge and one out-edge. The replacement
/// edge's table folds the node's own cost into the transfer minimum; argmin
/// remembers which of the node's configs realized each table cell so the
/// unwind can reconstruct it.
struct NodeElimRecord {
  int removed = -1; // layer index
  int in_edge = -1, out_edge = -1, new_edge = -1;
  int src = -1, dst = -1; // endpoints of the replacement edge
  std::vector<std::vector<int>> argmin; // [src config][dst config]
};

/// Merge of two parallel edges into one whose table is the entrywise sum.
struct EdgeElimRecord {
  int e1 = -1, e2 = -1, new_edge = -1;
  int src = -1, dst = -1;
};

using EliminationRecord = std::variant<NodeElimRecord, EdgeElimRecord>;

// ---------------------------------------------------------------------------
// Reduced graph
// ---------------------------------------------------------------------------

/// A computation graph undergoing elimination. Layers keep their original
/// indices and node-cost tables; edges are replaced over time, each carrying
/// its own transfer table (new edges get freshly folded tables). Every
/// elimination removes exactly one edge.
class ReducedGraph {
public:
  ReducedGraph(const ComputationGraph &graph, const CostTables &tables)
      : graph_(&graph), tables_(&tables) {
    const int n = graph.layer_count();
    alive_.assign(static_cast<size_t>(n), true);
    in_.resize(static_cast<size_t>(n));
    out_.resize(static_cast<size_t>(n));
    for (const Edge &e : graph.edges()) {
      edges_.push_back({e.id, e.src, e.dst, true});
      edge_tables_.push_back(tables.xfer[static_cast<size_t>(e.id)]);
      in_[static_cast<size_t>(e.dst)].push_back(e.id);
      out_[static_cast<size_t>(e.src)].push_back(e.id);
    }
  }

  struct EdgeRec {
    int id, src, dst;
    bool alive;
  };

  const ComputationGraph &graph() const { return *graph_; }
  const CostTables &tables() const { return *tables_; }
  const std::vector<EliminationRecord> &log() const { return log_; }

  bool node_alive(int l) const { return alive_[static_cast<size_t>(l)]; }
  int live_node_count() const {
    return static_cast<int>(std::count(alive_.begin(), alive_.end(), true));
  }
  int live_edge_count() const {
    int n = 0;
    for (const EdgeRec &e : edges_)
      n += e.alive ? 1 : 0;
    return n;
  }
  std::vector<int> live_nodes() const {
    std::vector<int> out;
    for (int l = 0; l < static_cast<int>(alive_.size()); ++l)
      if (alive_[static_cast<size_t>(l)])
        out.push_back(l);
    return out;
  }
  std::vector<EdgeRec> live_edges() const {
    std::vector<EdgeRec> out;
    for (const EdgeRec &e : edges_)
      if (e.alive)
        out.push_back(e);
    return out;
  }
  const std::vector<std::vector<double>> &edge_table(int id) const {
    return edge_tables_[static_cast<size_t>(id)];
  }
  const std::vector<double> &node_table(int l) const {
    return tables_->node[static_cast<size_t>(l)];
  }

  /// Applies one node elimination to the lowest-topological-rank eligible
  /// node (a live non-endpoint with exactly one in-edge and one out-edge).
  /// Returns false when no node is eligible.
  bool node_elimination() {
    int chosen = -1;
    for (int l : graph_->topo_order()) {
      if (!alive_[static_cast<size_t>(l)])
        continue;
      if (in_[static_cast<size_t>(l)].size() == 1 &&
          out_[static_cast<size_t>(l)].size() == 1) {
        chosen = l;
        break;
      }
    }
    if (chosen < 0)
      return false;

    const int e1 = in_[static_cast<size_t>(chosen)].front();
    const int e2 = out_[static_cast<size_t>(chosen)].front();
    const int u = edges_[static_cast<size_t>(e1)].src;
    const int v = edges_[static_cast<size_t>(e2)].dst;
    const auto &t1 = edge_tables_[static_cast<size_t>(e1)];
    const auto &t2 = edge_tables_[static_cast<size_t>(e2)];
    const auto &w = tables_->node[static_cast<size_t>(chosen)];
    const size_t nu = t1.size();
    const size_t nw = w.size();
    const size_t nv = nw ? t2[0].size() : 0;

    std::vector<std::vector<double>> folded(nu, std::vector<double>(nv));
    std::vector<std::vector<int>> argmin(nu, std::vector<int>(nv));
    for (size_t i = 0; i < nu; ++i) {
      for (size_t k = 0; k < nv; ++k) {
        double best = w[0] + t1[i][0] + t2[0][k];
        int best_j = 0;
        for (size_t j = 1; j < nw; ++j) {
          double cand = w[j] + t1[i][j] + t2[j][k];
          if (cand < best) {
            best = cand;
            best_j = static_cast<int>(j);
          }
        }
        folded[i][k] = best;
        argmin[i][k] = best_j;
      }
    }

    const int ne = new_edge(u, v, std::move(folded));
    detach(e1);
    detach(e2);
    alive_[static_cast<size_t>(chosen)] = false;
    log_.push_back(NodeElimRecord{chosen, e1, e2, ne, u, v, std::move(argmin)});
    return true;
  }

  /// Applies one edge elimination to the lexicographically smallest parallel
  /// pair (src, dst, e1, e2). Returns false when no parallel edges exist.
  bool edge_elimination() {
    int best_e1 = -1, best_e2 = -1;
    for (const EdgeRec &a : edges_) {
      if (!a.alive)
        continue;
      for (const EdgeRec &b : edges_) {
        if (!b.alive || b.id <= a.id)
          continue;
        if (a.src != b.src || a.dst != b.dst)
          continue;
        if (best_e1 < 0 ||
            std::tuple(a.src, a.dst, a.id, b.id) <
                std::tuple(edges_[static_cast<size_t>(best_e1)].src,
                           edges_[static_cast<size_t>(best_e1)].dst, best_e1,
                           best_e2)) {
          best_e1 = a.id;
          best_e2 = b.id;
        }
      }
    }
    if (best_e1 < 0)
      return false;

    const int u = edges_[static_cast<size_t>(best_e1)].src;
    const int v = edges_[static_cast<size_t>(best_e1)].dst;
    const auto &t1 = edge_tables_[static_cast<size_t>(best_e1)];
    const auto &t2 = edge_tables_[static_cast<size_t>(best_e2)];
    std::vector<std::vector<double>> summed(t1.size());
    for (size_t i = 0; i < t1.size(); ++i) {
      summed[i].resize(t1[i].size());
      for (size_t j = 0; j < t1[i].size(); ++j)
        summed[i][j] = t1[i][j] + t2[i][j];
    }

    const int ne = new_edge(u, v, std::move(summed));
    detach(best_e1);
    detach(best_e2);
    log_.push_back(EdgeElimRecord{best_e1, best_e2, ne, u, v});
    return true;
  }

  /// Runs eliminations to a fixpoint, preferring node eliminations.
  void reduce() {
    for (;;) {
      if (node_elimination())
        continue;
      if (edge_elimination())
        continue;
      break;
    }
  }

private:
  int new_edge(int src, int dst, std::vector<std::vector<double>> table) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({id, src, dst, true});
    edge_tables_.push_back(std::move(table));
    in_[static_cast<size_t>(dst)].push_back(id);
    out_[static_cast<size_t>(src)].push_back(id);
    return id;
  }

  void detach(int id) {
    EdgeRec &e = edges_[static_cast<size_t>(id)];
    e.alive = false;
    auto &ins = in_[static_cast<size_t>(e.dst)];
    ins.erase(std::find(ins.begin(), ins.end(), id));
    auto &outs = out_[static_cast<size_t>(e.src)];
    outs.erase(std::find(outs.begin(), outs.end(), id));
  }

  const ComputationGraph *graph_;
  const CostTables *tables_;
  std::vector<bool> alive_;
  std::vector<EdgeRec> edges_;
  std::vector<std::vector<std::vector<double>>> edge_tables_;
  std::vector<std::vector<int>> in_, out_;
  std::vector<EliminationRecord> log_;
};

// ---------------------------------------------------------------------------
// Final-graph enumeration and unwind
// ---------------------------------------------------------------------------

/// Exhaustively scans the joint config space of the reduced graph's
/// remaining nodes and returns the cheapest assignment as config indices per
/// live node (in ascending layer-index order). Ties resolve to the
/// lexicographically smallest index tuple because candidates are visited in
/// that order with strict improvement.
inline std::pair<std::vector<int>, double>
enumerate_final(const ReducedGraph &rg, int k_bound = kDefaultFinalGraphBound) {
  const std::vector<int> nodes = rg.live_nodes();
  const int k = static_cast<int>(nodes.size());
  if (k > k_bound)
    throw LimitError("final graph has " + std::to_string(k) +
                     " nodes, exceeding the enumeration bound of " +
                     std::to_string(k_bound) +
                     " (graph is not reducible enough)");
  const auto edges = rg.live_edges();
  std::vector<int> pos_of(static_cast<size_t>(rg.graph().layer_count()), -1);
  for (int i = 0; i < k; ++i)
    pos_of[static_cast<size_t>(nodes[static_cast<size_t>(i)])] = i;

  std::vector<int> counts(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i)
    counts[static_cast<size_t>(i)] =
        static_cast<int>(rg.node_table(nodes[static_cast<size_t>(i)]).size());

  std::vector<int> idx(static_cast<size_t>(k), 0);
  std::vector<int> best_idx;
  double best = 0.0;
  bool have_best = false;
  for (;;) {
    double cost = 0.0;
    for (int i = 0; i < k; ++i)
      cost += rg.node_table(nodes[static_cast<size_t>(i)])
                  [static_cast<size_t>(idx[static_cast<size_t>(i)])];
    for (const auto &e : edges)
      cost += rg.edge_table(e.id)
                  [static_cast<size_t>(idx[static_cast<size_t>(pos_of[static_cast<size_t>(e.src)])])]
                  [static_cast<size_t>(idx[static_cast<size_t>(pos_of[static_cast<size_t>(e.dst)])])];
    if (!have_best || cost < best) {
      best = cost;
      best_idx = idx;
      have_best = true;
    }
    int d = k - 1;
    while (d >= 0 &&
           idx[static_cast<size_t>(d)] + 1 == counts[static_cast<size_t>(d)]) {
      idx[static_cast<size_t>(d)] = 0;
      --d;
    }
    if (d < 0)
      break;
    ++idx[static_cast<size_t>(d)];
  }
  return {best_idx, best};
}

/// Replays the elimination log backwards, assigning each eliminated node the
/// config its record stored for the endpoint configs now known. Edge merges
/// assign nothing. `indices` maps layer index to config index, -1 unknown.
inline void unwind(const std::vector<EliminationRecord> &log,
                   std::vector<int> &indices) {
  for (auto it = log.rbegin(); it != log.rend(); ++it) {
    if (const auto *ne = std::get_if<NodeElimRecord>(&*it)) {
      const int ci = indices[static_cast<size_t>(ne->src)];
      const int ck = indices[static_cast<size_t>(ne->dst)];
      indices[static_cast<size_t>(ne->removed)] =
          ne->argmin[static_cast<size_t>(ci)][static_cast<size_t>(ck)];
    }
  }
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

struct PlanResult {
  Strategy strategy;
  std::vector<int> indices; // config index per layer
  double cost = 0.0;        // evaluate_strategy on the input tables
  int final_graph_nodes = 0;
  int node_eliminations = 0;
  int edge_eliminations = 0;

  int eliminations() const { return node_eliminations + edge_eliminations; }
};

/// Reduces, enumerates the final graph, and unwinds to a full strategy. The
/// reported cost is re-read from the input tables in the canonical
/// evaluation order, so it matches evaluate_strategy bit for bit.
inline PlanResult plan_with_tables(const ComputationGraph &graph,
                                   const CostTables &tables,
                                   int k_bound = kDefaultFinalGraphBound) {
  ReducedGraph rg(graph, tables);
  rg.reduce();
  auto [final_idx, final_cost] = enumerate_final(rg, k_bound);
  (void)final_cost;

  PlanResult r;
  r.final_graph_nodes = rg.live_node_count();
  for (const EliminationRecord &rec : rg.log())
    (std::holds_alternative<NodeElimRecord>(rec) ? r.node_eliminations
                                                 : r.edge_eliminations)++;

  r.indices.assign(static_cast<size_t>(graph.layer_count()), -1);
  const auto nodes = rg.live_nodes();
  for (size_t i = 0; i < nodes.size(); ++i)
    r.indices[static_cast<size_t>(nodes[i])] = final_idx[i];
  unwind(rg.log(), r.indices);

  r.strategy.resize(static_cast<size_t>(graph.layer_count()));
  for (int l = 0; l < graph.layer_count(); ++l)
    r.strategy[static_cast<size_t>(l)] =
        tables.catalog[static_cast<size_t>(l)]
                      [static_cast<size_t>(r.indices[static_cast<size_t>(l)])];
  r.cost = detail::total_cost_by_index(graph, tables, r.indices);
  return r;
}

inline PlanResult plan(const ComputationGraph &graph, const DeviceGraph &devices,
                       int k_bound = kDefaultFinalGraphBound) {
  return plan_with_tables(graph, build_cost_tables(graph, devices), k_bound);
}

} // namespace parplan
