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

#include <random>
#include <sstream>

namespace parplan {

// ---------------------------------------------------------------------------
// Exhaustive search
// ---------------------------------------------------------------------------

struct BruteForceResult {
  Strategy strategy;
  std::vector<int> indices;
  double cost = 0.0;
  u64 visited = 0;
};

namespace detail {

inline std::string strategy_space_string(long double size) {
  std::ostringstream os;
  if (size < 1e15l)
    os << static_cast<u64>(size);
  else
    os << static_cast<double>(size);
  return os.str();
}

} // namespace detail

/// Scans every joint config assignment and returns the exact minimum of the
/// total cost, using the same summation order as evaluate_strategy so
/// results compare bit for bit. Ties resolve to the lexicographically
/// smallest config-index tuple (candidates are visited in that order).
inline BruteForceResult
brute_force_plan(const ComputationGraph &graph, const CostTables &tables,
                 u64 budget = kDefaultBruteForceBudget) {
  const int n = graph.layer_count();
  long double space = 1.0l;
  for (int l = 0; l < n; ++l)
    space *= static_cast<long double>(tables.config_count(l));
  if (space > static_cast<long double>(budget))
    throw LimitError("strategy space has " +
                     detail::strategy_space_string(space) +
                     " strategies, exceeding the exhaustive-search budget of " +
                     std::to_string(budget));

  std::vector<int> idx(static_cast<size_t>(n), 0);
  BruteForceResult r;
  bool have_best = false;
  for (;;) {
    ++r.visited;
    const double cost = detail::total_cost_by_index(graph, tables, idx);
    if (!have_best || cost < r.cost) {
      r.cost = cost;
      r.indices = idx;
      have_best = true;
    }
    int d = n - 1;
    while (d >= 0 && idx[static_cast<size_t>(d)] + 1 ==
                         tables.config_count(d)) {
      idx[static_cast<size_t>(d)] = 0;
      --d;
    }
    if (d < 0)
      break;
    ++idx[static_cast<size_t>(d)];
  }

  r.strategy.resize(static_cast<size_t>(n));
  for (int l = 0; l < n; ++l)
    r.strategy[static_cast<size_t>(l)] =
        tables.catalog[static_cast<size_t>(l)]
                      [static_cast<size_t>(r.indices[static_cast<size_t>(l)])];
  return r;
}

// ---------------------------------------------------------------------------
// Random reducible instances
// ---------------------------------------------------------------------------

/// Parameters for the seeded instance generator. The generated topology is
/// series-parallel (chains plus nested two-branch diamonds), so both
/// elimination rules together always reduce it to at most two nodes.
struct RandomGraphSpec {
  u64 seed = 0;
  int node_count = 6;
  int max_configs_per_layer = 3;
  double branch_probability = 0.3;
  int device_count = 4;
};

struct RandomInstance {
  ComputationGraph graph;
  CostTables tables;
};

/// Builds a random series-parallel graph with synthetic cost tables. Table
/// values are drawn uniformly from {0, 1/64, 2/64, ..., 640/64}; every value
/// and every sum of values this small is exactly representable in a double,
/// so planner and oracle costs can be compared without tolerance. Fill order
/// is pinned (layers by index, then edges by id, row-major) to keep
/// instances byte-stable for a given seed.
inline RandomInstance random_series_parallel_graph(const RandomGraphSpec &spec) {
  if (spec.node_count < 1)
    throw InputError("random graph needs at least one node");
  if (spec.max_configs_per_layer < 1)
    throw InputError("random graph needs at least one config per layer");
  if (spec.device_count < 1)
    throw InputError("random graph needs at least one device");

  std::mt19937_64 rng(spec.seed);
  auto chance = [&](double p) {
    return static_cast<double>(rng() % 1000) / 1000.0 < p;
  };

  std::vector<Layer> layers;
  std::vector<std::vector<std::string>> inputs;
  auto add = [&](LayerKind kind, std::vector<std::string> in) {
    std::string id = "n" + std::to_string(layers.size());
    layers.push_back({id, std::move(kind)});
    inputs.push_back(std::move(in));
    return id;
  };

  std::string tip = add(Input{4, 1, 1}, {});
  int count = 1;
  while (count < spec.node_count) {
    if (spec.node_count - count >= 3 && chance(spec.branch_probability)) {
      std::string a = add(Softmax{}, {tip});
      std::string b = add(Softmax{}, {tip});
      tip = add(Concat{Dim::Channel}, {a, b});
      count += 3;
    } else {
      tip = add(Softmax{}, {tip});
      count += 1;
    }
  }

  RandomInstance inst{ComputationGraph::create(std::move(layers), inputs, 8),
                      CostTables{}};
  const ComputationGraph &g = inst.graph;
  CostTables &t = inst.tables;

  auto dyadic = [&]() { return static_cast<double>(rng() % 641) / 64.0; };

  t.catalog.resize(static_cast<size_t>(g.layer_count()));
  t.node.resize(static_cast<size_t>(g.layer_count()));
  for (int l = 0; l < g.layer_count(); ++l) {
    auto cat = enumerate_configs(g.layer(l).kind, g.shape(l), spec.device_count);
    if (static_cast<int>(cat.size()) > spec.max_configs_per_layer)
      cat.resize(static_cast<size_t>(spec.max_configs_per_layer));
    t.catalog[static_cast<size_t>(l)] = std::move(cat);
    for (size_t i = 0; i < t.catalog[static_cast<size_t>(l)].size(); ++i)
      t.node[static_cast<size_t>(l)].push_back(dyadic());
  }
  t.xfer.resize(static_cast<size_t>(g.edge_count()));
  for (const Edge &e : g.edges()) {
    auto &m = t.xfer[static_cast<size_t>(e.id)];
    m.resize(t.catalog[static_cast<size_t>(e.src)].size());
    for (auto &row : m) {
      row.resize(t.catalog[static_cast<size_t>(e.dst)].size());
      for (double &v : row)
        v = dyadic();
    }
  }
  return inst;
}

} // namespace parplan
