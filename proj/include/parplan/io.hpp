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

#include <fstream>

#include <json.hpp>

namespace parplan {

using json = nlohmann::ordered_json;

namespace detail {

inline json load_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

template <typename T>
T field(const json &j, const std::string &key, const std::string &where) {
  if (!j.contains(key))
    throw InputError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception &) {
    throw InputError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json &j, const std::string &key, T fallback,
           const std::string &where) {
  if (!j.contains(key))
    return fallback;
  return field<T>(j, key, where);
}

/// Accepts either a square field ("kernel") or explicit per-axis fields
/// ("kernel_h"/"kernel_w"), per-axis winning when both appear.
inline std::pair<i64, i64> axis_pair(const json &j, const std::string &base,
                                     i64 fallback, const std::string &where) {
  i64 both = field_or<i64>(j, base, fallback, where);
  return {field_or<i64>(j, base + "_h", both, where),
          field_or<i64>(j, base + "_w", both, where)};
}

inline Dim parse_dim(const std::string &name, const std::string &where) {
  for (Dim d : kAllDims)
    if (name == dim_name(d))
      return d;
  throw InputError(where + ": unknown dimension '" + name + "'");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Network files
// ---------------------------------------------------------------------------

/// Parses {"batch": int, "layers": [{"id", "kind", "inputs", ...}]}.
/// `batch_override` > 0 replaces the file's batch size.
inline ComputationGraph parse_network(const json &j, i64 batch_override = 0) {
  i64 batch = detail::field_or<i64>(j, "batch", 32, "network");
  if (batch_override > 0)
    batch = batch_override;
  if (!j.contains("layers") || !j.at("layers").is_array())
    throw InputError("network: missing 'layers' array");

  std::vector<Layer> layers;
  std::vector<std::vector<std::string>> inputs;
  for (const auto &lj : j.at("layers")) {
    const std::string id =
        detail::field<std::string>(lj, "id", "network layer");
    const std::string where = "layer '" + id + "'";
    const std::string kind = detail::field<std::string>(lj, "kind", where);

    LayerKind k;
    if (kind == "input") {
      k = Input{detail::field<i64>(lj, "channel", where),
                detail::field<i64>(lj, "height", where),
                detail::field<i64>(lj, "width", where)};
    } else if (kind == "conv2d" || kind == "pool2d") {
      auto [kh, kw] = detail::axis_pair(lj, "kernel", 1, where);
      auto [sh, sw] = detail::axis_pair(lj, "stride", 1, where);
      auto [ph, pw] = detail::axis_pair(lj, "pad", 0, where);
      if (kind == "conv2d")
        k = Conv2D{detail::field<i64>(lj, "out_channels", where),
                   kh, kw, sh, sw, ph, pw};
      else
        k = Pool2D{kh, kw, sh, sw, ph, pw};
    } else if (kind == "fully_connected") {
      k = FullyConnected{detail::field<i64>(lj, "out_channels", where)};
    } else if (kind == "flatten") {
      k = Flatten{};
    } else if (kind == "concat") {
      k = Concat{detail::parse_dim(
          detail::field_or<std::string>(lj, "axis", "channel", where), where)};
    } else if (kind == "softmax") {
      k = Softmax{};
    } else {
      throw InputError(where + ": unknown kind '" + kind + "'");
    }

    layers.push_back({id, k});
    inputs.push_back(detail::field_or<std::vector<std::string>>(
        lj, "inputs", {}, where));
  }
  return ComputationGraph::create(std::move(layers), inputs, batch);
}

inline ComputationGraph parse_network_file(const std::string &path,
                                           i64 batch_override = 0) {
  return parse_network(detail::load_json_file(path), batch_override);
}

inline json emit_network(const ComputationGraph &g) {
  json layers = json::array();
  for (int l = 0; l < g.layer_count(); ++l) {
    const Layer &layer = g.layer(l);
    json lj;
    lj["id"] = layer.id;
    lj["kind"] = kind_name(layer.kind);
    json ins = json::array();
    for (int eid : g.in_edges(l))
      ins.push_back(g.layer(g.edge(eid).src).id);
    lj["inputs"] = ins;
    if (const auto *in = std::get_if<Input>(&layer.kind)) {
      lj["channel"] = in->channel;
      lj["height"] = in->height;
      lj["width"] = in->width;
    } else if (const auto *c = std::get_if<Conv2D>(&layer.kind)) {
      lj["out_channels"] = c->out_channels;
      lj["kernel_h"] = c->kernel_h;
      lj["kernel_w"] = c->kernel_w;
      lj["stride_h"] = c->stride_h;
      lj["stride_w"] = c->stride_w;
      lj["pad_h"] = c->pad_h;
      lj["pad_w"] = c->pad_w;
    } else if (const auto *p = std::get_if<Pool2D>(&layer.kind)) {
      lj["kernel_h"] = p->kernel_h;
      lj["kernel_w"] = p->kernel_w;
      lj["stride_h"] = p->stride_h;
      lj["stride_w"] = p->stride_w;
      lj["pad_h"] = p->pad_h;
      lj["pad_w"] = p->pad_w;
    } else if (const auto *f = std::get_if<FullyConnected>(&layer.kind)) {
      lj["out_channels"] = f->out_channels;
    } else if (const auto *cc = std::get_if<Concat>(&layer.kind)) {
      lj["axis"] = dim_name(cc->axis);
    }
    layers.push_back(lj);
  }
  return json{{"batch", g.batch()}, {"layers", layers}};
}

// ---------------------------------------------------------------------------
// Device files
// ---------------------------------------------------------------------------

/// Parses {"devices": [{"id", "flops"}], "links": [{"src", "dst",
/// "bandwidth"}], "default_bandwidth": float}. Device ids must be dense
/// 0..n-1 (in any order). Links are ordered pairs; pairs without a link use
/// default_bandwidth.
inline DeviceGraph parse_device_graph(const json &j) {
  if (!j.contains("devices") || !j.at("devices").is_array() ||
      j.at("devices").empty())
    throw InputError("device file: missing non-empty 'devices' array");
  const size_t n = j.at("devices").size();
  std::vector<double> rates(n, 0.0);
  std::vector<bool> seen(n, false);
  for (const auto &dj : j.at("devices")) {
    const i64 id = detail::field<i64>(dj, "id", "device");
    if (id < 0 || id >= static_cast<i64>(n))
      throw InputError("device id " + std::to_string(id) +
                       " out of range (ids must be dense 0.." +
                       std::to_string(n - 1) + ")");
    if (seen[static_cast<size_t>(id)])
      throw InputError("duplicate device id " + std::to_string(id));
    seen[static_cast<size_t>(id)] = true;
    rates[static_cast<size_t>(id)] =
        detail::field<double>(dj, "flops", "device " + std::to_string(id));
  }

  const double fallback = detail::field_or<double>(
      j, "default_bandwidth", kDefaultBandwidth, "device file");
  std::vector<double> bw(n * n, fallback);
  if (j.contains("links")) {
    for (const auto &lj : j.at("links")) {
      const i64 src = detail::field<i64>(lj, "src", "link");
      const i64 dst = detail::field<i64>(lj, "dst", "link");
      if (src < 0 || src >= static_cast<i64>(n) || dst < 0 ||
          dst >= static_cast<i64>(n))
        throw InputError("link " + std::to_string(src) + "->" +
                         std::to_string(dst) + " references unknown device");
      bw[static_cast<size_t>(src) * n + static_cast<size_t>(dst)] =
          detail::field<double>(lj, "bandwidth", "link");
    }
  }
  return DeviceGraph(std::move(rates), std::move(bw));
}

inline DeviceGraph parse_device_file(const std::string &path) {
  return parse_device_graph(detail::load_json_file(path));
}

// ---------------------------------------------------------------------------
// Strategy files
// ---------------------------------------------------------------------------

inline json config_json(const Config &c) {
  return json{{"sample", c.sample},
              {"channel", c.channel},
              {"height", c.height},
              {"width", c.width}};
}

inline json strategy_json(const ComputationGraph &graph,
                          const Strategy &strategy, double cost,
                          int eliminations, int final_graph_nodes) {
  json layers = json::object();
  for (int l = 0; l < graph.layer_count(); ++l)
    layers[graph.layer(l).id] = config_json(strategy[static_cast<size_t>(l)]);
  return json{{"cost_seconds", cost},
              {"layers", layers},
              {"eliminations", eliminations},
              {"final_graph_nodes", final_graph_nodes}};
}

/// Reads the "layers" map of a strategy document; every graph layer must
/// appear, unknown ids are rejected, absent dimensions default to 1.
inline Strategy parse_strategy(const json &j, const ComputationGraph &graph) {
  if (!j.contains("layers") || !j.at("layers").is_object())
    throw InputError("strategy: missing 'layers' object");
  Strategy s(static_cast<size_t>(graph.layer_count()));
  std::vector<bool> covered(static_cast<size_t>(graph.layer_count()), false);
  for (const auto &[id, cj] : j.at("layers").items()) {
    const int l = graph.index_of(id);
    if (l < 0)
      throw InputError("strategy names unknown layer '" + id + "'");
    const std::string where = "strategy for layer '" + id + "'";
    Config c;
    c.sample = detail::field_or<i64>(cj, "sample", 1, where);
    c.channel = detail::field_or<i64>(cj, "channel", 1, where);
    c.height = detail::field_or<i64>(cj, "height", 1, where);
    c.width = detail::field_or<i64>(cj, "width", 1, where);
    s[static_cast<size_t>(l)] = c;
    covered[static_cast<size_t>(l)] = true;
  }
  for (int l = 0; l < graph.layer_count(); ++l)
    if (!covered[static_cast<size_t>(l)])
      throw InputError("strategy missing layer '" + graph.layer(l).id + "'");
  return s;
}

inline Strategy parse_strategy_file(const std::string &path,
                                    const ComputationGraph &graph) {
  return parse_strategy(detail::load_json_file(path), graph);
}

// ---------------------------------------------------------------------------
// Measured cost tables
// ---------------------------------------------------------------------------

/// Overlays measured costs onto analytically built tables. Format:
/// {"node_costs": {layer_id: [seconds,...]}, "xfer_costs": {edge_id:
/// [[seconds,...],...]}} with entries ordered like the layer's config
/// catalog (edge keys are stringified edge indices). Layers and edges not
/// named keep their analytic values; any override drops the compute/sync
/// split since measured values are combined.
inline void apply_measured_costs(const json &j, const ComputationGraph &graph,
                                 CostTables &tables) {
  bool touched = false;
  if (j.contains("node_costs")) {
    for (const auto &[id, vj] : j.at("node_costs").items()) {
      const int l = graph.index_of(id);
      if (l < 0)
        throw InputError("cost file names unknown layer '" + id + "'");
      auto vals = vj.get<std::vector<double>>();
      if (vals.size() != tables.node[static_cast<size_t>(l)].size())
        throw InputError("cost file: layer '" + id + "' has " +
                         std::to_string(vals.size()) + " node costs, catalog has " +
                         std::to_string(tables.node[static_cast<size_t>(l)].size()));
      for (double v : vals)
        if (!(v >= 0))
          throw InputError("cost file: layer '" + id + "' has a negative cost");
      tables.node[static_cast<size_t>(l)] = std::move(vals);
      touched = true;
    }
  }
  if (j.contains("xfer_costs")) {
    for (const auto &[key, mj] : j.at("xfer_costs").items()) {
      int e = -1;
      try {
        size_t used = 0;
        e = std::stoi(key, &used);
        if (used != key.size())
          e = -1;
      } catch (const std::exception &) {
      }
      if (e < 0 || e >= graph.edge_count())
        throw InputError("cost file names unknown edge '" + key + "'");
      auto m = mj.get<std::vector<std::vector<double>>>();
      const auto &cur = tables.xfer[static_cast<size_t>(e)];
      if (m.size() != cur.size())
        throw InputError("cost file: edge " + key + " row count mismatch");
      for (size_t i = 0; i < m.size(); ++i) {
        if (m[i].size() != cur[i].size())
          throw InputError("cost file: edge " + key + " column count mismatch");
        for (double v : m[i])
          if (!(v >= 0))
            throw InputError("cost file: edge " + key + " has a negative cost");
      }
      tables.xfer[static_cast<size_t>(e)] = std::move(m);
      touched = true;
    }
  }
  if (touched) {
    tables.compute.clear();
    tables.sync.clear();
  }
}

inline void apply_measured_costs_file(const std::string &path,
                                      const ComputationGraph &graph,
                                      CostTables &tables) {
  apply_measured_costs(detail::load_json_file(path), graph, tables);
}

} // namespace parplan
