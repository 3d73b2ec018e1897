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
#include "parplan/cost.hpp"
#include "parplan/models.hpp"
#include "parplan/report.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace parplan;

namespace {

ComputationGraph fc_graph() {
  return ComputationGraph::create(
      {{"in", Input{512, 7, 7}}, {"fc", FullyConnected{4096}}}, {{}, {"in"}},
      32);
}

} // namespace

TEST_CASE("compute cost of the big FC layer on one modeled device") {
  auto g = fc_graph();
  auto d = DeviceGraph::uniform(1);
  // 2 * 32 * 25088 * 4096 FLOPs forward, tripled, at 1e13 flop/s.
  CHECK(compute_cost(g.layer(1).kind, g.shape(1), g.shape(0), {1, 1, 1, 1},
                     d) == 1.9730006016e-3);
}

TEST_CASE("compute cost halves with two equal devices") {
  auto g = models::lenet5(32);
  auto d = DeviceGraph::uniform(2);
  for (int l : {1, 2, 3, 4, 5}) {
    const TensorShape in = g.input_shape(l);
    double c1 = compute_cost(g.layer(l).kind, g.shape(l), in, {1, 1, 1, 1}, d);
    double c2 = compute_cost(g.layer(l).kind, g.shape(l), in, {2, 1, 1, 1}, d);
    CHECK(c2 == c1 / 2.0);
  }
}

TEST_CASE("compute cost uses the slowest assigned device") {
  auto g = fc_graph();
  DeviceGraph d({1e13, 5e12, 1e13}, std::vector<double>(9, 1e10));
  double fast = compute_cost(g.layer(1).kind, g.shape(1), g.shape(0),
                             {1, 1, 1, 1}, d);
  double pair = compute_cost(g.layer(1).kind, g.shape(1), g.shape(0),
                             {2, 1, 1, 1}, d);
  // Half the FLOPs, but the slower device (5e12) sets the pace.
  CHECK(pair == fast);
}

TEST_CASE("zero-FLOP layers cost nothing to compute") {
  auto d = DeviceGraph::uniform(2);
  CHECK(layer_flops(Input{3, 8, 8}, {4, 3, 8, 8}, {4, 3, 8, 8}) == 0);
  CHECK(layer_flops(Flatten{}, {4, 192, 1, 1}, {4, 3, 8, 8}) == 0);
  CHECK(layer_flops(Concat{Dim::Channel}, {4, 6, 8, 8}, {4, 3, 8, 8}) == 0);
  CHECK(compute_cost(Concat{Dim::Channel}, {4, 6, 8, 8}, {4, 3, 8, 8},
                     {2, 1, 1, 1}, d) == 0.0);
}

TEST_CASE("flop formulas") {
  CHECK(layer_flops(Conv2D{16, 5, 5, 1, 1, 0, 0}, {32, 16, 28, 28},
                    {32, 3, 32, 32}) ==
        2LL * 32 * 16 * 28 * 28 * 3 * 5 * 5);
  CHECK(layer_flops(Pool2D{2, 2, 2, 2, 0, 0}, {32, 16, 14, 14},
                    {32, 16, 28, 28}) == 32LL * 16 * 14 * 14 * 2 * 2);
  CHECK(layer_flops(Softmax{}, {32, 10, 1, 1}, {32, 10, 1, 1}) ==
        5LL * 32 * 10);
  CHECK(layer_flops(FullyConnected{4096}, {32, 4096, 1, 1}, {32, 512, 7, 7}) ==
        2LL * 32 * 25088 * 4096);
}

TEST_CASE("sync cost follows the parameter-server round trip") {
  auto g = fc_graph();
  auto d = DeviceGraph::uniform(2, kDefaultComputeRate, 1e10);
  SECTION("data-parallel replicas pay two shards each") {
    CHECK(sync_cost(g.layer(1).kind, g.shape(1), g.shape(0), {2, 1, 1, 1},
                    d) == 0.0822083584);
  }
  SECTION("channel-sharded parameters cost nothing") {
    auto d4 = DeviceGraph::uniform(4, kDefaultComputeRate, 1e10);
    CHECK(sync_cost(g.layer(1).kind, g.shape(1), g.shape(0), {1, 4, 1, 1},
                    d4) == 0.0);
  }
  SECTION("parameterless layers never sync") {
    CHECK(sync_cost(Pool2D{2, 2, 2, 2, 0, 0}, {32, 16, 14, 14},
                    {32, 16, 28, 28}, {2, 1, 1, 1}, d) == 0.0);
    CHECK(parameter_bytes(Softmax{}, {32, 10, 1, 1}, {32, 10, 1, 1}) == 0.0);
  }
  SECTION("mixed degrees shard by channel and replicate across the rest") {
    auto d4 = DeviceGraph::uniform(4, kDefaultComputeRate, 1e10);
    const double param = parameter_bytes(g.layer(1).kind, g.shape(1), g.shape(0));
    // (n=2, c=2): shard = P/2, devices 1..3 each move 2 * shard.
    const double per_device = 2.0 * (param / 2.0) / 1e10;
    CHECK(sync_cost(g.layer(1).kind, g.shape(1), g.shape(0), {2, 2, 1, 1},
                    d4) == per_device + per_device + per_device);
  }
}

TEST_CASE("parameter byte counts") {
  CHECK(parameter_bytes(Conv2D{16, 5, 5, 1, 1, 0, 0}, {32, 16, 28, 28},
                        {32, 3, 32, 32}) == 4.0 * 16 * 3 * 5 * 5);
  CHECK(parameter_bytes(FullyConnected{4096}, {32, 4096, 1, 1},
                        {32, 512, 7, 7}) == 4.0 * 25088 * 4096);
}

TEST_CASE("transfer cost is the bottleneck link time") {
  auto d = DeviceGraph::uniform(2, kDefaultComputeRate, 1e10);
  auto g = ComputationGraph::create({{"in", Input{1, 8, 8}},
                                     {"c1", Conv2D{1, 3, 3, 1, 1, 1, 1}},
                                     {"c2", Conv2D{1, 3, 3, 1, 1, 1, 1}}},
                                    {{}, {"in"}, {"c1"}}, 1);
  SECTION("halo exchange between height-split convs") {
    auto p = transfer_profile(g, g.edge(1), {1, 1, 2, 1}, {1, 1, 2, 1}, d);
    CHECK(p.bytes == 64.0);
    CHECK(p.seconds == 32.0 / 1e10);
  }
  SECTION("same config with owned-only requirements moves nothing") {
    auto gs = ComputationGraph::create({{"in", Input{512, 7, 7}},
                                        {"fc", FullyConnected{4096}},
                                        {"sm", Softmax{}}},
                                       {{}, {"in"}, {"fc"}}, 32);
    CHECK(transfer_cost(gs, gs.edge(1), {2, 1, 1, 1}, {2, 1, 1, 1}, d) == 0.0);
    CHECK(transfer_cost(gs, gs.edge(1), {1, 2, 1, 1}, {1, 2, 1, 1}, d) == 0.0);
  }
  SECTION("channel-parallel FC pulls the remote half of every sample") {
    auto gf = fc_graph();
    auto p = transfer_profile(gf, gf.edge(0), {1, 2, 1, 1}, {1, 2, 1, 1}, d);
    // each device needs the other's half: 4 bytes * 32 * 25088 / 2 per direction
    CHECK(p.bytes == 2.0 * 4.0 * 32.0 * 25088.0 / 2.0);
    CHECK(p.seconds == (4.0 * 32.0 * 25088.0 / 2.0) / 1e10);
  }
  SECTION("single device never transfers") {
    auto d1 = DeviceGraph::uniform(1);
    CHECK(transfer_cost(g, g.edge(0), {1, 1, 1, 1}, {1, 1, 1, 1}, d1) == 0.0);
  }
}

TEST_CASE("transfer conservation: every element is delivered at least once") {
  auto g = models::lenet5(8);
  auto d = DeviceGraph::uniform(4);
  for (const Edge &e : g.edges()) {
    const TensorShape &src_shape = g.edge_shape(e);
    auto src_cfgs = enumerate_configs(g.layer(e.src).kind, src_shape, 4);
    auto dst_cfgs = enumerate_configs(g.layer(e.dst).kind, g.shape(e.dst), 4);
    for (const Config &cd : dst_cfgs) {
      i64 delivered = 0;
      for (i64 q = 0; q < cd.total(); ++q) {
        Region need = required_input_region(g, e, cd, q);
        delivered += need.volume();
      }
      CHECK(delivered >= src_shape.volume());
    }
    (void)src_cfgs;
  }
}

TEST_CASE("cost tables cover the catalogs and are reproducible") {
  auto g = models::lenet5(32);
  auto d = DeviceGraph::uniform(4);
  auto t = build_cost_tables(g, d);
  auto t2 = build_cost_tables(g, d);
  CHECK(t.node == t2.node);
  CHECK(t.xfer == t2.xfer);
  REQUIRE(t.catalog.size() == static_cast<size_t>(g.layer_count()));
  for (int l = 0; l < g.layer_count(); ++l) {
    CHECK(t.node[static_cast<size_t>(l)].size() ==
          t.catalog[static_cast<size_t>(l)].size());
    for (double v : t.node[static_cast<size_t>(l)]) {
      CHECK(v >= 0.0);
      CHECK(std::isfinite(v));
    }
  }
  for (const Edge &e : g.edges()) {
    const auto &m = t.xfer[static_cast<size_t>(e.id)];
    REQUIRE(m.size() == t.catalog[static_cast<size_t>(e.src)].size());
    for (const auto &row : m) {
      REQUIRE(row.size() == t.catalog[static_cast<size_t>(e.dst)].size());
      for (double v : row) {
        CHECK(v >= 0.0);
        CHECK(std::isfinite(v));
      }
    }
  }
}

TEST_CASE("one-device tables have zero transfer everywhere") {
  auto g = models::lenet5(8);
  auto t = build_cost_tables(g, DeviceGraph::uniform(1));
  for (const auto &m : t.xfer)
    for (const auto &row : m)
      for (double v : row)
        CHECK(v == 0.0);
  CHECK(t.node[1][0] > 0.0);
}

TEST_CASE("config_index finds catalog entries") {
  auto g = models::lenet5(32);
  auto t = build_cost_tables(g, DeviceGraph::uniform(4));
  for (int l = 0; l < g.layer_count(); ++l) {
    const auto &cat = t.catalog[static_cast<size_t>(l)];
    for (size_t i = 0; i < cat.size(); ++i)
      CHECK(t.config_index(l, cat[i]) == static_cast<int>(i));
    CHECK(t.config_index(l, Config{31, 1, 1, 1}) == -1);
  }
}

TEST_CASE("strategy evaluation sums nodes then edges") {
  SECTION("hand-built chain tables") {
    auto g = ComputationGraph::create(
        {{"a", Input{4, 1, 1}}, {"b", Softmax{}}}, {{}, {"a"}}, 8);
    CostTables t;
    t.catalog = {{{1, 1, 1, 1}, {2, 1, 1, 1}}, {{1, 1, 1, 1}, {2, 1, 1, 1}}};
    t.node = {{1, 2}, {3, 4}};
    t.xfer = {{{0, 5}, {5, 0}}};
    CHECK(evaluate_strategy(g, t, {{1, 1, 1, 1}, {2, 1, 1, 1}}) == 10.0);
    CHECK(evaluate_strategy(g, t, {{1, 1, 1, 1}, {1, 1, 1, 1}}) == 4.0);
  }
  SECTION("single layer equals its compute cost") {
    auto g = ComputationGraph::create({{"in", Input{3, 8, 8}}}, {{}}, 4);
    auto t = build_cost_tables(g, DeviceGraph::uniform(1));
    CHECK(evaluate_strategy(g, t, {{1, 1, 1, 1}}) == 0.0);
  }
  SECTION("errors") {
    auto g = models::lenet5(32);
    auto t = build_cost_tables(g, DeviceGraph::uniform(2));
    Strategy s(static_cast<size_t>(g.layer_count()), Config{});
    s.resize(3);
    CHECK_THROWS_AS(evaluate_strategy(g, t, s), InputError);
    Strategy bad(static_cast<size_t>(g.layer_count()), Config{});
    bad[1] = {7, 1, 1, 1};
    CHECK_THROWS_AS(evaluate_strategy(g, t, bad), InputError);
  }
}

TEST_CASE("uniform table scaling preserves the breakdown structure") {
  auto g = models::lenet5(16);
  auto d = DeviceGraph::uniform(4);
  auto t = build_cost_tables(g, d);
  auto scaled = t;
  for (auto &v : scaled.node)
    for (double &x : v)
      x *= 2.0;
  for (auto &m : scaled.xfer)
    for (auto &row : m)
      for (double &x : row)
        x *= 2.0;
  Strategy s(static_cast<size_t>(g.layer_count()), Config{});
  s[0].sample = 2;
  s[1].sample = 2;
  CHECK(evaluate_strategy(g, scaled, s) == 2.0 * evaluate_strategy(g, t, s));
}

TEST_CASE("component breakdown matches the total") {
  auto g = models::alexnet(32);
  auto d = DeviceGraph::uniform(4);
  auto t = build_cost_tables(g, d);
  Strategy s(static_cast<size_t>(g.layer_count()), Config{});
  for (int l = 0; l < g.layer_count(); ++l)
    if (g.shape(l).sample % 4 == 0)
      s[static_cast<size_t>(l)] = {4, 1, 1, 1};
  auto b = evaluate_components(g, t, s);
  CHECK(b.total == evaluate_strategy(g, t, s));
  double node_sum = 0.0, xfer_sum = 0.0;
  for (double v : b.per_layer_node)
    node_sum += v;
  for (double v : b.per_edge_xfer)
    xfer_sum += v;
  CHECK(b.node_total == node_sum);
  CHECK(b.xfer_total == xfer_sum);
  for (size_t l = 0; l < b.per_layer_node.size(); ++l)
    CHECK(b.per_layer_node[l] ==
          b.per_layer_compute[l] + b.per_layer_sync[l]);
}

TEST_CASE("sync traffic bytes mirror the sync cost structure") {
  auto g = fc_graph();
  const double param =
      parameter_bytes(g.layer(1).kind, g.shape(1), g.shape(0));
  CHECK(sync_traffic_bytes(g.layer(1).kind, g.shape(1), g.shape(0),
                           {2, 1, 1, 1}) == 2.0 * param);
  CHECK(sync_traffic_bytes(g.layer(1).kind, g.shape(1), g.shape(0),
                           {1, 4, 1, 1}) == 0.0);
}
