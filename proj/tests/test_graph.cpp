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
#include "parplan/graph.hpp"
#include "parplan/models.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace parplan;

namespace {

ComputationGraph tiny_conv() {
  return ComputationGraph::create(
      {{"in", Input{3, 8, 8}}, {"c", Conv2D{4, 3, 3, 1, 1, 1, 1}}},
      {{}, {"in"}}, 1);
}

} // namespace

TEST_CASE("conv and pool output extents follow window arithmetic") {
  auto g = ComputationGraph::create({{"in", Input{3, 32, 32}},
                                     {"c", Conv2D{16, 5, 5, 1, 1, 0, 0}},
                                     {"p", Pool2D{2, 2, 2, 2, 0, 0}}},
                                    {{}, {"in"}, {"c"}}, 32);
  CHECK(g.shape(1) == TensorShape{32, 16, 28, 28});
  CHECK(g.shape(2) == TensorShape{32, 16, 14, 14});
}

TEST_CASE("padding of 1 preserves spatial extent for 3x3 stride-1 conv") {
  auto g = tiny_conv();
  CHECK(g.shape(1) == TensorShape{1, 4, 8, 8});
}

TEST_CASE("flatten folds channel, height, and width") {
  auto g = ComputationGraph::create(
      {{"in", Input{16, 5, 5}}, {"f", Flatten{}}}, {{}, {"in"}}, 2);
  CHECK(g.shape(1) == TensorShape{2, 400, 1, 1});
}

TEST_CASE("fully connected output is (sample, out_channels)") {
  auto g = ComputationGraph::create(
      {{"in", Input{512, 7, 7}}, {"fc", FullyConnected{4096}}}, {{}, {"in"}},
      32);
  CHECK(g.shape(1) == TensorShape{32, 4096, 1, 1});
}

TEST_CASE("concat sums the axis extent and keeps the others") {
  auto g = ComputationGraph::create(
      {{"a", Input{64, 35, 35}},
       {"b", Input{48, 35, 35}},
       {"j", Concat{Dim::Channel}}},
      {{}, {}, {"a", "b"}}, 32);
  CHECK(g.shape(2) == TensorShape{32, 112, 35, 35});
}

TEST_CASE("concat rejects mismatched non-axis extents") {
  CHECK_THROWS_AS(ComputationGraph::create({{"a", Input{64, 35, 35}},
                                            {"b", Input{48, 17, 35}},
                                            {"j", Concat{Dim::Channel}}},
                                           {{}, {}, {"a", "b"}}, 32),
                  InputError);
}

TEST_CASE("validation rejects malformed graphs") {
  SECTION("dangling reference names the missing layer") {
    try {
      ComputationGraph::create({{"in", Input{1, 4, 4}}, {"c", Softmax{}}},
                               {{}, {"ghost"}}, 1);
      FAIL("expected InputError");
    } catch (const InputError &e) {
      CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
  }
  SECTION("duplicate layer id") {
    CHECK_THROWS_AS(ComputationGraph::create(
                        {{"x", Input{1, 4, 4}}, {"x", Softmax{}}}, {{}, {"x"}},
                        1),
                    InputError);
  }
  SECTION("cycle") {
    CHECK_THROWS_AS(ComputationGraph::create({{"in", Input{2, 4, 4}},
                                              {"a", Softmax{}},
                                              {"b", Softmax{}}},
                                             {{}, {"b"}, {"a"}}, 1),
                    InputError);
  }
  SECTION("concat needs two inputs") {
    CHECK_THROWS_AS(ComputationGraph::create(
                        {{"in", Input{2, 4, 4}}, {"j", Concat{Dim::Channel}}},
                        {{}, {"in"}}, 1),
                    InputError);
  }
  SECTION("single-input kinds take exactly one input") {
    CHECK_THROWS_AS(ComputationGraph::create({{"a", Input{2, 4, 4}},
                                              {"b", Input{2, 4, 4}},
                                              {"s", Softmax{}}},
                                             {{}, {}, {"a", "b"}}, 1),
                    InputError);
  }
  SECTION("input layers cannot have inputs") {
    CHECK_THROWS_AS(ComputationGraph::create(
                        {{"a", Input{2, 4, 4}}, {"b", Input{2, 4, 4}}},
                        {{}, {"a"}}, 1),
                    InputError);
  }
  SECTION("non-positive inferred extent") {
    CHECK_THROWS_AS(ComputationGraph::create({{"in", Input{3, 4, 4}},
                                              {"c", Conv2D{4, 7, 7, 1, 1, 0, 0}}},
                                             {{}, {"in"}}, 1),
                    InputError);
  }
  SECTION("empty graph") {
    CHECK_THROWS_AS(ComputationGraph::create({}, {}, 1), InputError);
  }
}

TEST_CASE("topological order is deterministic and respects edges") {
  auto g = models::inception_chain(4, 3);
  auto h = models::inception_chain(4, 3);
  CHECK(g.topo_order() == h.topo_order());
  for (const Edge &e : g.edges())
    CHECK(g.topo_rank(e.src) < g.topo_rank(e.dst));
}

TEST_CASE("shape inference is idempotent") {
  auto g = models::alexnet(8);
  auto g2 = infer_shapes(g);
  for (int l = 0; l < g.layer_count(); ++l)
    CHECK(g.shape(l) == g2.shape(l));
}

TEST_CASE("builtin layer counts") {
  CHECK(models::lenet5(32).layer_count() == 6);
  CHECK(models::alexnet(32).layer_count() == 11);
  CHECK(models::vgg16(32).layer_count() == 21);
  CHECK(models::inception_chain(32, 1).layer_count() == 10);
  CHECK(builtin_model("inception_chain", 32).layer_count() >= 102);
}

TEST_CASE("builtin lookup parses module counts and rejects junk") {
  CHECK(builtin_model("inception_chain(3)", 8).layer_count() == 1 + 9 * 3);
  CHECK_THROWS_AS(builtin_model("inception_chain(x)", 8), InputError);
  CHECK_THROWS_AS(builtin_model("resnet50", 8), InputError);
  CHECK_THROWS_AS(builtin_model("inception_chain(0)", 8), InputError);
}

TEST_CASE("vgg16 hits the classic feature-map sizes") {
  auto g = models::vgg16(32);
  CHECK(g.shape(g.index_of("pool5")) == TensorShape{32, 512, 7, 7});
  CHECK(g.shape(g.index_of("fc1")) == TensorShape{32, 4096, 1, 1});
}

TEST_CASE("device graph uniform factory and validation") {
  auto d = DeviceGraph::uniform(4, 2e13, 5e9);
  CHECK(d.count() == 4);
  CHECK(d.compute_rate(3) == 2e13);
  CHECK(d.bandwidth(0, 1) == 5e9);
  CHECK_THROWS_AS(DeviceGraph::uniform(0), InputError);
  CHECK_THROWS_AS(DeviceGraph({1e13, -1.0}, std::vector<double>(4, 1e10)),
                  InputError);
  CHECK_THROWS_AS(DeviceGraph({1e13, 1e13}, {0, 0, 0, 0}), InputError);
}
