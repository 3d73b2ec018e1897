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

#include "parplan/graph.hpp"

#include <string>
#include <vector>

namespace parplan {

/// Builtin network compositions, selectable by name. Each is a compact
/// single-chain or branch-and-join CNN sized so that planning behavior spans
/// the interesting range: a tiny chain a brute-force search can still cover,
/// two deep chains, and a wide multi-branch chain that exercises both
/// elimination rules. Layer counts include the input layer.
namespace models {

class Builder {
public:
  explicit Builder(i64 batch) : batch_(batch) {}

  std::string add(std::string id, LayerKind kind,
                  std::vector<std::string> inputs) {
    layers_.push_back({id, std::move(kind)});
    inputs_.push_back(std::move(inputs));
    return id;
  }

  ComputationGraph build() && {
    return ComputationGraph::create(std::move(layers_), inputs_, batch_);
  }

private:
  i64 batch_;
  std::vector<Layer> layers_;
  std::vector<std::vector<std::string>> inputs_;
};

inline Conv2D conv(i64 out_channels, i64 kernel, i64 stride = 1, i64 pad = 0) {
  return Conv2D{out_channels, kernel, kernel, stride, stride, pad, pad};
}

inline Pool2D pool(i64 kernel, i64 stride, i64 pad = 0) {
  return Pool2D{kernel, kernel, stride, stride, pad, pad};
}

/// 6 layers: two conv/pool stages over a 1x32x32 image, then a classifier.
inline ComputationGraph lenet5(i64 batch) {
  Builder b(batch);
  auto x = b.add("input", Input{1, 32, 32}, {});
  x = b.add("conv1", conv(6, 5), {x});
  x = b.add("pool1", pool(2, 2), {x});
  x = b.add("conv2", conv(16, 5), {x});
  x = b.add("pool2", pool(2, 2), {x});
  b.add("fc1", FullyConnected{10}, {x});
  return std::move(b).build();
}

/// 11 layers: five conv stages over a 3x224x224 image, then two classifiers.
inline ComputationGraph alexnet(i64 batch) {
  Builder b(batch);
  auto x = b.add("input", Input{3, 224, 224}, {});
  x = b.add("conv1", conv(96, 11, 4, 2), {x});
  x = b.add("pool1", pool(3, 2), {x});
  x = b.add("conv2", conv(256, 5, 1, 2), {x});
  x = b.add("pool2", pool(3, 2), {x});
  x = b.add("conv3", conv(384, 3, 1, 1), {x});
  x = b.add("conv4", conv(384, 3, 1, 1), {x});
  x = b.add("conv5", conv(256, 3, 1, 1), {x});
  x = b.add("pool3", pool(3, 2), {x});
  x = b.add("fc1", FullyConnected{4096}, {x});
  b.add("fc2", FullyConnected{1000}, {x});
  return std::move(b).build();
}

/// 21 layers: thirteen 3x3 convolutions in five pooled blocks, then two
/// classifiers.
inline ComputationGraph vgg16(i64 batch) {
  Builder b(batch);
  auto x = b.add("input", Input{3, 224, 224}, {});
  const std::vector<std::vector<i64>> blocks = {
      {64, 64}, {128, 128}, {256, 256, 256}, {512, 512, 512}, {512, 512, 512}};
  for (size_t bi = 0; bi < blocks.size(); ++bi) {
    for (size_t ci = 0; ci < blocks[bi].size(); ++ci) {
      std::string id = "conv" + std::to_string(bi + 1) + "_" +
                       std::to_string(ci + 1);
      x = b.add(id, conv(blocks[bi][ci], 3, 1, 1), {x});
    }
    x = b.add("pool" + std::to_string(bi + 1), pool(2, 2), {x});
  }
  x = b.add("fc1", FullyConnected{4096}, {x});
  b.add("fc2", FullyConnected{1000}, {x});
  return std::move(b).build();
}

/// 1 + 9k layers: a chain of k four-branch modules over a 192x35x35 input.
/// Each module runs 1x1, 1x1-5x5, 1x1-3x3-3x3, and pool-1x1 branches and
/// concatenates them along the channel dimension (64+64+96+64 = 288), so the
/// graph is irreducible at each join until both elimination rules cooperate.
inline ComputationGraph inception_chain(i64 batch, int modules = 12) {
  if (modules < 1)
    throw InputError("inception_chain: module count must be >= 1");
  Builder b(batch);
  auto x = b.add("input", Input{192, 35, 35}, {});
  for (int m = 1; m <= modules; ++m) {
    std::string p = "m" + std::to_string(m) + "_";
    auto b1 = b.add(p + "b1", conv(64, 1), {x});
    auto b2 = b.add(p + "b2a", conv(48, 1), {x});
    b2 = b.add(p + "b2b", conv(64, 5, 1, 2), {b2});
    auto b3 = b.add(p + "b3a", conv(64, 1), {x});
    b3 = b.add(p + "b3b", conv(96, 3, 1, 1), {b3});
    b3 = b.add(p + "b3c", conv(96, 3, 1, 1), {b3});
    auto b4 = b.add(p + "b4p", pool(3, 1, 1), {x});
    b4 = b.add(p + "b4c", conv(64, 1), {b4});
    x = b.add(p + "join", Concat{Dim::Channel}, {b1, b2, b3, b4});
  }
  return std::move(b).build();
}

} // namespace models

inline std::vector<std::string> builtin_model_names() {
  return {"lenet5", "alexnet", "vgg16", "inception_chain"};
}

/// Looks up a builtin composition by name. "inception_chain" accepts an
/// optional module count, e.g. "inception_chain(4)".
inline ComputationGraph builtin_model(const std::string &name, i64 batch) {
  if (name == "lenet5")
    return models::lenet5(batch);
  if (name == "alexnet")
    return models::alexnet(batch);
  if (name == "vgg16")
    return models::vgg16(batch);
  if (name == "inception_chain")
    return models::inception_chain(batch);
  if (name.rfind("inception_chain(", 0) == 0 && name.back() == ')') {
    std::string arg = name.substr(16, name.size() - 17);
    try {
      size_t used = 0;
      int modules = std::stoi(arg, &used);
      if (used == arg.size())
        return models::inception_chain(batch, modules);
    } catch (const std::exception &) {
    }
    throw InputError("invalid module count '" + arg + "' in '" + name + "'");
  }
  std::string known;
  for (const auto &n : builtin_model_names())
    known += (known.empty() ? "" : ", ") + n;
  throw InputError("unknown model '" + name + "' (builtins: " + known + ")");
}

} // namespace parplan
