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

namespace parplan {

/// Fixed reference strategies. Data parallelism splits every layer across
/// samples; model parallelism splits parameterized layers across output
/// channels; the hybrid splits convolution and pooling across samples and
/// dense/softmax layers across channels.
enum class BaselineKind { Data, Model, Owt };

inline const char *baseline_name(BaselineKind k) {
  switch (k) {
  case BaselineKind::Data:
    return "data";
  case BaselineKind::Model:
    return "model";
  default:
    return "owt";
  }
}

namespace detail {

inline i64 largest_divisor_up_to(i64 n, i64 cap) {
  for (i64 d = std::min(n, cap); d >= 1; --d)
    if (n % d == 0)
      return d;
  return 1;
}

} // namespace detail

/// One config per layer. Degrees use the largest divisor of the target
/// extent not exceeding the device count, so the strategy is always valid
/// even when the device count does not divide an extent.
inline Strategy baseline_strategy(BaselineKind kind,
                                  const ComputationGraph &graph,
                                  const DeviceGraph &devices) {
  const i64 cap = devices.count();
  Strategy s(static_cast<size_t>(graph.layer_count()));
  for (int l = 0; l < graph.layer_count(); ++l) {
    const LayerKind &k = graph.layer(l).kind;
    const TensorShape &shape = graph.shape(l);
    bool channel_wise = false;
    switch (kind) {
    case BaselineKind::Data:
      break;
    case BaselineKind::Model:
      channel_wise = has_parameters(k);
      break;
    case BaselineKind::Owt:
      channel_wise = is_kind<FullyConnected>(k) || is_kind<Softmax>(k);
      break;
    }
    Config c;
    if (channel_wise)
      c.channel = detail::largest_divisor_up_to(shape.channel, cap);
    else
      c.sample = detail::largest_divisor_up_to(shape.sample, cap);
    s[static_cast<size_t>(l)] = c;
  }
  return s;
}

} // namespace parplan
