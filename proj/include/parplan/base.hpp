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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace parplan {

using i64 = std::int64_t;
using u64 = std::uint64_t;

/// Modeled-device defaults used by `DeviceGraph::uniform` and the CLI's
/// `--devices N` shorthand: a 10 Tflop/s accelerator on a 100 Gb/s fabric.
inline constexpr double kDefaultComputeRate = 1e13;  // flop/s
inline constexpr double kDefaultBandwidth = 1.25e10; // bytes/s

inline constexpr int kDefaultFinalGraphBound = 8;
inline constexpr u64 kDefaultBruteForceBudget = 10'000'000;

/// Tensors and parameters are float32 throughout.
inline constexpr double kBytesPerElement = 4.0;

/// Malformed or inconsistent user input (files, flags, strategies).
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A configured search limit was exceeded (final-graph bound, brute-force
/// strategy budget).
class LimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The four tensor dimensions, in the fixed order used everywhere a
/// dimension order matters (partition-index decomposition, serialization).
enum class Dim : int { Sample = 0, Channel = 1, Height = 2, Width = 3 };

inline constexpr int kDimCount = 4;

inline constexpr Dim kAllDims[kDimCount] = {Dim::Sample, Dim::Channel,
                                            Dim::Height, Dim::Width};

inline const char *dim_name(Dim d) {
  switch (d) {
  case Dim::Sample:
    return "sample";
  case Dim::Channel:
    return "channel";
  case Dim::Height:
    return "height";
  case Dim::Width:
    return "width";
  }
  return "?";
}

/// Shape of a 4-d activation tensor. Tensors produced by fully-connected
/// layers use height = width = 1.
struct TensorShape {
  i64 sample = 1;
  i64 channel = 1;
  i64 height = 1;
  i64 width = 1;

  constexpr i64 extent(Dim d) const {
    switch (d) {
    case Dim::Sample:
      return sample;
    case Dim::Channel:
      return channel;
    case Dim::Height:
      return height;
    case Dim::Width:
      return width;
    }
    return 0;
  }

  constexpr i64 &extent(Dim d) {
    switch (d) {
    case Dim::Channel:
      return channel;
    case Dim::Height:
      return height;
    case Dim::Width:
      return width;
    default:
      return sample;
    }
  }

  constexpr i64 volume() const { return sample * channel * height * width; }

  friend bool operator==(const TensorShape &, const TensorShape &) = default;
};

inline std::string to_string(const TensorShape &s) {
  return "(" + std::to_string(s.sample) + ", " + std::to_string(s.channel) +
         ", " + std::to_string(s.height) + ", " + std::to_string(s.width) +
         ")";
}

} // namespace parplan
