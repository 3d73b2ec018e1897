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

#include <array>
#include <tuple>
#include <vector>

namespace parplan {

// ---------------------------------------------------------------------------
// Parallelization configs
// ---------------------------------------------------------------------------

/// Degrees of parallelism per tensor dimension. A degree of 1 leaves a
/// dimension unsplit; total() partitions land on total() distinct devices.
struct Config {
  i64 sample = 1;
  i64 channel = 1;
  i64 height = 1;
  i64 width = 1;

  constexpr i64 degree(Dim d) const {
    switch (d) {
    case Dim::Sample:
      return sample;
    case Dim::Channel:
      return channel;
    case Dim::Height:
      return height;
    default:
      return width;
    }
  }
  constexpr i64 &degree(Dim d) {
    switch (d) {
    case Dim::Sample:
      return sample;
    case Dim::Channel:
      return channel;
    case Dim::Height:
      return height;
    default:
      return width;
    }
  }

  constexpr i64 total() const { return sample * channel * height * width; }

  friend constexpr bool operator==(const Config &, const Config &) = default;
  friend constexpr bool operator<(const Config &a, const Config &b) {
    return std::tie(a.sample, a.channel, a.height, a.width) <
           std::tie(b.sample, b.channel, b.height, b.width);
  }
};

inline std::string to_string(const Config &c) {
  return "{n=" + std::to_string(c.sample) + ", c=" + std::to_string(c.channel) +
         ", h=" + std::to_string(c.height) + ", w=" + std::to_string(c.width) +
         "}";
}

/// One config per layer, indexed by layer position in the graph.
using Strategy = std::vector<Config>;

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

/// Half-open 4-d box [lo, hi) over (sample, channel, height, width).
struct Region {
  std::array<i64, kDimCount> lo{{0, 0, 0, 0}};
  std::array<i64, kDimCount> hi{{0, 0, 0, 0}};

  i64 length(Dim d) const {
    auto i = static_cast<size_t>(d);
    return hi[i] > lo[i] ? hi[i] - lo[i] : 0;
  }
  i64 volume() const {
    i64 v = 1;
    for (Dim d : kAllDims)
      v *= length(d);
    return v;
  }
  bool empty() const { return volume() == 0; }

  friend bool operator==(const Region &, const Region &) = default;
};

inline Region full_region(const TensorShape &s) {
  Region r;
  for (Dim d : kAllDims)
    r.hi[static_cast<size_t>(d)] = s.extent(d);
  return r;
}

inline Region intersect(const Region &a, const Region &b) {
  Region r;
  for (size_t i = 0; i < kDimCount; ++i) {
    r.lo[i] = std::max(a.lo[i], b.lo[i]);
    r.hi[i] = std::min(a.hi[i], b.hi[i]);
    if (r.hi[i] < r.lo[i])
      r.hi[i] = r.lo[i];
  }
  return r;
}

inline std::string to_string(const Region &r) {
  std::string s = "[";
  for (size_t i = 0; i < kDimCount; ++i) {
    if (i)
      s += " x ";
    s += "[" + std::to_string(r.lo[i]) + "," + std::to_string(r.hi[i]) + ")";
  }
  return s + "]";
}

// ---------------------------------------------------------------------------
// Parallelizable dimensions and config enumeration
// ---------------------------------------------------------------------------

/// The dimensions a layer's output may be split along. Convolution and
/// pooling split along any of the four; dense and softmax layers only along
/// sample and channel; structural layers (input, flatten, concat) along any
/// dimension that actually has extent to split.
inline std::array<bool, kDimCount> parallelizable_dims(const LayerKind &kind,
                                                       const TensorShape &shape) {
  std::array<bool, kDimCount> dims{{false, false, false, false}};
  auto set = [&](Dim d) { dims[static_cast<size_t>(d)] = true; };
  if (is_kind<Conv2D>(kind) || is_kind<Pool2D>(kind)) {
    for (Dim d : kAllDims)
      set(d);
  } else if (is_kind<FullyConnected>(kind) || is_kind<Softmax>(kind)) {
    set(Dim::Sample);
    set(Dim::Channel);
  } else {
    for (Dim d : kAllDims)
      if (shape.extent(d) > 1)
        set(d);
  }
  return dims;
}

namespace detail {

inline std::vector<i64> divisors_up_to(i64 n, i64 cap) {
  std::vector<i64> ds;
  for (i64 d = 1; d <= std::min(n, cap); ++d)
    if (n % d == 0)
      ds.push_back(d);
  return ds;
}

} // namespace detail

/// All configs whose degrees divide the output extents, are 1 on
/// non-parallelizable dimensions, and multiply to at most device_count.
/// Ordered lexicographically by (sample, channel, height, width), so index 0
/// is always the all-ones config.
inline std::vector<Config> enumerate_configs(const LayerKind &kind,
                                             const TensorShape &shape,
                                             int device_count) {
  if (device_count < 1)
    throw InputError("enumerate_configs: need at least one device");
  const auto dims = parallelizable_dims(kind, shape);
  const i64 cap = device_count;
  std::array<std::vector<i64>, kDimCount> choices;
  for (Dim d : kAllDims) {
    auto i = static_cast<size_t>(d);
    choices[i] = dims[i] ? detail::divisors_up_to(shape.extent(d), cap)
                         : std::vector<i64>{1};
  }
  std::vector<Config> out;
  for (i64 n : choices[0]) {
    for (i64 c : choices[1]) {
      if (n * c > cap)
        break;
      for (i64 h : choices[2]) {
        if (n * c * h > cap)
          break;
        for (i64 w : choices[3]) {
          if (n * c * h * w > cap)
            break;
          out.push_back({n, c, h, w});
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partition geometry
// ---------------------------------------------------------------------------

/// The output block computed by one partition. Partition indices decompose
/// row-major over (sample, channel, height, width) degrees; every dimension
/// is split into equal contiguous pieces.
inline Region owned_region(const TensorShape &shape, const Config &config,
                           i64 part_index) {
  if (part_index < 0 || part_index >= config.total())
    throw InputError("owned_region: partition index " +
                     std::to_string(part_index) + " out of range for " +
                     std::to_string(config.total()) + " partitions");
  Region r;
  i64 rest = part_index;
  for (auto it = std::rbegin(kAllDims); it != std::rend(kAllDims); ++it) {
    Dim d = *it;
    auto i = static_cast<size_t>(d);
    i64 deg = config.degree(d);
    i64 idx = rest % deg;
    rest /= deg;
    i64 piece = shape.extent(d) / deg;
    r.lo[i] = idx * piece;
    r.hi[i] = r.lo[i] + piece;
  }
  return r;
}

namespace detail {

inline void map_spatial_window(Region &req, const Region &owned, Dim d,
                               i64 kernel, i64 stride, i64 pad, i64 in_extent) {
  auto i = static_cast<size_t>(d);
  i64 lo = owned.lo[i] * stride - pad;
  i64 hi = (owned.hi[i] - 1) * stride - pad + kernel;
  req.lo[i] = std::max<i64>(0, lo);
  req.hi[i] = std::min<i64>(in_extent, hi);
  if (req.hi[i] < req.lo[i])
    req.hi[i] = req.lo[i];
}

/// Bounding box in (channel, height, width) of a contiguous range of
/// flattened indices [flat_lo, flat_hi), where flat = (c*H + h)*W + w.
inline void flat_range_box(Region &req, i64 flat_lo, i64 flat_hi, i64 H,
                           i64 W) {
  const i64 plane = H * W;
  const i64 c_lo = flat_lo / plane, c_hi = (flat_hi - 1) / plane;
  req.lo[static_cast<size_t>(Dim::Channel)] = c_lo;
  req.hi[static_cast<size_t>(Dim::Channel)] = c_hi + 1;
  if (c_lo != c_hi) {
    // Spans several channel planes: the box must cover whole planes.
    req.lo[static_cast<size_t>(Dim::Height)] = 0;
    req.hi[static_cast<size_t>(Dim::Height)] = H;
    req.lo[static_cast<size_t>(Dim::Width)] = 0;
    req.hi[static_cast<size_t>(Dim::Width)] = W;
    return;
  }
  const i64 row_lo = (flat_lo % plane) / W, row_hi = ((flat_hi - 1) % plane) / W;
  req.lo[static_cast<size_t>(Dim::Height)] = row_lo;
  req.hi[static_cast<size_t>(Dim::Height)] = row_hi + 1;
  if (row_lo != row_hi) {
    req.lo[static_cast<size_t>(Dim::Width)] = 0;
    req.hi[static_cast<size_t>(Dim::Width)] = W;
    return;
  }
  req.lo[static_cast<size_t>(Dim::Width)] = flat_lo % W;
  req.hi[static_cast<size_t>(Dim::Width)] = (flat_hi - 1) % W + 1;
}

} // namespace detail

/// The input block a destination partition must read over a given edge,
/// expressed in the source tensor's coordinates. Convolution and pooling map
/// spatial spans through their windows (with halos); convolution reads the
/// full input channel range while pooling is channel-wise. Dense layers read
/// the entire feature volume of their sample span. Concat maps the owned
/// region back into the branch band this edge feeds (possibly empty).
inline Region required_input_region(const ComputationGraph &graph,
                                    const Edge &edge, const Config &dst_config,
                                    i64 part_index) {
  const Layer &dst = graph.layer(edge.dst);
  const TensorShape &out_shape = graph.shape(edge.dst);
  const TensorShape &in_shape = graph.edge_shape(edge);
  const Region owned = owned_region(out_shape, dst_config, part_index);
  const auto S = static_cast<size_t>(Dim::Sample);
  const auto C = static_cast<size_t>(Dim::Channel);

  Region req;
  req.lo[S] = owned.lo[S];
  req.hi[S] = owned.hi[S];

  if (const auto *conv = std::get_if<Conv2D>(&dst.kind)) {
    req.lo[C] = 0;
    req.hi[C] = in_shape.channel;
    detail::map_spatial_window(req, owned, Dim::Height, conv->kernel_h,
                               conv->stride_h, conv->pad_h, in_shape.height);
    detail::map_spatial_window(req, owned, Dim::Width, conv->kernel_w,
                               conv->stride_w, conv->pad_w, in_shape.width);
    return req;
  }
  if (const auto *pl = std::get_if<Pool2D>(&dst.kind)) {
    req.lo[C] = owned.lo[C];
    req.hi[C] = owned.hi[C];
    detail::map_spatial_window(req, owned, Dim::Height, pl->kernel_h,
                               pl->stride_h, pl->pad_h, in_shape.height);
    detail::map_spatial_window(req, owned, Dim::Width, pl->kernel_w,
                               pl->stride_w, pl->pad_w, in_shape.width);
    return req;
  }
  if (is_kind<FullyConnected>(dst.kind)) {
    req.lo[C] = 0;
    req.hi[C] = in_shape.channel;
    req.lo[static_cast<size_t>(Dim::Height)] = 0;
    req.hi[static_cast<size_t>(Dim::Height)] = in_shape.height;
    req.lo[static_cast<size_t>(Dim::Width)] = 0;
    req.hi[static_cast<size_t>(Dim::Width)] = in_shape.width;
    return req;
  }
  if (is_kind<Flatten>(dst.kind)) {
    detail::flat_range_box(req, owned.lo[C], owned.hi[C], in_shape.height,
                           in_shape.width);
    return req;
  }
  if (const auto *cat = std::get_if<Concat>(&dst.kind)) {
    const auto A = static_cast<size_t>(cat->axis);
    i64 offset = 0;
    for (int eid : graph.in_edges(edge.dst)) {
      const Edge &sibling = graph.edge(eid);
      if (sibling.dst_input_pos == edge.dst_input_pos)
        break;
      offset += graph.edge_shape(sibling).extent(cat->axis);
    }
    Region band = owned;
    band.lo[A] = std::max(owned.lo[A], offset);
    band.hi[A] = std::min(owned.hi[A], offset + in_shape.extent(cat->axis));
    if (band.hi[A] < band.lo[A])
      band.hi[A] = band.lo[A];
    band.lo[A] -= offset;
    band.hi[A] -= offset;
    return band;
  }
  if (is_kind<Softmax>(dst.kind))
    return owned;
  throw InputError("layer '" + dst.id + "' does not consume inputs");
}

// ---------------------------------------------------------------------------
// Placement
// ---------------------------------------------------------------------------

/// Canonical device placement: partition i runs on device i. Keeping the map
/// fixed makes strategy costs a pure function of the configs.
struct Placement {
  i64 partition_count = 0;
  int device(i64 part_index) const { return static_cast<int>(part_index); }
};

inline Placement place(const Config &config, const DeviceGraph &devices) {
  if (config.total() > devices.count())
    throw InputError("config " + to_string(config) + " needs " +
                     std::to_string(config.total()) + " devices, only " +
                     std::to_string(devices.count()) + " available");
  return Placement{config.total()};
}

} // namespace parplan
