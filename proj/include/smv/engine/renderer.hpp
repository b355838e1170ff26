// Copyright 2026 The smv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <vector>

#include "smv/engine/frame.hpp"
#include "smv/twin/twin_store.hpp"

namespace smv::engine {

struct SeriesRef {
  AssetId asset;
  std::string variable;
  twin::Resolution resolution = twin::Resolution::R1s;

  friend auto operator<=>(const SeriesRef&, const SeriesRef&) = default;
};

struct Anchor {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
};

struct OverlaySpec {
  std::vector<SeriesRef> series;
  /// Pixel anchor per asset; every asset in `series` needs one.
  std::map<AssetId, Anchor> spatial;
};

/// What the renderer draws from: series values (bucket means, or raw values
/// for Raw) oldest first, and latest snapshots.
struct TwinView {
  std::map<SeriesRef, std::vector<double>> series;
  std::map<AssetId, twin::LatestSnapshot> latest;
};

inline constexpr std::uint32_t kSparkWidth = 64;
inline constexpr std::uint32_t kSparkHeight = 32;
/// Vertical distance between stacked sparklines of one asset.
inline constexpr std::uint32_t kSparkPitch = 34;
inline constexpr std::uint32_t kLatestSize = 8;
/// Latest-value block sits right of its sparkline.
inline constexpr std::uint32_t kLatestOffsetX = 66;

/// Draws the overlay onto a copy of `base`.
///
/// The i-th series of an asset gets a 64x32 block at anchor + (0, 34*i):
/// background (24,24,24,255); for the last <= 64 finite values, right-aligned,
/// a one-pixel column of height 1 + round(31 * (v - min) / (max - min)) in
/// (0,200,255,255), min/max taken over the drawn values (constant series: 16).
/// If the asset's latest snapshot holds a numeric value for the variable, an
/// 8x8 block at anchor + (66, 34*i) gets R = round(255 * clamp((v - min) /
/// (max - min))) (128 for a constant window), G = B = 0, A = 255.
/// Blocks are clipped at the frame edge. seq and capture time are copied, the
/// crc recomputed; an empty spec reproduces the base payload.
///
/// Throws AnchorOutOfBounds (anchor missing or outside the frame) and
/// MissingSeries (series absent or without finite values).
Frame render_frame(const Frame& base, const OverlaySpec& overlay, const TwinView& view);
/// In-place variant; avoids copying the payload.
void render_in_place(Frame& frame, const OverlaySpec& overlay, const TwinView& view);

/// Queries everything `overlay` needs from the store over [from, to).
/// Throws like TwinStore::query_series; missing variables become MissingSeries.
TwinView capture_view(const twin::TwinStore& store, const OverlaySpec& overlay, std::uint64_t from_ns,
                      std::uint64_t to_ns);

}  // namespace smv::engine
