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

#include "smv/engine/renderer.hpp"

#include <cmath>

#include "smv/common/error.hpp"

namespace smv::engine {

namespace {

struct Rgba {
  std::uint8_t r, g, b, a;
};

constexpr Rgba kBackground{24, 24, 24, 255};
constexpr Rgba kColumn{0, 200, 255, 255};

void put(Frame& f, std::uint64_t x, std::uint64_t y, Rgba c) {
  if (x >= f.width || y >= f.height) return;
  auto* p = f.payload.data() + (y * f.width + x) * kBytesPerPixel;
  p[0] = c.r;
  p[1] = c.g;
  p[2] = c.b;
  p[3] = c.a;
}

void fill_rect(Frame& f, std::uint64_t x0, std::uint64_t y0, std::uint32_t w, std::uint32_t h, Rgba c) {
  for (std::uint64_t y = y0; y < y0 + h && y < f.height; ++y)
    for (std::uint64_t x = x0; x < x0 + w && x < f.width; ++x) put(f, x, y, c);
}

}  // namespace

void render_in_place(Frame& frame, const OverlaySpec& overlay, const TwinView& view) {
  if (frame.payload.size() != Frame::payload_size(frame.width, frame.height))
    fail(Errc::InvalidArgument, "frame payload does not match its dimensions");
  // Validate everything first so a failure leaves the frame untouched.
  for (const auto& s : overlay.series) {
    auto a = overlay.spatial.find(s.asset);
    if (a == overlay.spatial.end()) fail(Errc::AnchorOutOfBounds, "no anchor for " + s.asset.str());
    if (a->second.x >= frame.width || a->second.y >= frame.height)
      fail(Errc::AnchorOutOfBounds, s.asset.str() + " anchored at (" + std::to_string(a->second.x) + ", " +
                                        std::to_string(a->second.y) + ")");
    auto v = view.series.find(s);
    bool any = false;
    if (v != view.series.end())
      for (double x : v->second) any = any || std::isfinite(x);
    if (!any) fail(Errc::MissingSeries, s.asset.str() + "/" + s.variable);
  }

  std::map<AssetId, std::uint32_t> row;
  for (const auto& s : overlay.series) {
    const Anchor at = overlay.spatial.at(s.asset);
    const std::uint64_t y0 = at.y + std::uint64_t{kSparkPitch} * row[s.asset]++;

    std::vector<double> vals;
    for (double x : view.series.at(s))
      if (std::isfinite(x)) vals.push_back(x);
    if (vals.size() > kSparkWidth) vals.erase(vals.begin(), vals.end() - kSparkWidth);
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    const double min = *lo, max = *hi;

    fill_rect(frame, at.x, y0, kSparkWidth, kSparkHeight, kBackground);
    const std::uint64_t x0 = at.x + (kSparkWidth - vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const std::uint32_t h =
          max == min ? kSparkHeight / 2
                     : 1 + static_cast<std::uint32_t>(std::lround((vals[i] - min) / (max - min) * (kSparkHeight - 1)));
      for (std::uint32_t k = 0; k < h; ++k) put(frame, x0 + i, y0 + kSparkHeight - 1 - k, kColumn);
    }

    auto snap = view.latest.find(s.asset);
    if (snap == view.latest.end()) continue;
    auto lv = snap->second.find(s.variable);
    double v;
    if (lv == snap->second.end() || !otbus::as_number(lv->second.value, v) || !std::isfinite(v)) continue;
    std::uint8_t r = 128;
    if (max != min) r = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp((v - min) / (max - min), 0.0, 1.0)));
    fill_rect(frame, at.x + std::uint64_t{kLatestOffsetX}, y0, kLatestSize, kLatestSize, Rgba{r, 0, 0, 255});
  }
  if (!overlay.series.empty()) frame.seal();
}

Frame render_frame(const Frame& base, const OverlaySpec& overlay, const TwinView& view) {
  Frame out = base;
  render_in_place(out, overlay, view);
  return out;
}

TwinView capture_view(const twin::TwinStore& store, const OverlaySpec& overlay, std::uint64_t from_ns,
                      std::uint64_t to_ns) {
  TwinView view;
  for (const auto& s : overlay.series) {
    twin::SeriesResult r;
    try {
      r = store.query_series(s.asset, s.variable, from_ns, to_ns, s.resolution);
    } catch (const Error& e) {
      if (e.code() == Errc::UnknownVariable) fail(Errc::MissingSeries, s.asset.str() + "/" + s.variable);
      throw;
    }
    auto& vals = view.series[s];
    for (const auto& p : r.raw) vals.push_back(p.value);
    for (const auto& b : r.buckets) vals.push_back(b.mean());
    if (!view.latest.contains(s.asset)) view.latest[s.asset] = store.query_latest(s.asset);
  }
  return view;
}

}  // namespace smv::engine
