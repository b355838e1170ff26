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

#include "smv/engine/frame.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "smv/common/error.hpp"
#include "smv/simd/kernels.hpp"

namespace smv::engine {

FrameSize frame_size(FramePreset p) noexcept {
  switch (p) {
    case FramePreset::HD: return {1280, 720};
    case FramePreset::FHD: return {1920, 1080};
    case FramePreset::QHD: return {2560, 1440};
    case FramePreset::UHD4K: return {3840, 2160};
    case FramePreset::UHD8K: return {7680, 4320};
  }
  return {};
}

std::string_view to_string(FramePreset p) noexcept {
  switch (p) {
    case FramePreset::HD: return "HD";
    case FramePreset::FHD: return "FHD";
    case FramePreset::QHD: return "QHD";
    case FramePreset::UHD4K: return "4K";
    case FramePreset::UHD8K: return "8K";
  }
  return "?";
}

FramePreset preset_from_string(std::string_view s) {
  std::string up(s);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto p : kAllPresets)
    if (up == to_string(p)) return p;
  if (up == "UHD4K") return FramePreset::UHD4K;
  if (up == "UHD8K") return FramePreset::UHD8K;
  fail(Errc::InvalidArgument, "unknown resolution '" + std::string(s) + "'");
}

void Frame::seal() noexcept { crc = simd::crc32(payload); }

bool Frame::intact() const noexcept {
  return payload.size() == payload_size(width, height) && simd::crc32(payload) == crc;
}

Frame synthetic_frame(std::uint32_t width, std::uint32_t height, std::uint64_t seq, std::uint64_t capture_ns) {
  Frame f;
  f.width = width;
  f.height = height;
  f.seq = seq;
  f.capture_ns = capture_ns;
  f.payload.resize(Frame::payload_size(width, height));
  simd::fill_gradient(f.payload, width, height, seq);
  f.seal();
  return f;
}

}  // namespace smv::engine
