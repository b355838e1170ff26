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

#include <cstdint>
#include <string_view>

#include "smv/common/bytes.hpp"

namespace smv::engine {

inline constexpr std::uint32_t kBytesPerPixel = 4;  // RGBA8

enum class FramePreset : std::uint8_t { HD, FHD, QHD, UHD4K, UHD8K };

inline constexpr FramePreset kAllPresets[] = {FramePreset::HD, FramePreset::FHD, FramePreset::QHD,
                                              FramePreset::UHD4K, FramePreset::UHD8K};

struct FrameSize {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

/// HD 1280x720, FHD 1920x1080, QHD 2560x1440, 4K 3840x2160, 8K 7680x4320.
FrameSize frame_size(FramePreset p) noexcept;
/// "HD", "FHD", "QHD", "4K", "8K".
std::string_view to_string(FramePreset p) noexcept;
/// Case-insensitive; accepts the to_string names and "uhd4k"/"uhd8k". Throws InvalidArgument.
FramePreset preset_from_string(std::string_view s);

/// One raw RGBA8 image. `crc` covers the payload only, so seq and
/// capture_ns may be restamped without resealing.
struct Frame {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint64_t seq = 0;
  /// Monotonic clock (mono_now_ns) at capture.
  std::uint64_t capture_ns = 0;
  std::uint32_t crc = 0;
  Bytes payload;

  static std::size_t payload_size(std::uint32_t w, std::uint32_t h) noexcept {
    return std::size_t{w} * h * kBytesPerPixel;
  }

  void seal() noexcept;
  /// Payload length matches the dimensions and the crc matches the payload.
  bool intact() const noexcept;
};

/// Deterministic test pattern: the gradient seeded by `seq`, sealed.
Frame synthetic_frame(std::uint32_t width, std::uint32_t height, std::uint64_t seq, std::uint64_t capture_ns = 0);

}  // namespace smv::engine
