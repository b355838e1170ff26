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

// Data-parallel inner loops of the frame pipeline. Each kernel has a scalar
// reference and a vector variant; the public entry points dispatch at
// runtime to the best variant the CPU supports. Variants must agree
// bit-for-bit, which the kernel tests enforce.

#include <cstdint>
#include <span>
#include <string_view>

namespace smv::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Best ISA supported by this CPU, unless SMV_SIMD=scalar is set.
Isa detected_isa() noexcept;
/// ISA currently used by the dispatching entry points.
Isa active_isa() noexcept;
/// Overrides dispatch; requests for an unsupported ISA fall back to Scalar.
void force_isa(Isa isa) noexcept;

/// CRC-32 (IEEE 802.3, reflected, as in zlib). `crc` chains a previous result.
std::uint32_t crc32(std::span<const std::uint8_t> data, std::uint32_t crc = 0) noexcept;

/// Writes a w*h RGBA8 gradient seeded by `seed` into `rgba` (size w*h*4).
/// Pixel (x, y): R=(x+seed), G=(y+2*seed), B=((x^y)+3*seed), all mod 256; A=255.
void fill_gradient(std::span<std::uint8_t> rgba, std::uint32_t width, std::uint32_t height,
                   std::uint64_t seed) noexcept;

/// Box-filters an RGBA8 image by an integer factor (1..16). Output is
/// (width/factor) x (height/factor); each channel is the rounded mean
/// (sum + f*f/2) / (f*f) of its f*f source block. Trailing rows/columns
/// that do not fill a block are ignored.
void downscale_box(std::span<const std::uint8_t> src, std::uint32_t width, std::uint32_t height,
                   std::uint32_t factor, std::span<std::uint8_t> dst) noexcept;

namespace scalar {
std::uint32_t crc32_update(const std::uint8_t* data, std::size_t len, std::uint32_t state) noexcept;
void fill_gradient(std::uint8_t* rgba, std::uint32_t width, std::uint32_t height, std::uint64_t seed) noexcept;
void downscale_box(const std::uint8_t* src, std::uint32_t width, std::uint32_t height, std::uint32_t factor,
                   std::uint8_t* dst) noexcept;
}  // namespace scalar

namespace avx2 {
// Requires SSE4.1 + PCLMULQDQ. `state` is the pre-inverted running CRC.
std::uint32_t crc32_update(const std::uint8_t* data, std::size_t len, std::uint32_t state) noexcept;
void fill_gradient(std::uint8_t* rgba, std::uint32_t width, std::uint32_t height, std::uint64_t seed) noexcept;
void downscale_box(const std::uint8_t* src, std::uint32_t width, std::uint32_t height, std::uint32_t factor,
                   std::uint8_t* dst) noexcept;
}  // namespace avx2

}  // namespace smv::simd
