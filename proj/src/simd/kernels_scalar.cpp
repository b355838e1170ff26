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

#include <array>
#include <cstring>
#include <vector>

#include "smv/simd/kernels.hpp"

namespace smv::simd::scalar {

namespace {

constexpr std::uint32_t kPoly = 0xEDB88320u;

constexpr std::array<std::array<std::uint32_t, 256>, 8> make_tables() {
  std::array<std::array<std::uint32_t, 256>, 8> t{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? (c >> 1) ^ kPoly : c >> 1;
    t[0][i] = c;
  }
  for (std::uint32_t i = 0; i < 256; ++i)
    for (std::size_t s = 1; s < 8; ++s) t[s][i] = (t[s - 1][i] >> 8) ^ t[0][t[s - 1][i] & 0xFF];
  return t;
}

constexpr auto kTables = make_tables();

}  // namespace

// Slicing-by-8 over the pre-inverted state.
std::uint32_t crc32_update(const std::uint8_t* p, std::size_t len, std::uint32_t c) noexcept {
  while (len >= 8) {
    std::uint32_t lo, hi;
    std::memcpy(&lo, p, 4);
    std::memcpy(&hi, p + 4, 4);
    lo ^= c;
    c = kTables[7][lo & 0xFF] ^ kTables[6][(lo >> 8) & 0xFF] ^ kTables[5][(lo >> 16) & 0xFF] ^ kTables[4][lo >> 24] ^
        kTables[3][hi & 0xFF] ^ kTables[2][(hi >> 8) & 0xFF] ^ kTables[1][(hi >> 16) & 0xFF] ^ kTables[0][hi >> 24];
    p += 8;
    len -= 8;
  }
  while (len--) c = (c >> 8) ^ kTables[0][(c ^ *p++) & 0xFF];
  return c;
}

void fill_gradient(std::uint8_t* rgba, std::uint32_t width, std::uint32_t height, std::uint64_t seed) noexcept {
  const auto s = static_cast<std::uint32_t>(seed);
  for (std::uint32_t y = 0; y < height; ++y) {
    std::uint8_t* row = rgba + static_cast<std::size_t>(y) * width * 4;
    for (std::uint32_t x = 0; x < width; ++x) {
      row[4 * x + 0] = static_cast<std::uint8_t>(x + s);
      row[4 * x + 1] = static_cast<std::uint8_t>(y + 2 * s);
      row[4 * x + 2] = static_cast<std::uint8_t>((x ^ y) + 3 * s);
      row[4 * x + 3] = 255;
    }
  }
}

void downscale_box(const std::uint8_t* src, std::uint32_t width, std::uint32_t height, std::uint32_t factor,
                   std::uint8_t* dst) noexcept {
  const std::uint32_t ow = width / factor, oh = height / factor;
  const std::uint32_t area = factor * factor, half = area / 2;
  for (std::uint32_t oy = 0; oy < oh; ++oy) {
    for (std::uint32_t ox = 0; ox < ow; ++ox) {
      std::uint32_t acc[4] = {0, 0, 0, 0};
      for (std::uint32_t dy = 0; dy < factor; ++dy) {
        const std::uint8_t* p = src + (static_cast<std::size_t>(oy * factor + dy) * width + ox * factor) * 4;
        for (std::uint32_t dx = 0; dx < factor; ++dx)
          for (int c = 0; c < 4; ++c) acc[c] += p[dx * 4 + c];
      }
      std::uint8_t* q = dst + (static_cast<std::size_t>(oy) * ow + ox) * 4;
      for (int c = 0; c < 4; ++c) q[c] = static_cast<std::uint8_t>((acc[c] + half) / area);
    }
  }
}

}  // namespace smv::simd::scalar
