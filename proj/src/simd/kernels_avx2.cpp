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

// Compiled with -mavx2 -mpclmul -msse4.1; only reached through runtime dispatch.

#include <immintrin.h>

#include <algorithm>
#include <vector>

#include "smv/simd/kernels.hpp"

namespace smv::simd::avx2 {

namespace {

// Bit-reflected folding constants for the IEEE polynomial: x^(4*128+32),
// x^(4*128-32), x^(128+32), x^(128-32), x^64 and the Barrett pair (P', mu).
alignas(16) constexpr std::uint64_t kFold4[2] = {0x0154442bd4, 0x01c6e41596};
alignas(16) constexpr std::uint64_t kFold1[2] = {0x01751997d0, 0x00ccaa009e};
alignas(16) constexpr std::uint64_t kFold64[2] = {0x0163cd6124, 0x0000000000};
alignas(16) constexpr std::uint64_t kBarrett[2] = {0x01db710641, 0x01f7011641};

inline __m128i fold(__m128i acc, __m128i k, __m128i next) {
  __m128i lo = _mm_clmulepi64_si128(acc, k, 0x00);
  __m128i hi = _mm_clmulepi64_si128(acc, k, 0x11);
  return _mm_xor_si128(_mm_xor_si128(hi, lo), next);
}

// len >= 64 and len % 16 == 0.
std::uint32_t crc32_clmul_blocks(const std::uint8_t* buf, std::size_t len, std::uint32_t state) {
  __m128i x1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(buf + 0x00));
  __m128i x2 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(buf + 0x10));
  __m128i x3 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(buf + 0x20));
  __m128i x4 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(buf + 0x30));
  x1 = _mm_xor_si128(x1, _mm_cvtsi32_si128(static_cast<int>(state)));
  buf += 64;
  len -= 64;

  __m128i k = _mm_load_si128(reinterpret_cast<const __m128i*>(kFold4));
  while (len >= 64) {
    x1 = fold(x1, k, _mm_loadu_si128(reinterpret_cast<const __m128i*>(buf + 0x00)));
    x2 = fold(x2, k, _mm_loadu_si128(reinterpret_cast<const __m128i*>(buf + 0x10)));
    x3 = fold(x3, k, _mm_loadu_si128(reinterpret_cast<const __m128i*>(buf + 0x20)));
    x4 = fold(x4, k, _mm_loadu_si128(reinterpret_cast<const __m128i*>(buf + 0x30)));
    buf += 64;
    len -= 64;
  }

  k = _mm_load_si128(reinterpret_cast<const __m128i*>(kFold1));
  x1 = fold(x1, k, x2);
  x1 = fold(x1, k, x3);
  x1 = fold(x1, k, x4);
  while (len >= 16) {
    x1 = fold(x1, k, _mm_loadu_si128(reinterpret_cast<const __m128i*>(buf)));
    buf += 16;
    len -= 16;
  }

  // 128 -> 64 bits.
  const __m128i mask32 = _mm_setr_epi32(~0, 0, ~0, 0);
  __m128i x2b = _mm_clmulepi64_si128(x1, k, 0x10);
  x1 = _mm_xor_si128(_mm_srli_si128(x1, 8), x2b);
  k = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(kFold64));
  x2b = _mm_srli_si128(x1, 4);
  x1 = _mm_and_si128(x1, mask32);
  x1 = _mm_xor_si128(_mm_clmulepi64_si128(x1, k, 0x00), x2b);

  // Barrett reduction to 32 bits.
  k = _mm_load_si128(reinterpret_cast<const __m128i*>(kBarrett));
  x2b = _mm_and_si128(x1, mask32);
  x2b = _mm_clmulepi64_si128(x2b, k, 0x10);
  x2b = _mm_and_si128(x2b, mask32);
  x2b = _mm_clmulepi64_si128(x2b, k, 0x00);
  x1 = _mm_xor_si128(x1, x2b);
  return static_cast<std::uint32_t>(_mm_extract_epi32(x1, 1));
}

}  // namespace

std::uint32_t crc32_update(const std::uint8_t* data, std::size_t len, std::uint32_t state) noexcept {
  if (len < 64) return scalar::crc32_update(data, len, state);
  const std::size_t blocks = len & ~std::size_t{15};
  state = crc32_clmul_blocks(data, blocks, state);
  return scalar::crc32_update(data + blocks, len - blocks, state);
}

void fill_gradient(std::uint8_t* rgba, std::uint32_t width, std::uint32_t height, std::uint64_t seed) noexcept {
  const auto s = static_cast<std::uint32_t>(seed);
  const __m256i lane = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
  const __m256i byte = _mm256_set1_epi32(0xFF);
  const __m256i alpha = _mm256_set1_epi32(static_cast<int>(0xFF000000u));
  const __m256i s1 = _mm256_set1_epi32(static_cast<int>(s));
  const __m256i s3 = _mm256_set1_epi32(static_cast<int>(3 * s));
  for (std::uint32_t y = 0; y < height; ++y) {
    std::uint8_t* row = rgba + static_cast<std::size_t>(y) * width * 4;
    const __m256i yv = _mm256_set1_epi32(static_cast<int>(y));
    const __m256i g = _mm256_set1_epi32(static_cast<int>(((y + 2 * s) & 0xFF) << 8));
    std::uint32_t x = 0;
    for (; x + 8 <= width; x += 8) {
      __m256i xv = _mm256_add_epi32(lane, _mm256_set1_epi32(static_cast<int>(x)));
      __m256i r = _mm256_and_si256(_mm256_add_epi32(xv, s1), byte);
      __m256i b = _mm256_and_si256(_mm256_add_epi32(_mm256_xor_si256(xv, yv), s3), byte);
      __m256i px = _mm256_or_si256(_mm256_or_si256(r, g), _mm256_or_si256(_mm256_slli_epi32(b, 16), alpha));
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(row + 4 * x), px);
    }
    for (; x < width; ++x) {
      row[4 * x + 0] = static_cast<std::uint8_t>(x + s);
      row[4 * x + 1] = static_cast<std::uint8_t>(y + 2 * s);
      row[4 * x + 2] = static_cast<std::uint8_t>((x ^ y) + 3 * s);
      row[4 * x + 3] = 255;
    }
  }
}

// Vertical block sums are vectorized into a u16 row accumulator (f*255 fits
// for f <= 16); the horizontal pass reads 1/f of the data and stays scalar.
void downscale_box(const std::uint8_t* src, std::uint32_t width, std::uint32_t height, std::uint32_t factor,
                   std::uint8_t* dst) noexcept {
  const std::uint32_t ow = width / factor, oh = height / factor;
  const std::uint32_t area = factor * factor, half = area / 2;
  const std::size_t used = static_cast<std::size_t>(ow) * factor * 4;
  thread_local std::vector<std::uint16_t> acc;
  acc.assign(used, 0);
  for (std::uint32_t oy = 0; oy < oh; ++oy) {
    std::fill(acc.begin(), acc.end(), std::uint16_t{0});
    for (std::uint32_t dy = 0; dy < factor; ++dy) {
      const std::uint8_t* p = src + static_cast<std::size_t>(oy * factor + dy) * width * 4;
      std::size_t i = 0;
      for (; i + 32 <= used; i += 32) {
        __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + i));
        __m256i lo = _mm256_cvtepu8_epi16(_mm256_castsi256_si128(v));
        __m256i hi = _mm256_cvtepu8_epi16(_mm256_extracti128_si256(v, 1));
        auto* a = reinterpret_cast<__m256i*>(acc.data() + i);
        _mm256_storeu_si256(a, _mm256_add_epi16(_mm256_loadu_si256(a), lo));
        _mm256_storeu_si256(a + 1, _mm256_add_epi16(_mm256_loadu_si256(a + 1), hi));
      }
      for (; i < used; ++i) acc[i] = static_cast<std::uint16_t>(acc[i] + p[i]);
    }
    std::uint8_t* q = dst + static_cast<std::size_t>(oy) * ow * 4;
    for (std::uint32_t ox = 0; ox < ow; ++ox) {
      const std::uint16_t* a = acc.data() + static_cast<std::size_t>(ox) * factor * 4;
      std::uint32_t sum[4] = {0, 0, 0, 0};
      for (std::uint32_t dx = 0; dx < factor; ++dx)
        for (int c = 0; c < 4; ++c) sum[c] += a[dx * 4 + c];
      for (int c = 0; c < 4; ++c) q[ox * 4 + c] = static_cast<std::uint8_t>((sum[c] + half) / area);
    }
  }
}

}  // namespace smv::simd::avx2
