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

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "smv/simd/kernels.hpp"

namespace smv::simd {

namespace {

Isa probe() noexcept {
  if (const char* env = std::getenv("SMV_SIMD"); env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("pclmul") && __builtin_cpu_supports("sse4.1"))
    return Isa::Avx2;
#endif
  return Isa::Scalar;
}

Isa detected() noexcept {
  static const Isa isa = probe();
  return isa;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detected()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detected_isa() noexcept { return detected(); }

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) noexcept {
  if (isa == Isa::Avx2 && detected() != Isa::Avx2) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
}

std::uint32_t crc32(std::span<const std::uint8_t> data, std::uint32_t crc) noexcept {
  std::uint32_t state = ~crc;
  state = active_isa() == Isa::Avx2 ? avx2::crc32_update(data.data(), data.size(), state)
                                    : scalar::crc32_update(data.data(), data.size(), state);
  return ~state;
}

void fill_gradient(std::span<std::uint8_t> rgba, std::uint32_t width, std::uint32_t height,
                   std::uint64_t seed) noexcept {
  if (rgba.size() < static_cast<std::size_t>(width) * height * 4) return;
  if (active_isa() == Isa::Avx2)
    avx2::fill_gradient(rgba.data(), width, height, seed);
  else
    scalar::fill_gradient(rgba.data(), width, height, seed);
}

void downscale_box(std::span<const std::uint8_t> src, std::uint32_t width, std::uint32_t height,
                   std::uint32_t factor, std::span<std::uint8_t> dst) noexcept {
  if (factor == 0 || factor > 16) return;
  if (src.size() < static_cast<std::size_t>(width) * height * 4) return;
  if (dst.size() < static_cast<std::size_t>(width / factor) * (height / factor) * 4) return;
  if (active_isa() == Isa::Avx2)
    avx2::downscale_box(src.data(), width, height, factor, dst.data());
  else
    scalar::downscale_box(src.data(), width, height, factor, dst.data());
}

}  // namespace smv::simd
