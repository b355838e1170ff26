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

#include <algorithm>
#include <cstdint>
#include <limits>

#include "smv/common/exact_sum.hpp"

namespace smv::twin {

struct RawPoint {
  std::uint64_t ts_ns = 0;
  double value = 0;

  friend bool operator==(const RawPoint&, const RawPoint&) = default;
};

/// One tumbling bucket. The sum is kept exactly so that merging children
/// gives bit-for-bit the same bucket as ingesting their points directly.
struct RollupBucket {
  std::uint64_t start_ns = 0;
  std::uint64_t count = 0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  ExactSum sum;

  void add(double v) {
    ++count;
    min = std::min(min, v);
    max = std::max(max, v);
    sum.add(v);
  }

  /// Start is left alone; the caller decides which bucket absorbs which.
  void merge(const RollupBucket& o) {
    count += o.count;
    min = std::min(min, o.min);
    max = std::max(max, o.max);
    sum.merge(o.sum);
  }

  /// Correctly rounded sum divided by count.
  double mean() const noexcept { return count ? sum.value() / static_cast<double>(count) : 0.0; }
};

inline std::uint64_t bucket_start(std::uint64_t ts_ns, std::uint64_t width_ns) noexcept {
  return ts_ns - ts_ns % width_ns;
}

}  // namespace smv::twin
