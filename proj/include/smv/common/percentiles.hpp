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
#include <cmath>
#include <cstdint>
#include <vector>

#include "smv/common/error.hpp"

namespace smv {

struct Percentiles {
  std::uint64_t count = 0;
  std::uint64_t p50 = 0, p95 = 0, p99 = 0;
  double mean = 0;
};

/// Nearest-rank percentile of sorted samples: the ceil(p/100 * n)-th smallest.
inline std::uint64_t nearest_rank(const std::vector<std::uint64_t>& sorted, double p) {
  if (sorted.empty()) fail(Errc::InvalidArgument, "percentile of an empty sample");
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

/// Sorts in place. Throws InvalidArgument for an empty sample.
inline Percentiles summarize(std::vector<std::uint64_t>& samples) {
  std::sort(samples.begin(), samples.end());
  Percentiles p;
  p.count = samples.size();
  p.p50 = nearest_rank(samples, 50);
  p.p95 = nearest_rank(samples, 95);
  p.p99 = nearest_rank(samples, 99);
  long double sum = 0;
  for (auto s : samples) sum += s;
  p.mean = static_cast<double>(sum / samples.size());
  return p;
}

/// Drops the first `fraction` of samples (in arrival order).
inline void drop_warmup(std::vector<std::uint64_t>& samples, double fraction) {
  const auto n = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(samples.size())));
  samples.erase(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n));
}

}  // namespace smv
