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

#include "smv/otbus/asset_id.hpp"

#include "smv/common/error.hpp"

namespace smv {

AssetId::AssetId(std::string enterprise, std::string site, std::string area, std::string cell, std::string machine)
    : seg_{std::move(enterprise), std::move(site), std::move(area), std::move(cell), std::move(machine)} {
  for (const auto& s : seg_)
    if (!valid_segment(s)) fail(Errc::InvalidArgument, "invalid asset id segment '" + s + "'");
}

bool AssetId::valid_segment(std::string_view seg) noexcept {
  if (seg.empty()) return false;
  for (char c : seg) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

AssetId AssetId::parse(std::string_view text) {
  std::array<std::string, kLevels> parts;
  std::size_t level = 0, start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '.') {
      if (level == kLevels) fail(Errc::InvalidArgument, "asset id has more than 5 segments: " + std::string(text));
      parts[level++] = std::string(text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (level != kLevels) fail(Errc::InvalidArgument, "asset id needs 5 segments: " + std::string(text));
  return AssetId(std::move(parts[0]), std::move(parts[1]), std::move(parts[2]), std::move(parts[3]),
                 std::move(parts[4]));
}

std::string AssetId::str() const {
  std::string out;
  for (std::size_t i = 0; i < kLevels; ++i) {
    if (i) out += '.';
    out += seg_[i];
  }
  return out;
}

}  // namespace smv
