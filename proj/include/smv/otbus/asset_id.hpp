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

#include <array>
#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace smv {

/// Hierarchical equipment identifier: enterprise.site.area.cell.machine.
/// Every segment matches [A-Za-z0-9_-]+.
class AssetId {
 public:
  static constexpr std::size_t kLevels = 5;

  AssetId() = default;
  AssetId(std::string enterprise, std::string site, std::string area, std::string cell, std::string machine);

  /// Parses the dotted canonical form. Throws InvalidArgument.
  static AssetId parse(std::string_view text);
  static bool valid_segment(std::string_view seg) noexcept;

  const std::string& enterprise() const noexcept { return seg_[0]; }
  const std::string& site() const noexcept { return seg_[1]; }
  const std::string& area() const noexcept { return seg_[2]; }
  const std::string& cell() const noexcept { return seg_[3]; }
  const std::string& machine() const noexcept { return seg_[4]; }
  const std::array<std::string, kLevels>& segments() const noexcept { return seg_; }

  /// Canonical text form; parse(str()) == *this.
  std::string str() const;

  friend auto operator<=>(const AssetId&, const AssetId&) = default;
  friend bool operator==(const AssetId&, const AssetId&) = default;

 private:
  std::array<std::string, kLevels> seg_;
};

}  // namespace smv

template <>
struct std::hash<smv::AssetId> {
  std::size_t operator()(const smv::AssetId& a) const noexcept { return std::hash<std::string>{}(a.str()); }
};
