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

#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "smv/otbus/asset_id.hpp"

namespace smv::twin {

/// Either one asset ("acme.bo.a1.c1.m1") or a hierarchy prefix ending in
/// ".*" ("acme.bo.*") covering every asset below it.
class AssetPattern {
 public:
  /// Throws InvalidArgument.
  static AssetPattern parse(std::string_view text);
  static AssetPattern exact(const AssetId& id);

  bool matches(const AssetId& id) const noexcept;
  /// Everything `o` matches is matched by this pattern.
  bool covers(const AssetPattern& o) const noexcept;
  bool is_prefix() const noexcept { return segments_.size() < AssetId::kLevels; }
  std::string str() const;

  friend auto operator<=>(const AssetPattern&, const AssetPattern&) = default;

 private:
  std::vector<std::string> segments_;
};

struct StaticBinding {
  AssetId asset;
  std::string topic;
  std::uint16_t publisher_id = 0;
  std::uint16_t writer_id = 0;

  friend bool operator==(const StaticBinding&, const StaticBinding&) = default;
};

enum class View : std::uint8_t { Latest, Series, Video, Topology };
/// Ordered finest to coarsest.
enum class Resolution : std::uint8_t { Raw = 0, R1s = 1, R10s = 2, R60s = 3 };

std::string_view to_string(View v) noexcept;
std::string_view to_string(Resolution r) noexcept;
/// Accepts "Raw", "R1s", "R10s", "R60s" (also "raw", "1s", "10s", "60s"). Throws InvalidArgument.
Resolution resolution_from_string(std::string_view s);
View view_from_string(std::string_view s);
/// Bucket width; 0 for Raw.
std::uint64_t resolution_ns(Resolution r) noexcept;

struct AppBinding {
  std::string app_id;
  std::vector<AssetPattern> assets;
  std::set<View> views;
  Resolution max_resolution = Resolution::R1s;
};

/// Static bindings (source -> asset -> topic), the asset registry and the
/// per-application access scopes. Safe for concurrent readers.
class MetadataRepository {
 public:
  /// Throws InvalidArgument when (publisherId, writerId) is already bound or
  /// the asset is already bound to a different topic.
  void add_static(const StaticBinding& b);
  /// Registers an asset without a data source (e.g. for prefix expansion).
  void register_asset(const AssetId& id);
  /// Throws InvalidArgument for an empty asset list or empty app id.
  void add_app(AppBinding app);

  /// Throws UnknownBinding.
  std::string resolve_topic(const AssetId& id) const;
  std::optional<StaticBinding> resolve_source(std::uint16_t publisher_id, std::uint16_t writer_id) const;
  /// Prefix patterns expanded against the registry. Throws UnknownBinding.
  std::set<AssetId> resolve_assets(const std::string& app_id) const;
  /// Registered assets matched by a pattern.
  std::set<AssetId> expand(const AssetPattern& p) const;

  bool is_registered(const AssetId& id) const;
  std::vector<StaticBinding> static_bindings() const;
  std::set<AssetId> assets() const;
  /// Throws UnknownBinding.
  AppBinding app(const std::string& app_id) const;

  /// Throws Forbidden unless the app may use `view` on `id` at `res`
  /// (res is ignored for views other than Series). UnknownBinding for unknown apps.
  void authorize(const std::string& app_id, const AssetId& id, View view,
                 Resolution res = Resolution::R60s) const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::pair<std::uint16_t, std::uint16_t>, StaticBinding> by_source_;
  std::map<AssetId, std::string> topics_;
  std::set<AssetId> registry_;
  std::map<std::string, AppBinding> apps_;
};

/// {"assets": [...], "bindings": [{assetId, topic, publisherId, writerId}],
///  "apps": [{appId, assetIds, views, maxResolution}]}
void load_metadata(const nlohmann::json& j, MetadataRepository& repo);
nlohmann::json binding_to_json(const StaticBinding& b);
StaticBinding binding_from_json(const nlohmann::json& j);

/// Default topic name for an asset's sensor stream: "<assetId>.sensors".
std::string default_topic(const AssetId& id);

}  // namespace smv::twin
