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

#include "smv/twin/metadata.hpp"

#include <mutex>

#include "smv/common/error.hpp"

namespace smv::twin {

AssetPattern AssetPattern::parse(std::string_view text) {
  AssetPattern p;
  bool wildcard = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size() && text[i] != '.') continue;
    auto seg = text.substr(start, i - start);
    start = i + 1;
    if (wildcard) fail(Errc::InvalidArgument, "'*' must be the last segment: " + std::string(text));
    if (seg == "*") {
      wildcard = true;
      continue;
    }
    if (!AssetId::valid_segment(seg)) fail(Errc::InvalidArgument, "bad asset pattern '" + std::string(text) + "'");
    p.segments_.emplace_back(seg);
  }
  if (p.segments_.size() > AssetId::kLevels || (p.segments_.size() == AssetId::kLevels && wildcard) ||
      (p.segments_.size() < AssetId::kLevels && !wildcard) || p.segments_.empty())
    fail(Errc::InvalidArgument, "asset pattern must be a full asset id or 'seg[.seg]*.*': " + std::string(text));
  return p;
}

AssetPattern AssetPattern::exact(const AssetId& id) {
  AssetPattern p;
  p.segments_.assign(id.segments().begin(), id.segments().end());
  return p;
}

bool AssetPattern::matches(const AssetId& id) const noexcept {
  for (std::size_t i = 0; i < segments_.size(); ++i)
    if (segments_[i] != id.segments()[i]) return false;
  return true;
}

bool AssetPattern::covers(const AssetPattern& o) const noexcept {
  if (o.segments_.size() < segments_.size()) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i)
    if (segments_[i] != o.segments_[i]) return false;
  return true;
}

std::string AssetPattern::str() const {
  std::string out;
  for (const auto& s : segments_) {
    if (!out.empty()) out += '.';
    out += s;
  }
  if (is_prefix()) out += ".*";
  return out;
}

std::string_view to_string(View v) noexcept {
  switch (v) {
    case View::Latest: return "Latest";
    case View::Series: return "Series";
    case View::Video: return "Video";
    case View::Topology: return "Topology";
  }
  return "Latest";
}

std::string_view to_string(Resolution r) noexcept {
  switch (r) {
    case Resolution::Raw: return "Raw";
    case Resolution::R1s: return "R1s";
    case Resolution::R10s: return "R10s";
    case Resolution::R60s: return "R60s";
  }
  return "Raw";
}

Resolution resolution_from_string(std::string_view s) {
  if (s == "Raw" || s == "raw") return Resolution::Raw;
  if (s == "R1s" || s == "1s") return Resolution::R1s;
  if (s == "R10s" || s == "10s") return Resolution::R10s;
  if (s == "R60s" || s == "60s") return Resolution::R60s;
  fail(Errc::InvalidArgument, "unknown resolution '" + std::string(s) + "'");
}

View view_from_string(std::string_view s) {
  if (s == "Latest") return View::Latest;
  if (s == "Series") return View::Series;
  if (s == "Video") return View::Video;
  if (s == "Topology") return View::Topology;
  fail(Errc::InvalidArgument, "unknown view '" + std::string(s) + "'");
}

std::uint64_t resolution_ns(Resolution r) noexcept {
  switch (r) {
    case Resolution::Raw: return 0;
    case Resolution::R1s: return 1'000'000'000ull;
    case Resolution::R10s: return 10'000'000'000ull;
    case Resolution::R60s: return 60'000'000'000ull;
  }
  return 0;
}

void MetadataRepository::add_static(const StaticBinding& b) {
  if (b.topic.empty()) fail(Errc::InvalidArgument, "binding for " + b.asset.str() + " has no topic");
  std::unique_lock lk(mu_);
  const auto src = std::pair{b.publisher_id, b.writer_id};
  if (by_source_.contains(src))
    fail(Errc::InvalidArgument, "source (" + std::to_string(b.publisher_id) + "," + std::to_string(b.writer_id) +
                                    ") already bound");
  if (auto it = topics_.find(b.asset); it != topics_.end() && it->second != b.topic)
    fail(Errc::InvalidArgument, b.asset.str() + " already bound to topic " + it->second);
  by_source_.emplace(src, b);
  topics_[b.asset] = b.topic;
  registry_.insert(b.asset);
}

void MetadataRepository::register_asset(const AssetId& id) {
  std::unique_lock lk(mu_);
  registry_.insert(id);
}

void MetadataRepository::add_app(AppBinding app) {
  if (app.app_id.empty()) fail(Errc::InvalidArgument, "empty appId");
  if (app.assets.empty()) fail(Errc::InvalidArgument, "app " + app.app_id + " binds no assets");
  std::unique_lock lk(mu_);
  apps_[app.app_id] = std::move(app);
}

std::string MetadataRepository::resolve_topic(const AssetId& id) const {
  std::shared_lock lk(mu_);
  auto it = topics_.find(id);
  if (it == topics_.end()) fail(Errc::UnknownBinding, "no static binding for " + id.str());
  return it->second;
}

std::optional<StaticBinding> MetadataRepository::resolve_source(std::uint16_t publisher_id,
                                                                std::uint16_t writer_id) const {
  std::shared_lock lk(mu_);
  auto it = by_source_.find({publisher_id, writer_id});
  if (it == by_source_.end()) return std::nullopt;
  return it->second;
}

std::set<AssetId> MetadataRepository::expand(const AssetPattern& p) const {
  std::shared_lock lk(mu_);
  std::set<AssetId> out;
  for (const auto& a : registry_)
    if (p.matches(a)) out.insert(a);
  return out;
}

std::set<AssetId> MetadataRepository::resolve_assets(const std::string& app_id) const {
  std::shared_lock lk(mu_);
  auto it = apps_.find(app_id);
  if (it == apps_.end()) fail(Errc::UnknownBinding, "no app binding for '" + app_id + "'");
  std::set<AssetId> out;
  for (const auto& a : registry_)
    for (const auto& p : it->second.assets)
      if (p.matches(a)) {
        out.insert(a);
        break;
      }
  return out;
}

bool MetadataRepository::is_registered(const AssetId& id) const {
  std::shared_lock lk(mu_);
  return registry_.contains(id);
}

std::vector<StaticBinding> MetadataRepository::static_bindings() const {
  std::shared_lock lk(mu_);
  std::vector<StaticBinding> out;
  for (const auto& [_, b] : by_source_) out.push_back(b);
  return out;
}

std::set<AssetId> MetadataRepository::assets() const {
  std::shared_lock lk(mu_);
  return registry_;
}

AppBinding MetadataRepository::app(const std::string& app_id) const {
  std::shared_lock lk(mu_);
  auto it = apps_.find(app_id);
  if (it == apps_.end()) fail(Errc::UnknownBinding, "no app binding for '" + app_id + "'");
  return it->second;
}

void MetadataRepository::authorize(const std::string& app_id, const AssetId& id, View view, Resolution res) const {
  const AppBinding a = app(app_id);
  bool in_scope = false;
  for (const auto& p : a.assets) in_scope = in_scope || p.matches(id);
  if (!in_scope) fail(Errc::Forbidden, app_id + " is not bound to " + id.str());
  if (!a.views.contains(view)) fail(Errc::Forbidden, app_id + " lacks the " + std::string(to_string(view)) + " view");
  if (view == View::Series && res < a.max_resolution)
    fail(Errc::Forbidden, app_id + " may not read resolution " + std::string(to_string(res)) + " (finest allowed " +
                              std::string(to_string(a.max_resolution)) + ")");
}

nlohmann::json binding_to_json(const StaticBinding& b) {
  return {{"assetId", b.asset.str()}, {"topic", b.topic}, {"publisherId", b.publisher_id}, {"writerId", b.writer_id}};
}

StaticBinding binding_from_json(const nlohmann::json& j) {
  StaticBinding b;
  b.asset = AssetId::parse(j.at("assetId").get<std::string>());
  b.topic = j.contains("topic") ? j.at("topic").get<std::string>() : default_topic(b.asset);
  b.publisher_id = j.at("publisherId").get<std::uint16_t>();
  b.writer_id = j.at("writerId").get<std::uint16_t>();
  return b;
}

void load_metadata(const nlohmann::json& j, MetadataRepository& repo) {
  try {
    if (j.contains("assets"))
      for (const auto& a : j.at("assets")) repo.register_asset(AssetId::parse(a.get<std::string>()));
    if (j.contains("bindings"))
      for (const auto& b : j.at("bindings")) repo.add_static(binding_from_json(b));
    if (j.contains("apps"))
      for (const auto& a : j.at("apps")) {
        AppBinding app;
        app.app_id = a.at("appId").get<std::string>();
        for (const auto& p : a.at("assetIds")) app.assets.push_back(AssetPattern::parse(p.get<std::string>()));
        for (const auto& v : a.at("views")) app.views.insert(view_from_string(v.get<std::string>()));
        app.max_resolution = resolution_from_string(a.value("maxResolution", std::string("R1s")));
        repo.add_app(std::move(app));
      }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("metadata config: ") + e.what());
  }
}

std::string default_topic(const AssetId& id) { return id.str() + ".sensors"; }

}  // namespace smv::twin
