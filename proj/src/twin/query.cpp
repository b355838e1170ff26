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

#include "smv/twin/query.hpp"

#include <cmath>

#include "smv/common/error.hpp"

namespace smv::twin {

LatestSnapshot QueryService::latest(const std::string& app_id, const AssetId& id) const {
  meta_.authorize(app_id, id, View::Latest);
  return store_.query_latest(id);
}

SeriesResult QueryService::series(const std::string& app_id, const AssetId& id, const std::string& variable,
                                  std::uint64_t from_ns, std::uint64_t to_ns, Resolution res) const {
  meta_.authorize(app_id, id, View::Series, res);
  return store_.query_series(id, variable, from_ns, to_ns, res);
}

SeriesResult QueryService::series(const std::string& app_id, const AssetPattern& pattern, const std::string& variable,
                                  std::uint64_t from_ns, std::uint64_t to_ns, Resolution res) const {
  if (!pattern.is_prefix()) return series(app_id, AssetId::parse(pattern.str()), variable, from_ns, to_ns, res);
  std::set<AssetId> covered = meta_.expand(pattern);
  for (const auto& id : store_.assets())
    if (pattern.matches(id)) covered.insert(id);
  // An empty match still has to be in scope, otherwise probing prefixes
  // would reveal which parts of the plant exist.
  const AppBinding app = meta_.app(app_id);
  if (covered.empty()) {
    bool in_scope = false;
    for (const auto& p : app.assets) in_scope = in_scope || p.covers(pattern);
    if (!in_scope) fail(Errc::Forbidden, app_id + " is not bound to " + pattern.str());
  }
  for (const auto& id : covered) meta_.authorize(app_id, id, View::Series, res);
  return store_.query_series(pattern, variable, from_ns, to_ns, res);
}

std::vector<TopologyNode> QueryService::topology(const std::string& app_id) const {
  const AppBinding app = meta_.app(app_id);
  if (!app.views.contains(View::Topology)) fail(Errc::Forbidden, app_id + " lacks the Topology view");
  std::set<AssetId> ids = meta_.resolve_assets(app_id);
  for (const auto& id : store_.assets())
    for (const auto& p : app.assets)
      if (p.matches(id)) ids.insert(id);
  std::vector<TopologyNode> out;
  for (const auto& id : ids) {
    TopologyNode n{id, {}, store_.variables(id)};
    try {
      n.topic = meta_.resolve_topic(id);
    } catch (const Error&) {
    }
    out.push_back(std::move(n));
  }
  return out;
}

namespace {

nlohmann::json value_json(const otbus::FieldValue& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>)
          return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
        else
          return nlohmann::json(x);
      },
      v);
}

nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json to_json(const LatestSnapshot& s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, lv] : s) j[name] = {{"value", value_json(lv.value)}, {"tsUnixNs", lv.ts_ns}};
  return j;
}

nlohmann::json to_json(const SeriesResult& s) {
  nlohmann::json j;
  j["resolution"] = std::string(to_string(s.resolution));
  if (s.resolution == Resolution::Raw) {
    j["points"] = nlohmann::json::array();
    for (const auto& p : s.raw) j["points"].push_back({{"tsUnixNs", p.ts_ns}, {"value", num(p.value)}});
  } else {
    j["buckets"] = nlohmann::json::array();
    for (const auto& b : s.buckets)
      j["buckets"].push_back({{"bucketStartNs", b.start_ns},
                              {"count", b.count},
                              {"mean", num(b.mean())},
                              {"min", num(b.min)},
                              {"max", num(b.max)}});
  }
  return j;
}

nlohmann::json to_json(const std::vector<TopologyNode>& nodes) {
  nlohmann::json root = nlohmann::json::object();
  for (const auto& n : nodes) {
    nlohmann::json* cur = &root;
    const auto& seg = n.asset.segments();
    for (std::size_t i = 0; i + 1 < seg.size(); ++i) cur = &(*cur)[seg[i]];
    (*cur)[seg.back()] = {{"assetId", n.asset.str()}, {"topic", n.topic}, {"variables", n.variables}};
  }
  return root;
}

}  // namespace smv::twin
