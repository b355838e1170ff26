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

#include "smv/twin/twin_store.hpp"

namespace smv::twin {

struct TopologyNode {
  AssetId asset;
  /// Empty for assets without a data source (e.g. fusion targets).
  std::string topic;
  std::vector<std::string> variables;
};

/// Twin queries on behalf of an application. Every call checks the app's
/// binding first: out-of-scope assets, missing views and series finer than
/// maxResolution raise Forbidden; unknown apps raise UnknownBinding.
class QueryService {
 public:
  explicit QueryService(const TwinStore& store) : store_(store), meta_(store.metadata()) {}

  LatestSnapshot latest(const std::string& app_id, const AssetId& id) const;
  SeriesResult series(const std::string& app_id, const AssetId& id, const std::string& variable,
                      std::uint64_t from_ns, std::uint64_t to_ns, Resolution res) const;
  /// Every asset the pattern covers must be in scope.
  SeriesResult series(const std::string& app_id, const AssetPattern& pattern, const std::string& variable,
                      std::uint64_t from_ns, std::uint64_t to_ns, Resolution res) const;
  /// Assets visible to the app, ordered by id. Needs the Topology view.
  std::vector<TopologyNode> topology(const std::string& app_id) const;

 private:
  const TwinStore& store_;
  const MetadataRepository& meta_;
};

nlohmann::json to_json(const LatestSnapshot& s);
nlohmann::json to_json(const SeriesResult& s);
/// Nested enterprise/site/area/cell/machine tree.
nlohmann::json to_json(const std::vector<TopologyNode>& nodes);

}  // namespace smv::twin
