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
#include <atomic>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "smv/gateway/envelope.hpp"
#include "smv/twin/fusion.hpp"
#include "smv/twin/metadata.hpp"
#include "smv/twin/rollup.hpp"

namespace smv::twin {

struct LatestValue {
  otbus::FieldValue value;
  std::uint64_t ts_ns = 0;

  friend bool operator==(const LatestValue&, const LatestValue&) = default;
};

using LatestSnapshot = std::map<std::string, LatestValue>;

struct SeriesResult {
  Resolution resolution = Resolution::R1s;
  /// Filled for R1s/R10s/R60s, ordered by start.
  std::vector<RollupBucket> buckets;
  /// Filled for Raw, ordered by timestamp.
  std::vector<RawPoint> raw;
};

/// Per-variable memory bounds. Oldest entries go first.
struct Retention {
  std::size_t raw_points = 1 << 16;
  std::size_t buckets_1s = 86400;
  std::size_t buckets_10s = 8640;
  std::size_t buckets_60s = 1440;
};

struct FusionEvent {
  std::string rule_id;
  AssetId target;
  std::string variable;
  double value = 0;
  bool flagged = false;
  std::uint64_t ts_ns = 0;
};

/// Rollup tiers, indexed by Resolution minus one.
inline constexpr std::array<Resolution, 3> kRollupTiers = {Resolution::R1s, Resolution::R10s, Resolution::R60s};

/// Digital-twin state for every asset: latest values, raw history and
/// 1 s / 10 s / 60 s rollups, plus fusion rules fed by ingestion.
///
/// An envelope is applied to its asset atomically: readers never see part
/// of one. Ingest for different assets may run concurrently.
class TwinStore {
 public:
  explicit TwinStore(std::shared_ptr<const MetadataRepository> meta, Retention retention = {});
  ~TwinStore();

  /// Throws InvalidArgument for invalid or duplicate rules.
  void add_rule(FusionRule rule);
  std::vector<FusionRule> rules() const;

  using FusionListener = std::function<void(const FusionEvent&)>;
  /// Called on every rule evaluation, outside internal locks.
  void on_fusion(FusionListener fn);

  /// Throws UnboundAsset when the asset has no static binding.
  void ingest(const gateway::BridgeEnvelope& env);

  /// Throws UnknownAsset. A registered asset without data yields an empty snapshot.
  LatestSnapshot query_latest(const AssetId& id) const;

  /// Buckets lying entirely inside [from, to), or raw points with from <= ts < to.
  /// Throws UnknownAsset, UnknownVariable, InvalidArgument when from > to.
  SeriesResult query_series(const AssetId& id, const std::string& variable, std::uint64_t from_ns,
                            std::uint64_t to_ns, Resolution res) const;
  /// Spatial aggregation: buckets of every matching asset carrying `variable`
  /// merged per start time. UnknownAsset when nothing matches, UnknownVariable
  /// when no matching asset has the variable.
  SeriesResult query_series(const AssetPattern& pattern, const std::string& variable, std::uint64_t from_ns,
                            std::uint64_t to_ns, Resolution res) const;

  /// Numeric variables with history. Throws UnknownAsset.
  std::vector<std::string> variables(const AssetId& id) const;
  /// Assets holding any state.
  std::set<AssetId> assets() const;
  std::uint64_t ingested() const noexcept { return ingested_.load(std::memory_order_relaxed); }

  /// Retained raw history of one variable in the broker's record framing
  /// (offset = index, key = variable, payload = f64). Throws like query_series.
  Bytes export_series(const AssetId& id, const std::string& variable) const;

  const MetadataRepository& metadata() const noexcept { return *meta_; }

 private:
  struct Variable {
    std::deque<RawPoint> raw;
    std::array<std::map<std::uint64_t, RollupBucket>, 3> tiers;
  };
  struct Asset {
    mutable std::shared_mutex mu;
    LatestSnapshot latest;
    std::map<std::string, Variable> vars;
  };
  struct RuleState {
    FusionRule rule;
    std::deque<double> history;
  };

  std::shared_ptr<Asset> find(const AssetId& id) const;
  std::shared_ptr<Asset> find_or_create(const AssetId& id);
  void check_known(const AssetId& id) const;
  void apply_locked(Asset& a, std::uint64_t ts, const std::vector<otbus::Field>& fields);
  void run_rules(const AssetId& id, std::uint64_t ts, const std::vector<otbus::Field>& fields, int depth,
                 std::vector<FusionEvent>& events);
  static void select(const Variable& v, std::uint64_t from, std::uint64_t to, Resolution res, SeriesResult& out);

  std::shared_ptr<const MetadataRepository> meta_;
  Retention retention_;

  mutable std::shared_mutex assets_mu_;
  std::map<AssetId, std::shared_ptr<Asset>> assets_;

  std::mutex fusion_mu_;
  mutable std::mutex rules_mu_;
  std::map<std::string, std::shared_ptr<RuleState>> rules_;
  std::multimap<std::pair<AssetId, std::string>, std::shared_ptr<RuleState>> by_input_;
  std::vector<FusionListener> listeners_;

  std::atomic<std::uint64_t> ingested_{0};
};

}  // namespace smv::twin
