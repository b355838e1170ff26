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

#include <atomic>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "smv/broker/broker.hpp"
#include "smv/twin/twin_store.hpp"

namespace smv::twin {

struct FeederStats {
  std::uint64_t consumed = 0;
  std::uint64_t ingested = 0;
  std::uint64_t malformed = 0;
  std::uint64_t rejected = 0;
};

/// Consumes bridge envelopes from broker topics (one consumer thread per
/// topic, shared group id) and ingests them into a twin store.
class TwinFeeder {
 public:
  /// Called after each successful ingest with the consumer's receive time.
  using Tap = std::function<void(const gateway::BridgeEnvelope&, std::uint64_t rx_unix_ns)>;

  /// Throws UnknownTopic if a topic is missing.
  TwinFeeder(broker::BrokerApi& broker, TwinStore& store, const std::vector<std::string>& topics,
             const std::string& group_id = "twin", Tap tap = {});
  ~TwinFeeder();

  TwinFeeder(const TwinFeeder&) = delete;
  TwinFeeder& operator=(const TwinFeeder&) = delete;

  void stop();
  FeederStats stats() const noexcept;

 private:
  void run(std::stop_token st, broker::RecordStream& stream);

  TwinStore& store_;
  Tap tap_;
  std::vector<std::unique_ptr<broker::RecordStream>> streams_;
  std::vector<std::jthread> threads_;
  std::atomic<std::uint64_t> consumed_{0}, ingested_{0}, malformed_{0}, rejected_{0};
};

struct TwinConfig {
  std::vector<FusionRule> rules;
  Retention retention;
};

/// {"fusionRules": [...], "retention": {"rawPoints", "buckets1s", "buckets10s", "buckets60s"}}.
/// Throws InvalidArgument.
TwinConfig twin_config_from_json(const nlohmann::json& j);

}  // namespace smv::twin
