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
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "smv/broker/broker.hpp"
#include "smv/common/net.hpp"
#include "smv/gateway/envelope.hpp"
#include "smv/gateway/preprocess.hpp"
#include "smv/otbus/pubsub.hpp"
#include "smv/twin/metadata.hpp"

namespace smv::gateway {

struct GatewayConfig {
  std::vector<net::Endpoint> ot_endpoints;
  /// Topics created at start if absent. Bound topics not listed here are
  /// created as single-partition SensorData topics.
  std::vector<broker::TopicSpec> topics;
  std::vector<twin::StaticBinding> bindings;
  std::map<broker::QosClass, FlowPolicy> policies;
  /// Buffer bound for SensorData/Video; Control/Monitoring get 10x.
  std::size_t buffer_limit = 10000;
  /// "host:port" of a broker server; empty means the caller supplies one.
  std::string broker_address;
};

/// {"otEndpoints": ["127.0.0.1:4840"], "broker": "127.0.0.1:9092",
///  "topics": [...], "bindings": [...], "policies": {"SensorData": {...}},
///  "bufferLimit": 10000}. Throws InvalidArgument.
GatewayConfig gateway_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const broker::TopicSpec& t);
broker::TopicSpec topic_from_json(const nlohmann::json& j);

inline constexpr std::size_t kQosClasses = 4;

struct BridgeStats {
  std::uint64_t received = 0;
  /// Forwarded OT messages now in the broker (aggregates excluded).
  std::uint64_t produced = 0;
  std::uint64_t suppressed = 0;
  std::uint64_t unresolved = 0;
  std::uint64_t dropped = 0;
  /// Accepted but not yet produced or dropped.
  std::uint64_t pending = 0;
  std::uint64_t aggregates_produced = 0;
  std::uint64_t aggregates_dropped = 0;
  std::uint64_t produce_calls = 0;
  std::uint64_t produce_errors = 0;
  std::array<std::uint64_t, kQosClasses> produced_by_class{};
  std::map<std::string, std::uint64_t> received_by_asset;
};

/// OT/IT bridge: OT-bus subscriber(s) -> binding resolution -> pre-processing
/// -> per-class bounded buffers -> prioritized, batched produce.
class Gateway {
 public:
  /// `meta` supplies bindings; when null, cfg.bindings are used.
  Gateway(GatewayConfig cfg, broker::BrokerApi& broker, std::shared_ptr<const twin::MetadataRepository> meta = nullptr);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Creates missing topics, binds the OT endpoints and starts the ingest
  /// and sender threads. Throws BindError, SetupFailure.
  void start();
  /// Stops ingest, closes open aggregation windows and drains the buffers
  /// for up to `drain_timeout` before stopping the sender.
  void stop(std::chrono::milliseconds drain_timeout = std::chrono::seconds(2));
  /// Waits until nothing is pending. Returns false on timeout.
  bool drain(std::chrono::milliseconds timeout);

  /// Feeds one decoded OT message, as an ingest loop does. `rx_unix_ns` is
  /// its arrival time.
  void ingest(const otbus::DataSetMessage& msg, std::uint64_t rx_unix_ns);

  /// Throws InvalidArgument (policy invariants).
  void set_policy(const FlowPolicy& p);
  FlowPolicy policy(broker::QosClass qos) const;
  /// Per-asset override of the class pre-processing. Throws InvalidArgument, UnboundAsset.
  void set_preprocess(const AssetId& asset, const PreprocessSpec& spec);
  void clear_preprocess(const AssetId& asset);
  PreprocessSpec preprocess_for(const AssetId& asset) const;

  BridgeStats stats() const;
  /// Recent gwTx - gwRx samples (ns) for a class, oldest first.
  std::vector<std::uint64_t> residence_samples(broker::QosClass qos) const;
  /// Bound UDP ports, one per OT endpoint, in configuration order.
  std::vector<std::uint16_t> ports() const;
  broker::QosClass topic_class(const std::string& topic) const;

 private:
  struct Pending {
    BridgeEnvelope env;
    std::string topic;
    std::uint64_t enqueued_mono_ns = 0;
    bool aggregate = false;
  };
  struct ClassQueue {
    std::deque<Pending> items;
    std::map<std::string, std::size_t> per_asset;
  };
  struct AssetState {
    PreprocessSpec spec;
    std::map<std::string, DeadbandState> deadband;
    std::map<std::string, otbus::FieldValue> last_other;
    std::unique_ptr<WindowAggregator> aggregator;
    std::string topic;
    std::uint16_t writer_id = 0;
  };
  static constexpr std::size_t kResidenceRing = 8192;

  void ingest_loop(std::size_t idx, std::stop_token st);
  void sender_loop(std::stop_token st);
  void enqueue(Pending p, broker::QosClass qos);
  void emit_aggregate(const AssetId& asset, AssetState& s, WindowAggregator::Output out);
  void flush_aggregates(std::uint64_t now_unix_ns, bool force);
  bool take_batch(std::vector<Pending>& batch, broker::QosClass& qos, std::uint64_t now_mono,
                  std::uint64_t& next_deadline);
  void produce(std::vector<Pending>& batch, broker::QosClass qos);
  bool idle_locked() const;
  PreprocessSpec effective_spec_locked(const AssetId& asset, broker::QosClass qos) const;

  GatewayConfig cfg_;
  broker::BrokerApi& broker_;
  std::shared_ptr<const twin::MetadataRepository> meta_;
  std::map<std::string, broker::QosClass> topic_qos_;

  // Policies and per-asset pre-processing state.
  mutable std::mutex pre_mu_;
  std::map<broker::QosClass, FlowPolicy> policies_;
  std::map<AssetId, PreprocessSpec> overrides_;
  std::map<AssetId, AssetState> assets_;

  // Buffers, guarded by mu_.
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable drained_cv_;
  std::array<ClassQueue, kQosClasses> queues_;
  std::size_t in_flight_ = 0;
  BridgeStats stats_;
  std::array<std::deque<std::uint64_t>, kQosClasses> residence_;
  // Copy of the batching knobs so the sender never takes pre_mu_.
  std::array<std::pair<std::uint16_t, std::uint16_t>, kQosClasses> batching_{};

  std::vector<otbus::Subscriber> subs_;
  std::vector<std::jthread> ingest_threads_;
  std::jthread sender_;
  bool running_ = false;
};

}  // namespace smv::gateway
