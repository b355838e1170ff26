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

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include <json.hpp>

#include "smv/broker/server.hpp"
#include "smv/engine/bus.hpp"
#include "smv/engine/renderer.hpp"
#include "smv/engine/transport.hpp"
#include "smv/gateway/gateway.hpp"
#include "smv/otbus/simulator.hpp"
#include "smv/twin/feeder.hpp"
#include "smv/twin/query.hpp"

namespace smv::stack {

struct VideoConfig {
  bool enabled = true;
  engine::FramePreset preset = engine::FramePreset::HD;
  std::uint32_t fps = 30;
  engine::TransportKind transport = engine::TransportKind::LocalZeroCopy;
  engine::OverlaySpec overlay;
  /// Series drawn by the overlay cover the trailing window.
  std::uint32_t window_sec = 60;
};

struct StackConfig {
  nlohmann::json metadata = nlohmann::json::object();
  /// Bindings come from `metadata`; gateway.bindings is ignored.
  gateway::GatewayConfig gateway;
  std::vector<otbus::SimulatorProfile> simulators;
  twin::TwinConfig twin;
  VideoConfig video;
  /// Broker segments and asset stores live below this; empty keeps
  /// everything in memory.
  std::filesystem::path data_dir;
  /// Remote broker "host:port"; empty runs an embedded one.
  std::string broker_address;
  /// Serves the embedded broker over TCP when set.
  std::optional<net::Endpoint> broker_listen;
  net::Endpoint http{"127.0.0.1", 8080};
  std::uint32_t http_threads = 2;
};

/// Throws InvalidArgument. See docs/config.md for the schema.
StackConfig stack_config_from_json(const nlohmann::json& j);

struct TopologyNode {
  std::string id;
  /// machine, gateway, broker, twin, engine or consumer.
  std::string kind;
  std::optional<AssetId> asset;
};

struct TopologyEdge {
  std::string from;
  std::string to;
  broker::QosClass qos = broker::QosClass::SensorData;
  double msg_rate_per_sec = 0;
  std::uint64_t p50_latency_ns = 0;
};

struct TopologySnapshot {
  std::uint64_t sampled_unix_ns = 0;
  double window_sec = 0;
  std::vector<TopologyNode> nodes;
  std::vector<TopologyEdge> edges;
};

nlohmann::json to_json(const TopologySnapshot& t);

/// Downscaled frame as pushed to browsers.
struct VideoFrame {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint64_t seq = 0;
  Bytes rgba;
};

inline constexpr std::uint32_t kBrowserMaxWidth = 1920;
inline constexpr std::uint32_t kBrowserMaxHeight = 1080;

/// Smallest integer box factor bringing w x h within 1920x1080.
std::uint32_t browser_downscale_factor(std::uint32_t w, std::uint32_t h) noexcept;

/// Channel on the stack bus carrying "stats" and "fusion" events (JSON payloads).
inline constexpr const char* kEventsChannel = "events";

/// The whole pipeline in one process: simulators -> gateway -> broker ->
/// twin feeder -> twin store -> render/stream chain, plus a 1 s stats
/// sampler and the operator control channel.
class Stack {
 public:
  explicit Stack(StackConfig cfg);
  ~Stack();
  Stack(const Stack&) = delete;
  Stack& operator=(const Stack&) = delete;

  /// Throws SetupFailure, BindError.
  void start();
  void stop();
  bool running() const noexcept { return running_.load(); }

  /// Latest 1 s snapshot. Throws NotRunning before start or after stop,
  /// BrokerUnavailable while the broker cannot be reached.
  std::shared_ptr<const TopologySnapshot> topology() const;

  /// Applies one QoS change request, serialized with every other change,
  /// and returns the effective configuration. Throws InvalidArgument
  /// (malformed or out of bounds) and NotRunning (target not running).
  nlohmann::json apply_qos(const nlohmann::json& request);
  nlohmann::json effective_config() const;

  std::shared_ptr<const VideoFrame> latest_video() const;

  const twin::MetadataRepository& metadata() const { return *meta_; }
  const twin::QueryService& queries() const { return *queries_; }
  twin::TwinStore& twin() { return *twin_; }
  engine::Bus& bus() { return bus_; }
  gateway::Gateway& gateway() { return *gateway_; }
  broker::BrokerApi& broker() { return *broker_; }
  /// UDP ports the gateway listens on for OT traffic.
  std::vector<std::uint16_t> ot_ports() const;
  std::uint16_t broker_port() const;
  const StackConfig& config() const noexcept { return cfg_; }

 private:
  struct Window;
  struct SimSlot {
    std::unique_ptr<otbus::Simulator> sim;
    AssetId asset;
    std::atomic<bool> running{false};
    std::jthread thread;
  };

  void tap(const gateway::BridgeEnvelope& env, std::uint64_t rx_unix_ns);
  void sample_loop(std::stop_token st);
  void sample(std::uint64_t now_mono, double seconds);
  void render_loop(std::stop_token st);
  void receive_loop(std::stop_token st);
  void export_series();

  StackConfig cfg_;
  std::shared_ptr<twin::MetadataRepository> meta_;
  std::map<AssetId, broker::QosClass> asset_class_;

  std::unique_ptr<broker::Broker> embedded_;
  std::unique_ptr<broker::BrokerApi> remote_;
  broker::BrokerApi* broker_ = nullptr;
  std::unique_ptr<broker::BrokerServer> broker_server_;
  std::unique_ptr<gateway::Gateway> gateway_;
  std::unique_ptr<twin::TwinStore> twin_;
  std::unique_ptr<twin::QueryService> queries_;
  std::unique_ptr<twin::TwinFeeder> feeder_;
  std::vector<std::unique_ptr<SimSlot>> sims_;
  engine::InProcessBus bus_;

  std::unique_ptr<engine::FrameSender> video_tx_;
  std::unique_ptr<engine::FrameReceiver> video_rx_;
  std::jthread render_thread_;
  std::jthread receive_thread_;
  mutable std::mutex video_mu_;
  std::shared_ptr<const VideoFrame> video_;

  std::unique_ptr<Window> window_;
  std::jthread sampler_;
  mutable std::mutex topo_mu_;
  std::shared_ptr<const TopologySnapshot> topo_;
  bool broker_healthy_ = true;
  gateway::BridgeStats last_gw_;
  std::uint64_t last_mono_ = 0;

  mutable std::mutex control_mu_;
  std::atomic<bool> running_{false};
  bool stopped_ = false;
};

}  // namespace smv::stack
