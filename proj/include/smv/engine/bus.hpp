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
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "smv/common/bytes.hpp"
#include "smv/common/net.hpp"

namespace smv::engine {

struct BusEvent {
  std::string channel;
  std::string type;
  Bytes payload;
  std::uint32_t publisher = 0;
  /// Assigned by the bus: position in the channel, starting at 1.
  std::uint64_t seq = 0;
  /// 0 for events published on this bus; otherwise the node id of the
  /// remote bus they came from.
  std::uint32_t origin = 0;

  friend bool operator==(const BusEvent&, const BusEvent&) = default;
};

class Subscription {
 public:
  virtual ~Subscription() = default;
  /// Next event, nullopt on timeout. Throws ChannelClosed once the channel
  /// is closed and everything queued before has been taken.
  virtual std::optional<BusEvent> next(std::chrono::milliseconds timeout) = 0;
  /// Events discarded because this subscriber fell too far behind.
  virtual std::uint64_t dropped() const = 0;
};

/// Service bus: named channels with fan-out to every subscriber and FIFO
/// order per channel (hence per publisher).
class Bus {
 public:
  virtual ~Bus() = default;
  /// Throws ChannelClosed.
  virtual void publish(const std::string& channel, BusEvent event) = 0;
  /// Subscribers see events published after they subscribed. Throws ChannelClosed.
  virtual std::unique_ptr<Subscription> subscribe(const std::string& channel) = 0;
  virtual void close(const std::string& channel) = 0;
};

class InProcessBus final : public Bus {
 public:
  /// Per-subscriber queue bound; beyond it the oldest events are dropped.
  explicit InProcessBus(std::size_t queue_limit = 1 << 16) : limit_(queue_limit) {}

  void publish(const std::string& channel, BusEvent event) override;
  std::unique_ptr<Subscription> subscribe(const std::string& channel) override;
  void close(const std::string& channel) override;

  struct Queue;

 private:
  struct Channel {
    std::uint64_t seq = 0;
    bool closed = false;
    std::vector<std::weak_ptr<Queue>> subscribers;
  };

  std::size_t limit_;
  std::mutex mu_;
  std::map<std::string, Channel> channels_;
};

/// Carries chosen channels between two buses on different hosts over UDP,
/// so services publish and subscribe the same way wherever they run.
/// Datagram: u32 origin | u32 publisher | u64 seq | u16 len | channel |
/// u16 len | type | payload. Events larger than one datagram are refused.
class BusLink {
 public:
  /// `node_id` (non-zero) tags events this link forwards. Throws BindError.
  BusLink(Bus& local, std::uint32_t node_id, const net::Endpoint& bind, const net::Endpoint& peer,
          const std::vector<std::string>& channels);
  ~BusLink();

  std::uint16_t port() const { return sock_.local_port(); }
  std::uint64_t forwarded() const noexcept { return forwarded_; }
  std::uint64_t injected() const noexcept { return injected_; }
  void stop();

 private:
  Bus& local_;
  std::uint32_t node_id_;
  net::UdpSocket sock_;
  net::Endpoint peer_;
  std::atomic<std::uint64_t> forwarded_{0}, injected_{0};
  std::vector<std::jthread> threads_;
};

Bytes encode_bus_event(const BusEvent& e);
/// Throws MalformedMessage.
BusEvent decode_bus_event(ByteSpan datagram);

}  // namespace smv::engine
