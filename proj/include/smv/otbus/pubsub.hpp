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
#include <optional>
#include <span>

#include "smv/common/net.hpp"
#include "smv/otbus/message.hpp"

namespace smv::otbus {

/// Fire-and-forget datagram publisher. Holds no knowledge of subscribers.
class Publisher {
 public:
  Publisher();

  /// Sends exactly one datagram. Throws OversizeMessage before any send,
  /// SocketError on transport failure.
  void publish(const net::Endpoint& to, const DataSetMessage& msg);
  /// Encodes once and sends the same datagram to every endpoint.
  void publish(std::span<const net::Endpoint> to, const DataSetMessage& msg);

 private:
  net::UdpSocket sock_;
  Bytes scratch_;
};

struct SourceFilter {
  std::uint16_t publisher_id = 0;
  std::uint16_t writer_id = 0;
};

struct Received {
  DataSetMessage msg;
  /// Wall clock read right after the datagram was dequeued.
  std::uint64_t rx_unix_ns = 0;
};

/// Single-consumer stream of decoded messages from one UDP endpoint.
class Subscriber {
 public:
  /// Throws BindError.
  static Subscriber bind(const net::Endpoint& ep, std::optional<SourceFilter> filter = std::nullopt);

  Subscriber(Subscriber&&) noexcept;
  Subscriber& operator=(Subscriber&&) noexcept;
  ~Subscriber();

  /// Next matching message, or nullopt when `timeout` passes without one.
  /// Malformed and filtered datagrams are counted and skipped.
  std::optional<Received> next(std::chrono::milliseconds timeout);

  std::uint64_t malformed() const noexcept { return malformed_.load(std::memory_order_relaxed); }
  std::uint64_t filtered() const noexcept { return filtered_.load(std::memory_order_relaxed); }
  std::uint64_t delivered() const noexcept { return delivered_.load(std::memory_order_relaxed); }
  std::uint16_t port() const { return sock_.local_port(); }

 private:
  Subscriber() = default;

  net::UdpSocket sock_;
  std::optional<SourceFilter> filter_;
  Bytes buf_;
  std::atomic<std::uint64_t> malformed_{0};
  std::atomic<std::uint64_t> filtered_{0};
  std::atomic<std::uint64_t> delivered_{0};
};

}  // namespace smv::otbus
