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

#include <netinet/in.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "smv/common/bytes.hpp"

namespace smv::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// Parses "host:port"; host must be an IPv4 literal or "localhost".
  static Endpoint parse(std::string_view text);
  sockaddr_in to_sockaddr() const;
  std::string str() const;

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) noexcept : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) reset(o.release());
    return *this;
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }

  int get() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  int release() noexcept {
    int f = fd_;
    fd_ = -1;
    return f;
  }
  void reset(int fd = -1) noexcept;
  // Unblocks any thread parked in accept/recv on this descriptor.
  void shutdown() noexcept;

 private:
  int fd_ = -1;
};

class UdpSocket {
 public:
  /// Unbound socket suitable for sending.
  static UdpSocket open();
  /// Socket bound to `ep`; port 0 picks an ephemeral port. Throws BindError.
  static UdpSocket bind(const Endpoint& ep);

  void send_to(const Endpoint& to, ByteSpan datagram) const;
  void send_to(const sockaddr_in& to, ByteSpan datagram) const;
  /// Waits up to `timeout` for one datagram; returns its length, or nullopt on timeout.
  std::optional<std::size_t> recv(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout,
                                  sockaddr_in* from = nullptr) const;
  /// Non-blocking receive; nullopt if nothing is queued.
  std::optional<std::size_t> try_recv(std::span<std::uint8_t> buf, sockaddr_in* from = nullptr) const;

  void set_recv_buffer(int bytes) const;
  void set_send_buffer(int bytes) const;
  std::uint16_t local_port() const;
  int fd() const noexcept { return fd_.get(); }
  void close() noexcept { fd_.shutdown(); }

 private:
  Fd fd_;
};

class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(Fd fd) : fd_(std::move(fd)) {}

  static TcpStream connect(const Endpoint& ep, std::chrono::milliseconds timeout = std::chrono::seconds(2));

  void write_all(ByteSpan data);
  /// Reads exactly buf.size() bytes; returns false on orderly EOF before the first byte.
  bool read_exact(std::span<std::uint8_t> buf);
  /// True when data is readable within `timeout`.
  bool wait_readable(std::chrono::milliseconds timeout) const;
  void set_nodelay();
  bool valid() const noexcept { return fd_.valid(); }
  void close() noexcept { fd_.shutdown(); }

 private:
  Fd fd_;
};

class TcpListener {
 public:
  static TcpListener listen(const Endpoint& ep, int backlog = 64);
  /// Returns nullopt after shutdown() or when the timeout expires.
  std::optional<TcpStream> accept(std::chrono::milliseconds timeout);
  std::uint16_t local_port() const;
  void shutdown() noexcept { fd_.shutdown(); }

 private:
  Fd fd_;
};

}  // namespace smv::net
