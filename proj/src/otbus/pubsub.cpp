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

#include "smv/otbus/pubsub.hpp"

#include "smv/common/clock.hpp"

namespace smv::otbus {

Publisher::Publisher() : sock_(net::UdpSocket::open()) {}

void Publisher::publish(const net::Endpoint& to, const DataSetMessage& msg) {
  encode_network_message(msg, scratch_);
  sock_.send_to(to, scratch_);
}

void Publisher::publish(std::span<const net::Endpoint> to, const DataSetMessage& msg) {
  encode_network_message(msg, scratch_);
  for (const auto& ep : to) sock_.send_to(ep, scratch_);
}

Subscriber Subscriber::bind(const net::Endpoint& ep, std::optional<SourceFilter> filter) {
  Subscriber s;
  s.sock_ = net::UdpSocket::bind(ep);
  s.sock_.set_recv_buffer(4 << 20);
  s.filter_ = filter;
  s.buf_.resize(65536);
  return s;
}

Subscriber::Subscriber(Subscriber&& o) noexcept
    : sock_(std::move(o.sock_)),
      filter_(o.filter_),
      buf_(std::move(o.buf_)),
      malformed_(o.malformed_.load()),
      filtered_(o.filtered_.load()),
      delivered_(o.delivered_.load()) {}

Subscriber& Subscriber::operator=(Subscriber&& o) noexcept {
  sock_ = std::move(o.sock_);
  filter_ = o.filter_;
  buf_ = std::move(o.buf_);
  malformed_ = o.malformed_.load();
  filtered_ = o.filtered_.load();
  delivered_ = o.delivered_.load();
  return *this;
}

Subscriber::~Subscriber() = default;

std::optional<Received> Subscriber::next(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (remaining.count() < 0) remaining = std::chrono::milliseconds(0);
    auto n = sock_.recv(buf_, remaining);
    if (!n) return std::nullopt;
    const std::uint64_t rx = unix_now_ns();
    try {
      Received r{decode_network_message(ByteSpan(buf_.data(), *n)), rx};
      if (filter_ && (r.msg.publisher_id != filter_->publisher_id || r.msg.writer_id != filter_->writer_id)) {
        filtered_.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      delivered_.fetch_add(1, std::memory_order_relaxed);
      return r;
    } catch (const Error&) {
      malformed_.fetch_add(1, std::memory_order_relaxed);
    }
  }
}

}  // namespace smv::otbus
