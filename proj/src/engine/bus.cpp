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

#include "smv/engine/bus.hpp"

#include "smv/common/error.hpp"

namespace smv::engine {

struct InProcessBus::Queue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<BusEvent> events;
  bool closed = false;
  std::uint64_t dropped = 0;
};

namespace {

class QueueSubscription final : public Subscription {
 public:
  explicit QueueSubscription(std::shared_ptr<InProcessBus::Queue> q) : q_(std::move(q)) {}

  std::optional<BusEvent> next(std::chrono::milliseconds timeout) override {
    std::unique_lock lk(q_->mu);
    if (!q_->cv.wait_for(lk, timeout, [&] { return !q_->events.empty() || q_->closed; })) return std::nullopt;
    if (q_->events.empty()) fail(Errc::ChannelClosed, "channel closed");
    BusEvent e = std::move(q_->events.front());
    q_->events.pop_front();
    return e;
  }

  std::uint64_t dropped() const override {
    std::lock_guard lk(q_->mu);
    return q_->dropped;
  }

 private:
  std::shared_ptr<InProcessBus::Queue> q_;
};

}  // namespace

void InProcessBus::publish(const std::string& channel, BusEvent event) {
  std::lock_guard lk(mu_);
  auto& ch = channels_[channel];
  if (ch.closed) fail(Errc::ChannelClosed, channel);
  event.channel = channel;
  event.seq = ++ch.seq;
  // Delivery happens under the bus lock, which is what keeps every
  // subscriber's view of a channel in one order.
  std::erase_if(ch.subscribers, [](const auto& w) { return w.expired(); });
  for (const auto& w : ch.subscribers) {
    auto q = w.lock();
    if (!q) continue;
    {
      std::lock_guard qlk(q->mu);
      q->events.push_back(event);
      while (q->events.size() > limit_) {
        q->events.pop_front();
        ++q->dropped;
      }
    }
    q->cv.notify_one();
  }
}

std::unique_ptr<Subscription> InProcessBus::subscribe(const std::string& channel) {
  std::lock_guard lk(mu_);
  auto& ch = channels_[channel];
  if (ch.closed) fail(Errc::ChannelClosed, channel);
  auto q = std::make_shared<Queue>();
  ch.subscribers.push_back(q);
  return std::make_unique<QueueSubscription>(std::move(q));
}

void InProcessBus::close(const std::string& channel) {
  std::lock_guard lk(mu_);
  auto& ch = channels_[channel];
  ch.closed = true;
  for (const auto& w : ch.subscribers)
    if (auto q = w.lock()) {
      {
        std::lock_guard qlk(q->mu);
        q->closed = true;
      }
      q->cv.notify_all();
    }
}

Bytes encode_bus_event(const BusEvent& e) {
  if (e.channel.size() > 0xFFFF || e.type.size() > 0xFFFF) fail(Errc::InvalidArgument, "bus event names too long");
  Bytes out;
  ByteWriter w(out);
  w.u32(e.origin);
  w.u32(e.publisher);
  w.u64(e.seq);
  w.u16(static_cast<std::uint16_t>(e.channel.size()));
  w.raw(e.channel);
  w.u16(static_cast<std::uint16_t>(e.type.size()));
  w.raw(e.type);
  w.raw(e.payload);
  if (out.size() > 65507) fail(Errc::InvalidArgument, "bus event exceeds one datagram");
  return out;
}

BusEvent decode_bus_event(ByteSpan datagram) {
  ByteReader r(datagram);
  BusEvent e;
  e.origin = r.u32();
  e.publisher = r.u32();
  e.seq = r.u64();
  e.channel = r.str(r.u16());
  e.type = r.str(r.u16());
  auto rest = r.raw(r.remaining());
  e.payload.assign(rest.begin(), rest.end());
  return e;
}

BusLink::BusLink(Bus& local, std::uint32_t node_id, const net::Endpoint& bind, const net::Endpoint& peer,
                 const std::vector<std::string>& channels)
    : local_(local), node_id_(node_id), sock_(net::UdpSocket::bind(bind)), peer_(peer) {
  if (node_id == 0) fail(Errc::InvalidArgument, "bus link node id must be non-zero");
  for (const auto& ch : channels) {
    std::shared_ptr<Subscription> sub = local_.subscribe(ch);
    threads_.emplace_back([this, sub](std::stop_token st) {
      while (!st.stop_requested()) {
        std::optional<BusEvent> e;
        try {
          e = sub->next(std::chrono::milliseconds(50));
        } catch (const Error&) {
          return;
        }
        if (!e || e->origin != 0) continue;  // never echo what came from a peer
        e->origin = node_id_;
        try {
          sock_.send_to(peer_, encode_bus_event(*e));
          ++forwarded_;
        } catch (const Error&) {
        }
      }
    });
  }
  threads_.emplace_back([this](std::stop_token st) {
    Bytes buf(65536);
    while (!st.stop_requested()) {
      auto n = sock_.recv(buf, std::chrono::milliseconds(50));
      if (!n) continue;
      try {
        BusEvent e = decode_bus_event(ByteSpan(buf.data(), *n));
        if (e.origin == 0 || e.origin == node_id_) continue;
        const std::string ch = e.channel;
        local_.publish(ch, std::move(e));
        ++injected_;
      } catch (const Error&) {
      }
    }
  });
}

BusLink::~BusLink() { stop(); }

void BusLink::stop() {
  for (auto& t : threads_) t.request_stop();
  for (auto& t : threads_)
    if (t.joinable()) t.join();
}

}  // namespace smv::engine
