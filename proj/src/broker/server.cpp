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

#include "smv/broker/server.hpp"

#include "smv/broker/protocol.hpp"

namespace smv::broker {

using namespace std::chrono_literals;
using wire::Opcode;

namespace {

// Error text without the "Code: " prefix; the status byte carries the code.
std::string bare_message(const Error& e) {
  std::string_view w = e.what();
  const auto prefix = std::string(to_string(e.code())) + ": ";
  if (w.starts_with(prefix)) w.remove_prefix(prefix.size());
  return std::string(w);
}

}  // namespace

BrokerServer::BrokerServer(BrokerApi& broker, const net::Endpoint& ep)
    : broker_(broker), listener_(net::TcpListener::listen(ep)), port_(listener_.local_port()) {
  acceptor_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

BrokerServer::~BrokerServer() { stop(); }

void BrokerServer::stop() {
  if (!acceptor_.joinable()) return;
  acceptor_.request_stop();
  listener_.shutdown();
  acceptor_.join();
  std::lock_guard lk(conns_mu_);
  for (auto& c : conns_) {
    c.thread.request_stop();
    c.stream.close();
  }
  conns_.clear();  // joins
}

void BrokerServer::accept_loop(std::stop_token st) {
  while (!st.stop_requested()) {
    auto s = listener_.accept(200ms);
    if (!s) continue;
    std::lock_guard lk(conns_mu_);
    conns_.remove_if([](const Conn& c) { return c.done.load(); });
    auto& c = conns_.emplace_back();
    c.stream = std::move(*s);
    c.thread = std::jthread([this, &c](std::stop_token cst) {
      serve(c, cst);
      c.done = true;
    });
  }
}

void BrokerServer::serve(Conn& c, std::stop_token st) {
  auto& s = c.stream;
  try {
    while (!st.stop_requested()) {
      auto req = wire::read_frame(s);
      if (!req) return;
      Bytes resp;
      ByteWriter w(resp);
      std::unique_ptr<RecordStream> sub;
      std::string sub_topic;
      try {
        ByteReader r(req->body);
        switch (static_cast<Opcode>(req->code)) {
          case Opcode::Produce: {
            auto topic = wire::get_str16(r);
            auto key = wire::get_bytes32(r);
            auto ack = static_cast<AckLevel>(r.u8());
            const auto n = r.u32();
            std::vector<Bytes> payloads;
            payloads.reserve(std::min<std::uint32_t>(n, 4096));
            for (std::uint32_t i = 0; i < n; ++i) payloads.push_back(wire::get_bytes32(r));
            auto res = broker_.produce_batch(topic, key, payloads, ack);
            w.u16(res.partition);
            w.u64(res.offset);
            break;
          }
          case Opcode::Fetch: {
            auto topic = wire::get_str16(r);
            auto partition = r.u16();
            auto from = r.u64();
            auto max = r.u32();
            wire::put_records(w, broker_.fetch(topic, partition, from, max));
            break;
          }
          case Opcode::Subscribe: {
            sub_topic = wire::get_str16(r);
            auto group = wire::get_str16(r);
            sub = broker_.subscribe(sub_topic, group);
            break;
          }
          case Opcode::CreateTopic: {
            TopicSpec spec;
            spec.name = wire::get_str16(r);
            spec.partitions = r.u16();
            spec.replication_factor = r.u8();
            const auto q = r.u8();
            if (q > static_cast<std::uint8_t>(QosClass::Video)) fail(Errc::MalformedMessage, "bad qos class");
            spec.qos = static_cast<QosClass>(q);
            broker_.create_topic(spec);
            break;
          }
          case Opcode::Admin: {
            const auto action = static_cast<wire::AdminAction>(r.u8());
            auto topic = wire::get_str16(r);
            auto partition = r.u16();
            auto replica = r.u8();
            if (action == wire::AdminAction::Kill)
              broker_.kill_replica(topic, partition, replica);
            else if (action == wire::AdminAction::Revive)
              broker_.revive_replica(topic, partition, replica);
            else if (action == wire::AdminAction::Describe)
              w.raw(wire::describe_to_json(broker_.describe()));
            else
              fail(Errc::MalformedMessage, "unknown admin action");
            break;
          }
          default:
            fail(Errc::MalformedMessage, "unknown opcode " + std::to_string(req->code));
        }
      } catch (const Error& e) {
        auto msg = bare_message(e);
        wire::write_frame(s, static_cast<std::uint8_t>(static_cast<int>(e.code()) + 1), as_bytes(msg));
        continue;
      }
      wire::write_frame(s, 0, resp);
      if (sub) {
        stream_subscription(s, *sub, sub_topic, st);
        return;
      }
    }
  } catch (const Error&) {
    // Peer went away or sent garbage; drop the connection.
  }
}

void BrokerServer::stream_subscription(net::TcpStream& s, RecordStream& rs, const std::string& topic,
                                       std::stop_token st) {
  Bytes buf;
  while (!st.stop_requested()) {
    auto batch = rs.poll(100ms);
    if (batch.empty()) {
      // The client never writes on a subscription; readability means EOF.
      if (s.wait_readable(0ms)) return;
      continue;
    }
    buf.clear();
    ByteWriter w(buf);
    wire::put_records(w, batch);
    wire::write_frame(s, 0, buf);
  }
}

}  // namespace smv::broker
