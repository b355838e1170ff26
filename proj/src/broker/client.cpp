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

#include "smv/broker/client.hpp"

#include "smv/broker/protocol.hpp"

namespace smv::broker {

using wire::Opcode;

namespace {

net::TcpStream connect_or_throw(const net::Endpoint& ep) {
  try {
    return net::TcpStream::connect(ep);
  } catch (const Error& e) {
    fail(Errc::BrokerUnavailable, e.what());
  }
}

class RemoteStream final : public RecordStream {
 public:
  RemoteStream(net::TcpStream s, std::string topic) : s_(std::move(s)), topic_(std::move(topic)) {}
  ~RemoteStream() override { s_.close(); }

  std::vector<Record> poll(std::chrono::milliseconds timeout, std::size_t max_records) override {
    // Batches are delivered whole; max_records is advisory for remote streams.
    std::vector<Record> out;
    if (!s_.wait_readable(timeout)) return out;
    auto f = wire::read_frame(s_);
    if (!f) fail(Errc::BrokerUnavailable, "subscription closed by broker");
    if (f->code != 0) wire::raise(*f);
    ByteReader r(f->body);
    out = wire::get_records(r, topic_);
    return out;
  }

  std::vector<std::uint16_t> assigned_partitions() override {
    fail(Errc::InvalidArgument, "partition assignment is not exposed over the wire");
  }

 private:
  net::TcpStream s_;
  std::string topic_;
};

}  // namespace

BrokerClient::BrokerClient(net::Endpoint ep) : ep_(std::move(ep)), conn_(connect_or_throw(ep_)) {}

Bytes BrokerClient::call(std::uint8_t op, const Bytes& body) {
  std::lock_guard lk(mu_);
  std::optional<wire::Frame> f;
  try {
    if (!conn_.valid()) conn_ = connect_or_throw(ep_);
    wire::write_frame(conn_, op, body);
    f = wire::read_frame(conn_);
  } catch (const Error& e) {
    if (e.code() != Errc::SocketError) throw;
    conn_ = net::TcpStream();
    fail(Errc::BrokerUnavailable, e.what());
  }
  if (!f) {
    conn_ = net::TcpStream();
    fail(Errc::BrokerUnavailable, "connection closed by broker");
  }
  if (f->code != 0) wire::raise(*f);
  return std::move(f->body);
}

void BrokerClient::create_topic(const TopicSpec& spec) {
  Bytes body;
  ByteWriter w(body);
  wire::put_str16(w, spec.name);
  w.u16(spec.partitions);
  w.u8(spec.replication_factor);
  w.u8(static_cast<std::uint8_t>(spec.qos));
  call(static_cast<std::uint8_t>(Opcode::CreateTopic), body);
}

ProduceResult BrokerClient::produce(const std::string& topic, ByteSpan key, ByteSpan payload, AckLevel ack) {
  Bytes one(payload.begin(), payload.end());
  return produce_batch(topic, key, std::span<const Bytes>(&one, 1), ack);
}

ProduceResult BrokerClient::produce_batch(const std::string& topic, ByteSpan key, std::span<const Bytes> payloads,
                                          AckLevel ack) {
  Bytes body;
  ByteWriter w(body);
  wire::put_str16(w, topic);
  wire::put_bytes32(w, key);
  w.u8(static_cast<std::uint8_t>(ack));
  w.u32(static_cast<std::uint32_t>(payloads.size()));
  for (const auto& p : payloads) wire::put_bytes32(w, p);
  auto resp = call(static_cast<std::uint8_t>(Opcode::Produce), body);
  ByteReader r(resp);
  ProduceResult res;
  res.partition = r.u16();
  res.offset = r.u64();
  return res;
}

std::vector<Record> BrokerClient::fetch(const std::string& topic, std::uint16_t partition, std::uint64_t from_offset,
                                        std::uint32_t max_records) {
  Bytes body;
  ByteWriter w(body);
  wire::put_str16(w, topic);
  w.u16(partition);
  w.u64(from_offset);
  w.u32(max_records);
  auto resp = call(static_cast<std::uint8_t>(Opcode::Fetch), body);
  ByteReader r(resp);
  return wire::get_records(r, topic);
}

std::unique_ptr<RecordStream> BrokerClient::subscribe(const std::string& topic, const std::string& group_id) {
  auto s = connect_or_throw(ep_);
  Bytes body;
  ByteWriter w(body);
  wire::put_str16(w, topic);
  wire::put_str16(w, group_id);
  wire::write_frame(s, static_cast<std::uint8_t>(Opcode::Subscribe), body);
  auto f = wire::read_frame(s);
  if (!f) fail(Errc::BrokerUnavailable, "connection closed by broker");
  if (f->code != 0) wire::raise(*f);
  return std::make_unique<RemoteStream>(std::move(s), topic);
}

void BrokerClient::admin(std::uint8_t action, const std::string& topic, std::uint16_t partition,
                         std::uint8_t replica) {
  Bytes body;
  ByteWriter w(body);
  w.u8(action);
  wire::put_str16(w, topic);
  w.u16(partition);
  w.u8(replica);
  call(static_cast<std::uint8_t>(Opcode::Admin), body);
}

void BrokerClient::kill_replica(const std::string& topic, std::uint16_t partition, std::uint8_t replica) {
  admin(static_cast<std::uint8_t>(wire::AdminAction::Kill), topic, partition, replica);
}

void BrokerClient::revive_replica(const std::string& topic, std::uint16_t partition, std::uint8_t replica) {
  admin(static_cast<std::uint8_t>(wire::AdminAction::Revive), topic, partition, replica);
}

std::vector<TopicInfo> BrokerClient::describe() {
  Bytes body;
  ByteWriter w(body);
  w.u8(static_cast<std::uint8_t>(wire::AdminAction::Describe));
  wire::put_str16(w, "");
  w.u16(0);
  w.u8(0);
  auto resp = call(static_cast<std::uint8_t>(Opcode::Admin), body);
  return wire::describe_from_json(as_string(resp));
}

}  // namespace smv::broker
