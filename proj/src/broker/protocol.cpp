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

#include "smv/broker/protocol.hpp"

#include <json.hpp>

namespace smv::broker::wire {

void write_frame(net::TcpStream& s, std::uint8_t code, ByteSpan body) {
  Bytes out;
  out.reserve(5 + body.size());
  ByteWriter w(out);
  w.u8(code);
  w.u32(static_cast<std::uint32_t>(body.size()));
  w.raw(body);
  s.write_all(out);
}

std::optional<Frame> read_frame(net::TcpStream& s) {
  std::uint8_t head[5];
  if (!s.read_exact(head)) return std::nullopt;
  ByteReader r(head);
  Frame f;
  f.code = r.u8();
  const auto len = r.u32();
  if (len > kMaxBody) fail(Errc::MalformedMessage, "frame body of " + std::to_string(len) + " bytes");
  f.body.resize(len);
  if (len && !s.read_exact(f.body)) fail(Errc::SocketError, "connection closed mid-frame");
  return f;
}

void put_str16(ByteWriter& w, std::string_view s) {
  if (s.size() > 0xffff) fail(Errc::InvalidArgument, "string longer than 65535 bytes");
  w.u16(static_cast<std::uint16_t>(s.size()));
  w.raw(s);
}

std::string get_str16(ByteReader& r) { return r.str(r.u16()); }

void put_bytes32(ByteWriter& w, ByteSpan b) {
  w.u32(static_cast<std::uint32_t>(b.size()));
  w.raw(b);
}

Bytes get_bytes32(ByteReader& r) {
  auto b = r.raw(r.u32());
  return Bytes(b.begin(), b.end());
}

void put_records(ByteWriter& w, const std::vector<Record>& records) {
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const auto& rec : records) {
    w.u16(rec.partition);
    write_record_frame(w, rec.offset, rec.ts_unix_ns, rec.key, rec.payload);
  }
}

std::vector<Record> get_records(ByteReader& r, const std::string& topic) {
  const auto n = r.u32();
  std::vector<Record> out;
  out.reserve(std::min<std::uint32_t>(n, 4096));
  for (std::uint32_t i = 0; i < n; ++i) {
    Record rec;
    rec.topic = topic;
    rec.partition = r.u16();
    if (!read_record_frame(r, rec)) fail(Errc::MalformedMessage, "record batch truncated");
    out.push_back(std::move(rec));
  }
  return out;
}

std::string describe_to_json(const std::vector<TopicInfo>& topics) {
  auto arr = nlohmann::json::array();
  for (const auto& t : topics) {
    auto parts = nlohmann::json::array();
    for (const auto& p : t.partitions)
      parts.push_back({{"partition", p.partition}, {"highWatermark", p.high_watermark}, {"replicaLive", p.replica_live}});
    arr.push_back({{"name", t.spec.name},
                   {"partitions", t.spec.partitions},
                   {"replicationFactor", t.spec.replication_factor},
                   {"qosClass", std::string(to_string(t.spec.qos))},
                   {"partitionState", parts}});
  }
  return arr.dump();
}

std::vector<TopicInfo> describe_from_json(std::string_view json) {
  std::vector<TopicInfo> out;
  try {
    for (const auto& t : nlohmann::json::parse(json)) {
      TopicInfo info;
      info.spec.name = t.at("name").get<std::string>();
      info.spec.partitions = t.at("partitions").get<std::uint16_t>();
      info.spec.replication_factor = t.at("replicationFactor").get<std::uint8_t>();
      info.spec.qos = qos_from_string(t.at("qosClass").get<std::string>());
      for (const auto& p : t.at("partitionState"))
        info.partitions.push_back({p.at("partition").get<std::uint16_t>(), p.at("highWatermark").get<std::uint64_t>(),
                                   p.at("replicaLive").get<std::vector<bool>>()});
      out.push_back(std::move(info));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::MalformedMessage, std::string("describe payload: ") + e.what());
  }
  return out;
}

void raise(const Frame& f) {
  const int code = f.code - 1;
  if (code < 0 || code > static_cast<int>(Errc::NotRunning)) fail(Errc::MalformedMessage, "bad response status");
  fail(static_cast<Errc>(code), std::string(as_string(f.body)));
}

}  // namespace smv::broker::wire
