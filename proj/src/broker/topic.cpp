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

#include "smv/broker/topic.hpp"

namespace smv::broker {

std::string_view to_string(QosClass q) noexcept {
  switch (q) {
    case QosClass::Control: return "Control";
    case QosClass::Monitoring: return "Monitoring";
    case QosClass::SensorData: return "SensorData";
    case QosClass::Video: return "Video";
  }
  return "SensorData";
}

QosClass qos_from_string(std::string_view s) {
  if (s == "Control") return QosClass::Control;
  if (s == "Monitoring") return QosClass::Monitoring;
  if (s == "SensorData") return QosClass::SensorData;
  if (s == "Video") return QosClass::Video;
  fail(Errc::InvalidArgument, "unknown qosClass '" + std::string(s) + "'");
}

void validate_policy(const TopicSpec& spec) {
  if (spec.name.empty() || spec.name.size() > 255) fail(Errc::PolicyViolation, "topic name must be 1..255 bytes");
  for (char c : spec.name)
    if (c == '/' || c == '\0') fail(Errc::PolicyViolation, "topic name contains '/' or NUL");
  if (spec.name == "." || spec.name == "..") fail(Errc::PolicyViolation, "reserved topic name");
  if (spec.partitions < 1) fail(Errc::PolicyViolation, "partitions must be >= 1");
  if (spec.replication_factor < 1) fail(Errc::PolicyViolation, "replicationFactor must be >= 1");
  if (spec.qos == QosClass::Control || spec.qos == QosClass::Monitoring) {
    if (spec.partitions != 1)
      fail(Errc::PolicyViolation, std::string(to_string(spec.qos)) + " topics must have exactly one partition");
    if (spec.replication_factor < 2)
      fail(Errc::PolicyViolation, std::string(to_string(spec.qos)) + " topics need replicationFactor >= 2");
  }
}

void write_record_frame(ByteWriter& w, std::uint64_t offset, std::uint64_t ts, ByteSpan key, ByteSpan payload) {
  w.u32(static_cast<std::uint32_t>(8 + 8 + 2 + key.size() + payload.size()));
  w.u64(offset);
  w.u64(ts);
  w.u16(static_cast<std::uint16_t>(key.size()));
  w.raw(key);
  w.raw(payload);
}

bool read_record_frame(ByteReader& r, Record& out, Errc errc) {
  if (r.done()) return false;
  ByteReader head(r.raw(4), errc);
  const std::uint32_t len = head.u32();
  if (len < 18) fail(errc, "record frame shorter than its header");
  ByteReader body(r.raw(len), errc);
  out.offset = body.u64();
  out.ts_unix_ns = body.u64();
  const auto key_len = body.u16();
  auto key = body.raw(key_len);
  out.key.assign(key.begin(), key.end());
  auto payload = body.raw(body.remaining());
  out.payload.assign(payload.begin(), payload.end());
  return true;
}

}  // namespace smv::broker
