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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "smv/common/bytes.hpp"

namespace smv::broker {

enum class QosClass : std::uint8_t { Control = 0, Monitoring = 1, SensorData = 2, Video = 3 };

std::string_view to_string(QosClass q) noexcept;
/// Accepts the enum spelling ("SensorData") case-sensitively. Throws InvalidArgument.
QosClass qos_from_string(std::string_view s);

struct TopicSpec {
  std::string name;
  std::uint16_t partitions = 1;
  std::uint8_t replication_factor = 1;
  QosClass qos = QosClass::SensorData;

  friend bool operator==(const TopicSpec&, const TopicSpec&) = default;
};

/// Replication default for Control/Monitoring topics when a config omits it.
inline constexpr std::uint8_t kDefaultCriticalReplication = 3;

/// Enforces the per-class partition/replication table:
///   Control, Monitoring: exactly one partition, replicationFactor >= 2
///   SensorData, Video:   partitions >= 1, replicationFactor >= 1
/// Throws PolicyViolation.
void validate_policy(const TopicSpec& spec);

enum class AckLevel : std::uint8_t { LeaderOnly = 0, Quorum = 1 };

/// ceil((rf + 1) / 2) replica appends before a Quorum ack.
constexpr std::uint32_t quorum_size(std::uint32_t replication_factor) noexcept {
  return (replication_factor + 2) / 2;
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(ByteSpan data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : data) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// FNV-1a 64 of the key modulo the partition count.
constexpr std::uint16_t partition_for_key(ByteSpan key, std::uint16_t partitions) noexcept {
  return partitions <= 1 ? 0 : static_cast<std::uint16_t>(fnv1a64(key) % partitions);
}

struct Record {
  std::string topic;
  std::uint16_t partition = 0;
  std::uint64_t offset = 0;
  Bytes key;
  std::uint64_t ts_unix_ns = 0;
  Bytes payload;

  friend bool operator==(const Record&, const Record&) = default;
};

struct ProduceResult {
  std::uint16_t partition = 0;
  /// Offset of the first record written by the call.
  std::uint64_t offset = 0;
};

/// Segment framing: u32 length | u64 offset | u64 tsUnixNs | u16 keyLen | key | payload.
/// `length` counts the bytes after itself.
void write_record_frame(ByteWriter& w, std::uint64_t offset, std::uint64_t ts, ByteSpan key, ByteSpan payload);
/// Reads one frame. Returns false on a clean end of input; throws `errc` on a torn frame.
bool read_record_frame(ByteReader& r, Record& out, Errc errc = Errc::MalformedMessage);

}  // namespace smv::broker
