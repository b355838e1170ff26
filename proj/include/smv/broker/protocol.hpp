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

#include "smv/broker/broker.hpp"
#include "smv/common/net.hpp"

// Length-prefixed broker wire protocol, little-endian throughout.
//
//   request:  u8 opcode | u32 bodyLen | body
//   response: u8 status | u32 bodyLen | body
//
// status 0 is success; otherwise it is Errc + 1 and the body carries the
// error text. A subscribe connection, once acknowledged, only carries
// server-pushed record batches (status 0, fetch-response body).
namespace smv::broker::wire {

enum class Opcode : std::uint8_t { Produce = 1, Fetch = 2, Subscribe = 3, CreateTopic = 4, Admin = 5 };
enum class AdminAction : std::uint8_t { Kill = 1, Revive = 2, Describe = 3 };

inline constexpr std::uint32_t kMaxBody = 256u << 20;

struct Frame {
  std::uint8_t code = 0;
  Bytes body;
};

void write_frame(net::TcpStream& s, std::uint8_t code, ByteSpan body);
/// nullopt on orderly close. Throws MalformedMessage on oversize bodies.
std::optional<Frame> read_frame(net::TcpStream& s);

void put_str16(ByteWriter& w, std::string_view s);
std::string get_str16(ByteReader& r);
void put_bytes32(ByteWriter& w, ByteSpan b);
Bytes get_bytes32(ByteReader& r);

/// u32 count | count x (u16 partition | record frame)
void put_records(ByteWriter& w, const std::vector<Record>& records);
std::vector<Record> get_records(ByteReader& r, const std::string& topic);

std::string describe_to_json(const std::vector<TopicInfo>& topics);
std::vector<TopicInfo> describe_from_json(std::string_view json);

/// Turns a non-zero status frame back into the originating exception.
[[noreturn]] void raise(const Frame& f);

}  // namespace smv::broker::wire
