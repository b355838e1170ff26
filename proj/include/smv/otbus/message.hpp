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
#include <string>
#include <variant>
#include <vector>

#include "smv/common/bytes.hpp"

namespace smv::otbus {

inline constexpr std::size_t kMaxDatagram = 1400;
inline constexpr std::size_t kMaxNameLen = 255;
inline constexpr std::size_t kMaxStrLen = 255;
inline constexpr std::uint8_t kWireVersion = 1;
/// version | publisherId | writerId | sequenceNumber | tsUnixNs | fieldCount
inline constexpr std::size_t kHeaderSize = 1 + 2 + 2 + 4 + 8 + 2;

enum class FieldTag : std::uint8_t { F64 = 0, I64 = 1, Bool = 2, Str = 3 };

/// Variant index equals the wire tag.
using FieldValue = std::variant<double, std::int64_t, bool, std::string>;

inline FieldTag tag_of(const FieldValue& v) noexcept { return static_cast<FieldTag>(v.index()); }

/// Numeric view of F64/I64/Bool values; false for Str.
bool as_number(const FieldValue& v, double& out) noexcept;

struct Field {
  std::string name;
  FieldValue value;

  // F64 payloads compare bitwise so NaN payloads survive round-trip checks.
  friend bool operator==(const Field& a, const Field& b) noexcept;
};

struct DataSetMessage {
  std::uint16_t publisher_id = 0;
  std::uint16_t writer_id = 0;
  std::uint32_t sequence_number = 0;
  std::uint64_t ts_unix_ns = 0;
  std::vector<Field> fields;

  friend bool operator==(const DataSetMessage&, const DataSetMessage&) = default;
};

/// Encoded size of a field list (count prefix excluded).
std::size_t encoded_fields_size(const std::vector<Field>& fields) noexcept;
/// Throws InvalidArgument on name/Str length or duplicate-name violations.
void validate_fields(const std::vector<Field>& fields);

/// u16 fieldCount followed by each field. Used by the message and envelope codecs.
void write_fields(ByteWriter& w, const std::vector<Field>& fields);
/// Throws MalformedMessage on truncation, unknown tags, oversize strings or duplicate names.
std::vector<Field> read_fields(ByteReader& r);

std::size_t encoded_size(const DataSetMessage& msg) noexcept;
/// Throws OversizeMessage when the datagram would exceed 1400 bytes.
Bytes encode_network_message(const DataSetMessage& msg);
void encode_network_message(const DataSetMessage& msg, Bytes& out);
/// Accepts arbitrary bytes; throws MalformedMessage for anything but one well-formed message.
DataSetMessage decode_network_message(ByteSpan buf);

}  // namespace smv::otbus
