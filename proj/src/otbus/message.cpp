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

#include "smv/otbus/message.hpp"

#include <algorithm>
#include <bit>
#include <unordered_set>

namespace smv::otbus {

bool as_number(const FieldValue& v, double& out) noexcept {
  switch (tag_of(v)) {
    case FieldTag::F64: out = std::get<double>(v); return true;
    case FieldTag::I64: out = static_cast<double>(std::get<std::int64_t>(v)); return true;
    case FieldTag::Bool: out = std::get<bool>(v) ? 1.0 : 0.0; return true;
    case FieldTag::Str: return false;
  }
  return false;
}

bool operator==(const Field& a, const Field& b) noexcept {
  if (a.name != b.name || a.value.index() != b.value.index()) return false;
  if (tag_of(a.value) == FieldTag::F64)
    return std::bit_cast<std::uint64_t>(std::get<double>(a.value)) ==
           std::bit_cast<std::uint64_t>(std::get<double>(b.value));
  return a.value == b.value;
}

std::size_t encoded_fields_size(const std::vector<Field>& fields) noexcept {
  std::size_t n = 0;
  for (const auto& f : fields) {
    n += 1 + f.name.size() + 1;
    switch (tag_of(f.value)) {
      case FieldTag::F64:
      case FieldTag::I64: n += 8; break;
      case FieldTag::Bool: n += 1; break;
      case FieldTag::Str: n += 2 + std::get<std::string>(f.value).size(); break;
    }
  }
  return n;
}

void validate_fields(const std::vector<Field>& fields) {
  if (fields.size() > 0xFFFF) fail(Errc::InvalidArgument, "too many fields");
  std::unordered_set<std::string_view> seen;
  for (const auto& f : fields) {
    if (f.name.size() > kMaxNameLen) fail(Errc::InvalidArgument, "field name longer than 255 bytes");
    if (tag_of(f.value) == FieldTag::Str && std::get<std::string>(f.value).size() > kMaxStrLen)
      fail(Errc::InvalidArgument, "Str field '" + f.name + "' longer than 255 bytes");
    if (!seen.insert(f.name).second) fail(Errc::InvalidArgument, "duplicate field name '" + f.name + "'");
  }
}

void write_fields(ByteWriter& w, const std::vector<Field>& fields) {
  w.u16(static_cast<std::uint16_t>(fields.size()));
  for (const auto& f : fields) {
    w.u8(static_cast<std::uint8_t>(f.name.size()));
    w.raw(f.name);
    w.u8(static_cast<std::uint8_t>(tag_of(f.value)));
    switch (tag_of(f.value)) {
      case FieldTag::F64: w.f64(std::get<double>(f.value)); break;
      case FieldTag::I64: w.i64(std::get<std::int64_t>(f.value)); break;
      case FieldTag::Bool: w.u8(std::get<bool>(f.value) ? 1 : 0); break;
      case FieldTag::Str: {
        const auto& s = std::get<std::string>(f.value);
        w.u16(static_cast<std::uint16_t>(s.size()));
        w.raw(s);
        break;
      }
    }
  }
}

std::vector<Field> read_fields(ByteReader& r) {
  const std::uint16_t count = r.u16();
  std::vector<Field> fields;
  fields.reserve(std::min<std::size_t>(count, r.remaining() / 3 + 1));
  std::unordered_set<std::string> seen;
  for (std::uint16_t i = 0; i < count; ++i) {
    Field f;
    f.name = r.str(r.u8());
    switch (r.u8()) {
      case 0: f.value = r.f64(); break;
      case 1: f.value = r.i64(); break;
      case 2: {
        auto b = r.u8();
        if (b > 1) fail(Errc::MalformedMessage, "Bool payload not 0/1");
        f.value = b == 1;
        break;
      }
      case 3: {
        auto len = r.u16();
        if (len > kMaxStrLen) fail(Errc::MalformedMessage, "Str payload longer than 255 bytes");
        f.value = r.str(len);
        break;
      }
      default: fail(Errc::MalformedMessage, "unknown field tag");
    }
    if (!seen.insert(f.name).second) fail(Errc::MalformedMessage, "duplicate field name '" + f.name + "'");
    fields.push_back(std::move(f));
  }
  return fields;
}

std::size_t encoded_size(const DataSetMessage& msg) noexcept { return kHeaderSize + encoded_fields_size(msg.fields); }

void encode_network_message(const DataSetMessage& msg, Bytes& out) {
  const std::size_t size = encoded_size(msg);
  if (size > kMaxDatagram)
    fail(Errc::OversizeMessage, "encoded message is " + std::to_string(size) + " bytes (limit 1400)");
  validate_fields(msg.fields);
  out.clear();
  out.reserve(size);
  ByteWriter w(out);
  w.u8(kWireVersion);
  w.u16(msg.publisher_id);
  w.u16(msg.writer_id);
  w.u32(msg.sequence_number);
  w.u64(msg.ts_unix_ns);
  write_fields(w, msg.fields);
}

Bytes encode_network_message(const DataSetMessage& msg) {
  Bytes out;
  encode_network_message(msg, out);
  return out;
}

DataSetMessage decode_network_message(ByteSpan buf) {
  if (buf.size() > kMaxDatagram) fail(Errc::MalformedMessage, "datagram exceeds 1400 bytes");
  ByteReader r(buf);
  if (r.u8() != kWireVersion) fail(Errc::MalformedMessage, "unsupported version");
  DataSetMessage m;
  m.publisher_id = r.u16();
  m.writer_id = r.u16();
  m.sequence_number = r.u32();
  m.ts_unix_ns = r.u64();
  m.fields = read_fields(r);
  if (!r.done()) fail(Errc::MalformedMessage, "trailing bytes after last field");
  return m;
}

}  // namespace smv::otbus
