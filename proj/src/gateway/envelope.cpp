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

#include "smv/gateway/envelope.hpp"

namespace smv::gateway {

void encode_envelope(const BridgeEnvelope& env, Bytes& out) {
  otbus::validate_fields(env.fields);
  const auto id = env.asset.str();
  if (id.size() > 255) fail(Errc::InvalidArgument, "asset id longer than 255 bytes");
  out.clear();
  out.reserve(2 + id.size() + 2 + 24 + 2 + otbus::encoded_fields_size(env.fields));
  ByteWriter w(out);
  w.u8(kEnvelopeVersion);
  w.u8(static_cast<std::uint8_t>(id.size()));
  w.raw(id);
  w.u16(env.writer_id);
  w.u64(env.ot_ts_unix_ns);
  w.u64(env.gw_rx_unix_ns);
  w.u64(env.gw_tx_unix_ns);
  otbus::write_fields(w, env.fields);
}

Bytes encode_envelope(const BridgeEnvelope& env) {
  Bytes out;
  encode_envelope(env, out);
  return out;
}

BridgeEnvelope decode_envelope(ByteSpan buf) {
  ByteReader r(buf);
  if (r.u8() != kEnvelopeVersion) fail(Errc::MalformedMessage, "unknown envelope version");
  BridgeEnvelope env;
  const auto len = r.u8();
  try {
    env.asset = AssetId::parse(r.str(len));
  } catch (const Error& e) {
    if (e.code() != Errc::InvalidArgument) throw;
    fail(Errc::MalformedMessage, e.what());
  }
  env.writer_id = r.u16();
  env.ot_ts_unix_ns = r.u64();
  env.gw_rx_unix_ns = r.u64();
  env.gw_tx_unix_ns = r.u64();
  env.fields = otbus::read_fields(r);
  if (!r.done()) fail(Errc::MalformedMessage, "trailing bytes after envelope");
  return env;
}

}  // namespace smv::gateway
