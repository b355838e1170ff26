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

#include "smv/otbus/asset_id.hpp"
#include "smv/otbus/message.hpp"

namespace smv::gateway {

/// What the gateway writes into the broker for each forwarded message or
/// aggregate.
///
/// Wire form (little-endian):
///   u8 version=1 | u8 assetIdLen | assetId | u16 writerId |
///   u64 otTsUnixNs | u64 gwRxUnixNs | u64 gwTxUnixNs | u16 fieldCount | fields
/// where fields use the ot-bus field codec.
struct BridgeEnvelope {
  AssetId asset;
  std::uint16_t writer_id = 0;
  std::uint64_t ot_ts_unix_ns = 0;
  std::uint64_t gw_rx_unix_ns = 0;
  std::uint64_t gw_tx_unix_ns = 0;
  std::vector<otbus::Field> fields;

  friend bool operator==(const BridgeEnvelope&, const BridgeEnvelope&) = default;
};

inline constexpr std::uint8_t kEnvelopeVersion = 1;

/// Throws InvalidArgument for field invariant violations.
Bytes encode_envelope(const BridgeEnvelope& env);
void encode_envelope(const BridgeEnvelope& env, Bytes& out);
/// Throws MalformedMessage.
BridgeEnvelope decode_envelope(ByteSpan buf);

}  // namespace smv::gateway
