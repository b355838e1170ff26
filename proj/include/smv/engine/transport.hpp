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

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <utility>

#include "smv/common/net.hpp"
#include "smv/engine/frame.hpp"

namespace smv::engine {

enum class TransportKind : std::uint8_t { Datagram, LocalZeroCopy };

/// "datagram", "zerocopy".
std::string_view to_string(TransportKind k) noexcept;
/// Also accepts "LocalZeroCopy"/"Datagram" in any case. Throws InvalidArgument.
TransportKind transport_from_string(std::string_view s);

struct TransportStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_received = 0;
  /// Frames abandoned because chunks never arrived.
  std::uint64_t incomplete = 0;
  /// Frames that arrived whole but failed the crc check; never delivered.
  std::uint64_t corrupt = 0;
  std::uint64_t chunks_sent = 0;
  std::uint64_t chunks_dropped = 0;
  /// Times the sender gave up waiting for credit and resynchronised.
  std::uint64_t credit_timeouts = 0;
};

class FrameSender {
 public:
  virtual ~FrameSender() = default;
  /// Takes ownership of the frame. Throws TransportClosed.
  virtual void send(Frame&& frame) = 0;
  /// Idempotent; the receiver sees TransportClosed once it has drained.
  virtual void close() = 0;
  virtual TransportStats stats() const = 0;
  /// A frame whose bytes are already on the wire, returned for reuse.
  /// Transports that hand the buffer to the receiver never return one.
  virtual std::optional<Frame> reclaim() { return std::nullopt; }
};

class FrameReceiver {
 public:
  virtual ~FrameReceiver() = default;
  /// Next intact frame, or nullopt when none arrives within `timeout`.
  /// Throws FrameIncomplete (once per lost frame) and TransportClosed.
  virtual std::optional<Frame> recv(std::chrono::milliseconds timeout) = 0;
  /// Hands a consumed frame's buffer back for reuse.
  virtual void recycle(Frame&& frame) { (void)frame; }
  virtual void close() = 0;
  virtual TransportStats stats() const = 0;
};

struct TransportPair {
  std::unique_ptr<FrameSender> sender;
  std::unique_ptr<FrameReceiver> receiver;
};

/// Same-host handoff: frames move through a bounded queue of `depth`
/// slots; the payload buffer changes owner, no byte is copied or encoded.
/// Receiver-side crc verification still reads every byte.
TransportPair make_local_zero_copy(std::size_t depth = 2);

/// Datagram framing: every datagram starts with
///   u64 seq | u32 chunkIdx | u32 chunkCount      (little-endian, 16 bytes)
/// The chunk stream of one frame is a 24-byte descriptor
///   u32 width | u32 height | u64 captureNs | u32 crc | u32 payloadLen
/// followed by the payload, cut into pieces of max_datagram - 16 bytes.
/// chunkCount = 0 announces the end of the stream.
/// The receiver acknowledges with a bare header naming the latest chunk it
/// has seen; the sender keeps at most `window_chunks` unacknowledged.
inline constexpr std::size_t kChunkHeaderSize = 16;
inline constexpr std::size_t kFrameDescriptorSize = 24;

struct DatagramOptions {
  std::size_t max_datagram = 1400;
  std::size_t window_chunks = 1024;
  std::size_t ack_every = 64;
  std::chrono::milliseconds credit_timeout{50};
  /// A frame with missing chunks is abandoned after this much silence.
  std::chrono::milliseconds reassembly_timeout{200};
  int socket_buffer_bytes = 4 << 20;
  /// Fault injection: return true to skip sending (seq, chunkIdx).
  std::function<bool(std::uint64_t seq, std::uint32_t chunk)> drop;
};

/// Throws InvalidArgument for max_datagram outside [64, 65507].
std::unique_ptr<FrameSender> make_datagram_sender(const net::Endpoint& dest, DatagramOptions opts = {});
/// Binds `local` (port 0 = ephemeral); the chosen port is reported through `port`.
std::unique_ptr<FrameReceiver> make_datagram_receiver(const net::Endpoint& local, std::uint16_t& port,
                                                      DatagramOptions opts = {});
/// A connected loopback sender/receiver pair.
TransportPair make_datagram_loopback(DatagramOptions opts = {});

TransportPair make_transport(TransportKind kind);

}  // namespace smv::engine
