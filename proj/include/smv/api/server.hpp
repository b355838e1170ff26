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

#include <memory>
#include <thread>
#include <vector>

#include "smv/api/router.hpp"

namespace smv::api {

inline constexpr const char* kEventsProtocol = "events.v1";
inline constexpr const char* kVideoProtocol = "video.v1";

/// HTTP/WebSocket front end of a running stack.
///
/// WS /events (subprotocol events.v1) pushes JSON text messages:
///   {"type": "stats", "topology": {...}}   once per second
///   {"type": "fusion", "ruleId", "assetId", "variable", "value", "flagged", "tsUnixNs"}
/// WS /video (subprotocol video.v1) pushes the newest rendered frame as a
/// binary message whenever it changes (see encode_video_message).
/// Unauthorized WebSocket clients are accepted and closed with code 1008.
///
/// Must be stopped before the stack it serves is destroyed.
class OperatorApi {
 public:
  /// Throws BindError.
  OperatorApi(stack::Stack& stack, const net::Endpoint& ep, std::size_t threads = 2);
  ~OperatorApi();
  OperatorApi(const OperatorApi&) = delete;
  OperatorApi& operator=(const OperatorApi&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

}  // namespace smv::api
