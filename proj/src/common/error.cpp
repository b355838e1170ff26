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

#include "smv/common/error.hpp"

namespace smv {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::OversizeMessage: return "OversizeMessage";
    case Errc::MalformedMessage: return "MalformedMessage";
    case Errc::SocketError: return "SocketError";
    case Errc::BindError: return "BindError";
    case Errc::TopicExists: return "TopicExists";
    case Errc::PolicyViolation: return "PolicyViolation";
    case Errc::UnknownTopic: return "UnknownTopic";
    case Errc::UnknownPartition: return "UnknownPartition";
    case Errc::OffsetOutOfRange: return "OffsetOutOfRange";
    case Errc::QuorumUnavailable: return "QuorumUnavailable";
    case Errc::UnknownReplica: return "UnknownReplica";
    case Errc::BrokerUnavailable: return "BrokerUnavailable";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::UnboundAsset: return "UnboundAsset";
    case Errc::UnknownAsset: return "UnknownAsset";
    case Errc::UnknownVariable: return "UnknownVariable";
    case Errc::UnknownBinding: return "UnknownBinding";
    case Errc::InsufficientHistory: return "InsufficientHistory";
    case Errc::NotFound: return "NotFound";
    case Errc::HashMismatch: return "HashMismatch";
    case Errc::Forbidden: return "Forbidden";
    case Errc::AnchorOutOfBounds: return "AnchorOutOfBounds";
    case Errc::MissingSeries: return "MissingSeries";
    case Errc::FrameIncomplete: return "FrameIncomplete";
    case Errc::TransportClosed: return "TransportClosed";
    case Errc::ChannelClosed: return "ChannelClosed";
    case Errc::SetupFailure: return "SetupFailure";
    case Errc::ParseError: return "ParseError";
    case Errc::NotRunning: return "NotRunning";
  }
  return "Unknown";
}

}  // namespace smv
