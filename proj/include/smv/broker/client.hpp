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

#include <mutex>

#include "smv/broker/broker.hpp"
#include "smv/common/net.hpp"

namespace smv::broker {

/// BrokerApi over the TCP protocol. Calls are serialized on one connection;
/// each subscription opens its own connection.
class BrokerClient final : public BrokerApi {
 public:
  /// Throws BrokerUnavailable when the broker cannot be reached.
  explicit BrokerClient(net::Endpoint ep);

  void create_topic(const TopicSpec& spec) override;
  ProduceResult produce(const std::string& topic, ByteSpan key, ByteSpan payload, AckLevel ack) override;
  ProduceResult produce_batch(const std::string& topic, ByteSpan key, std::span<const Bytes> payloads,
                              AckLevel ack) override;
  std::vector<Record> fetch(const std::string& topic, std::uint16_t partition, std::uint64_t from_offset,
                            std::uint32_t max_records) override;
  std::unique_ptr<RecordStream> subscribe(const std::string& topic, const std::string& group_id) override;
  void kill_replica(const std::string& topic, std::uint16_t partition, std::uint8_t replica) override;
  void revive_replica(const std::string& topic, std::uint16_t partition, std::uint8_t replica) override;
  std::vector<TopicInfo> describe() override;

 private:
  Bytes call(std::uint8_t op, const Bytes& body);
  void admin(std::uint8_t action, const std::string& topic, std::uint16_t partition, std::uint8_t replica);

  net::Endpoint ep_;
  std::mutex mu_;
  net::TcpStream conn_;
};

}  // namespace smv::broker
