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
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "smv/broker/replica_log.hpp"
#include "smv/broker/topic.hpp"

namespace smv::broker {

/// Consumer-group member stream. Each assigned partition is delivered in
/// offset order; the group tracks positions, so nothing is redelivered to
/// the group unless a member rewinds.
class RecordStream {
 public:
  virtual ~RecordStream() = default;
  /// Waits up to `timeout` for records; returns an empty batch on timeout.
  virtual std::vector<Record> poll(std::chrono::milliseconds timeout, std::size_t max_records = 1024) = 0;
  virtual std::vector<std::uint16_t> assigned_partitions() = 0;
};

struct PartitionInfo {
  std::uint16_t partition = 0;
  std::uint64_t high_watermark = 0;
  std::vector<bool> replica_live;
};

struct TopicInfo {
  TopicSpec spec;
  std::vector<PartitionInfo> partitions;
};

/// Operation set shared by the embedded broker and the TCP client.
class BrokerApi {
 public:
  virtual ~BrokerApi() = default;

  /// Throws TopicExists, PolicyViolation.
  virtual void create_topic(const TopicSpec& spec) = 0;
  /// Throws UnknownTopic, QuorumUnavailable.
  virtual ProduceResult produce(const std::string& topic, ByteSpan key, ByteSpan payload, AckLevel ack) = 0;
  /// Appends several records under one key in one call; offsets are consecutive.
  virtual ProduceResult produce_batch(const std::string& topic, ByteSpan key, std::span<const Bytes> payloads,
                                      AckLevel ack) = 0;
  /// Throws UnknownTopic, UnknownPartition, OffsetOutOfRange.
  virtual std::vector<Record> fetch(const std::string& topic, std::uint16_t partition, std::uint64_t from_offset,
                                    std::uint32_t max_records) = 0;
  /// Throws UnknownTopic.
  virtual std::unique_ptr<RecordStream> subscribe(const std::string& topic, const std::string& group_id) = 0;
  /// Throws UnknownTopic, UnknownReplica.
  virtual void kill_replica(const std::string& topic, std::uint16_t partition, std::uint8_t replica) = 0;
  virtual void revive_replica(const std::string& topic, std::uint16_t partition, std::uint8_t replica) = 0;
  virtual std::vector<TopicInfo> describe() = 0;
};

struct BrokerOptions {
  /// Root for segment files; empty keeps every log in memory.
  std::filesystem::path data_dir;
  /// fdatasync after every append.
  bool sync_writes = false;
};

/// Embedded broker. Replication is rf synchronous append targets per
/// partition inside this process, each with its own segment file.
class Broker final : public BrokerApi {
 public:
  explicit Broker(BrokerOptions opts = {});
  ~Broker() override;

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

  /// Reads one specific replica, live or not.
  std::vector<Record> fetch_replica(const std::string& topic, std::uint16_t partition, std::uint8_t replica,
                                    std::uint64_t from_offset, std::uint32_t max_records);
  std::filesystem::path segment_path(const std::string& topic, std::uint16_t partition, std::uint8_t replica);
  std::uint64_t high_watermark(const std::string& topic, std::uint16_t partition);

  struct Partition;
  struct Topic;
  struct Group;

 private:
  friend class GroupStream;

  std::shared_ptr<Topic> find(const std::string& topic);
  Partition& partition_of(Topic& t, std::uint16_t partition);

  BrokerOptions opts_;
  std::shared_mutex topics_mu_;
  std::map<std::string, std::shared_ptr<Topic>> topics_;
};

}  // namespace smv::broker
