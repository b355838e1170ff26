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

#include "smv/broker/broker.hpp"

#include <algorithm>

#include "smv/common/clock.hpp"

namespace smv::broker {

struct Broker::Partition {
  std::uint16_t index = 0;
  std::mutex append_mu;
  std::vector<std::unique_ptr<ReplicaLog>> replicas;
  std::atomic<std::uint64_t> hwm{0};

  // Any live replica holds every record below hwm.
  const ReplicaLog* reader() const noexcept {
    for (const auto& r : replicas)
      if (r->live()) return r.get();
    return nullptr;
  }
};

struct Broker::Group {
  std::mutex mu;
  std::vector<std::uint64_t> members;
  std::uint64_t next_member = 0;
  std::vector<std::uint64_t> positions;
};

struct Broker::Topic {
  TopicSpec spec;
  std::vector<std::unique_ptr<Partition>> partitions;

  std::mutex notify_mu;
  std::condition_variable cv;
  std::uint64_t version = 0;

  std::mutex groups_mu;
  std::map<std::string, std::shared_ptr<Group>> groups;

  void notify() {
    {
      std::lock_guard lk(notify_mu);
      ++version;
    }
    cv.notify_all();
  }
};

class GroupStream final : public RecordStream {
 public:
  GroupStream(std::shared_ptr<Broker::Topic> topic, std::shared_ptr<Broker::Group> group)
      : topic_(std::move(topic)), group_(std::move(group)) {
    std::lock_guard lk(group_->mu);
    id_ = group_->next_member++;
    group_->members.push_back(id_);
  }

  ~GroupStream() override {
    std::lock_guard lk(group_->mu);
    std::erase(group_->members, id_);
  }

  std::vector<std::uint16_t> assigned_partitions() override {
    std::lock_guard lk(group_->mu);
    return assigned_locked();
  }

  std::vector<Record> poll(std::chrono::milliseconds timeout, std::size_t max_records) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      std::uint64_t seen;
      {
        std::lock_guard lk(topic_->notify_mu);
        seen = topic_->version;
      }
      auto batch = collect(max_records);
      if (!batch.empty()) return batch;
      std::unique_lock lk(topic_->notify_mu);
      if (!topic_->cv.wait_until(lk, deadline, [&] { return topic_->version != seen; })) return {};
    }
  }

 private:
  // Static round-robin: partition p belongs to the member at index p % n.
  std::vector<std::uint16_t> assigned_locked() const {
    const auto& m = group_->members;
    const auto idx = static_cast<std::size_t>(std::find(m.begin(), m.end(), id_) - m.begin());
    std::vector<std::uint16_t> out;
    for (std::size_t p = 0; p < topic_->partitions.size(); ++p)
      if (p % m.size() == idx) out.push_back(static_cast<std::uint16_t>(p));
    return out;
  }

  std::vector<Record> collect(std::size_t max_records) {
    std::vector<Record> out;
    std::lock_guard lk(group_->mu);
    for (auto p : assigned_locked()) {
      auto& part = *topic_->partitions[p];
      const ReplicaLog* log = part.reader();
      if (!log) continue;
      auto& pos = group_->positions[p];
      const std::uint64_t end = part.hwm.load(std::memory_order_acquire);
      while (pos < end && out.size() < max_records) out.push_back(log->at(pos++));
      if (out.size() >= max_records) break;
    }
    return out;
  }

  std::shared_ptr<Broker::Topic> topic_;
  std::shared_ptr<Broker::Group> group_;
  std::uint64_t id_ = 0;
};

Broker::Broker(BrokerOptions opts) : opts_(std::move(opts)) {}

Broker::~Broker() = default;

std::shared_ptr<Broker::Topic> Broker::find(const std::string& topic) {
  std::shared_lock lk(topics_mu_);
  auto it = topics_.find(topic);
  if (it == topics_.end()) fail(Errc::UnknownTopic, topic);
  return it->second;
}

Broker::Partition& Broker::partition_of(Topic& t, std::uint16_t partition) {
  if (partition >= t.partitions.size())
    fail(Errc::UnknownPartition, t.spec.name + "/" + std::to_string(partition));
  return *t.partitions[partition];
}

void Broker::create_topic(const TopicSpec& spec) {
  validate_policy(spec);
  std::unique_lock lk(topics_mu_);
  if (topics_.contains(spec.name)) fail(Errc::TopicExists, spec.name);
  auto t = std::make_shared<Topic>();
  t->spec = spec;
  for (std::uint16_t p = 0; p < spec.partitions; ++p) {
    auto part = std::make_unique<Partition>();
    part->index = p;
    for (std::uint8_t r = 0; r < spec.replication_factor; ++r) {
      std::filesystem::path dir;
      if (!opts_.data_dir.empty())
        dir = opts_.data_dir / spec.name / std::to_string(p) / ("replica-" + std::to_string(r));
      part->replicas.push_back(std::make_unique<ReplicaLog>(spec.name, p, dir, opts_.sync_writes));
    }
    // Every replica log is a prefix of the same record sequence, so a
    // replica that was down (or lagging) is caught up from the longest one.
    // Taking the shortest instead would lose quorum-acked records whenever a
    // killed replica is reopened.
    const ReplicaLog* longest = part->replicas.front().get();
    for (const auto& r : part->replicas)
      if (r->size() > longest->size()) longest = r.get();
    for (auto& r : part->replicas)
      for (std::uint64_t o = r->size(); o < longest->size(); ++o) r->append(longest->at(o));
    part->hwm.store(longest->size());
    t->partitions.push_back(std::move(part));
  }
  topics_.emplace(spec.name, std::move(t));
}

ProduceResult Broker::produce(const std::string& topic, ByteSpan key, ByteSpan payload, AckLevel ack) {
  Bytes one(payload.begin(), payload.end());
  return produce_batch(topic, key, std::span<const Bytes>(&one, 1), ack);
}

ProduceResult Broker::produce_batch(const std::string& topic, ByteSpan key, std::span<const Bytes> payloads,
                                    AckLevel ack) {
  auto t = find(topic);
  const std::uint16_t p = partition_for_key(key, t->spec.partitions);
  auto& part = *t->partitions[p];
  ProduceResult result{p, 0};
  {
    std::lock_guard lk(part.append_mu);
    std::uint32_t live = 0;
    for (const auto& r : part.replicas) live += r->live() ? 1 : 0;
    const std::uint32_t need = ack == AckLevel::Quorum ? quorum_size(t->spec.replication_factor) : 1;
    if (live < need)
      fail(Errc::QuorumUnavailable, topic + "/" + std::to_string(p) + ": " + std::to_string(live) + " live, need " +
                                        std::to_string(need));
    const std::uint64_t base = part.hwm.load(std::memory_order_relaxed);
    result.offset = base;
    Record rec;
    rec.topic = topic;
    rec.partition = p;
    rec.key.assign(key.begin(), key.end());
    for (std::size_t i = 0; i < payloads.size(); ++i) {
      rec.offset = base + i;
      rec.ts_unix_ns = unix_now_ns();
      rec.payload = payloads[i];
      for (auto& r : part.replicas)
        if (r->live()) r->append(rec);
    }
    part.hwm.store(base + payloads.size(), std::memory_order_release);
  }
  t->notify();
  return result;
}

std::vector<Record> Broker::fetch(const std::string& topic, std::uint16_t partition, std::uint64_t from_offset,
                                  std::uint32_t max_records) {
  auto t = find(topic);
  auto& part = partition_of(*t, partition);
  const std::uint64_t end = part.hwm.load(std::memory_order_acquire);
  if (from_offset > end)
    fail(Errc::OffsetOutOfRange, "offset " + std::to_string(from_offset) + " beyond log end " + std::to_string(end));
  const ReplicaLog* log = part.reader();
  if (!log) fail(Errc::QuorumUnavailable, topic + "/" + std::to_string(partition) + ": no live replica");
  std::vector<Record> out;
  for (std::uint64_t o = from_offset; o < end && out.size() < max_records; ++o) out.push_back(log->at(o));
  return out;
}

std::vector<Record> Broker::fetch_replica(const std::string& topic, std::uint16_t partition, std::uint8_t replica,
                                          std::uint64_t from_offset, std::uint32_t max_records) {
  auto t = find(topic);
  auto& part = partition_of(*t, partition);
  if (replica >= part.replicas.size()) fail(Errc::UnknownReplica, std::to_string(replica));
  const auto& log = *part.replicas[replica];
  const std::uint64_t end = log.size();
  if (from_offset > end) fail(Errc::OffsetOutOfRange, "offset beyond replica log end");
  std::vector<Record> out;
  for (std::uint64_t o = from_offset; o < end && out.size() < max_records; ++o) out.push_back(log.at(o));
  return out;
}

std::filesystem::path Broker::segment_path(const std::string& topic, std::uint16_t partition, std::uint8_t replica) {
  auto t = find(topic);
  auto& part = partition_of(*t, partition);
  if (replica >= part.replicas.size()) fail(Errc::UnknownReplica, std::to_string(replica));
  return part.replicas[replica]->segment_path();
}

std::uint64_t Broker::high_watermark(const std::string& topic, std::uint16_t partition) {
  auto t = find(topic);
  return partition_of(*t, partition).hwm.load(std::memory_order_acquire);
}

std::unique_ptr<RecordStream> Broker::subscribe(const std::string& topic, const std::string& group_id) {
  auto t = find(topic);
  std::shared_ptr<Group> g;
  {
    std::lock_guard lk(t->groups_mu);
    auto& slot = t->groups[group_id];
    if (!slot) {
      slot = std::make_shared<Group>();
      slot->positions.assign(t->partitions.size(), 0);
    }
    g = slot;
  }
  return std::make_unique<GroupStream>(t, g);
}

void Broker::kill_replica(const std::string& topic, std::uint16_t partition, std::uint8_t replica) {
  auto t = find(topic);
  auto& part = partition_of(*t, partition);
  if (replica >= part.replicas.size()) fail(Errc::UnknownReplica, std::to_string(replica));
  std::lock_guard lk(part.append_mu);
  part.replicas[replica]->set_live(false);
}

void Broker::revive_replica(const std::string& topic, std::uint16_t partition, std::uint8_t replica) {
  auto t = find(topic);
  auto& part = partition_of(*t, partition);
  if (replica >= part.replicas.size()) fail(Errc::UnknownReplica, std::to_string(replica));
  {
    std::lock_guard lk(part.append_mu);
    auto& target = *part.replicas[replica];
    if (target.live()) return;
    // Catch up from the current leader, or from the longest surviving log
    // when every replica is down.
    const ReplicaLog* source = part.reader();
    if (!source)
      for (const auto& r : part.replicas)
        if (!source || r->size() > source->size()) source = r.get();
    for (std::uint64_t o = target.size(); o < source->size(); ++o) target.append(source->at(o));
    target.set_live(true);
    part.hwm.store(std::max(part.hwm.load(), target.size()), std::memory_order_release);
  }
  t->notify();
}

std::vector<TopicInfo> Broker::describe() {
  std::vector<std::shared_ptr<Topic>> all;
  {
    std::shared_lock lk(topics_mu_);
    for (const auto& [_, t] : topics_) all.push_back(t);
  }
  std::vector<TopicInfo> out;
  for (const auto& t : all) {
    TopicInfo info{t->spec, {}};
    for (const auto& p : t->partitions) {
      PartitionInfo pi{p->index, p->hwm.load(), {}};
      for (const auto& r : p->replicas) pi.replica_live.push_back(r->live());
      info.partitions.push_back(std::move(pi));
    }
    out.push_back(std::move(info));
  }
  return out;
}

}  // namespace smv::broker
