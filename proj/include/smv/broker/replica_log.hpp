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

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "smv/broker/topic.hpp"
#include "smv/common/net.hpp"

namespace smv::broker {

/// Append-only record storage with a published size. One writer at a time;
/// readers never lock and see every record below size().
class RecordArena {
 public:
  static constexpr std::size_t kChunkBits = 12;
  static constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;
  static constexpr std::size_t kMaxChunks = std::size_t{1} << 14;

  RecordArena();
  ~RecordArena();
  RecordArena(const RecordArena&) = delete;
  RecordArena& operator=(const RecordArena&) = delete;

  /// Caller serializes pushes.
  void push(Record r);
  std::uint64_t size() const noexcept { return size_.load(std::memory_order_acquire); }
  /// Valid for i < size().
  const Record& at(std::uint64_t i) const noexcept;

 private:
  struct Chunk {
    Record slots[kChunkSize];
  };
  std::unique_ptr<std::atomic<Chunk*>[]> dir_;
  std::atomic<std::uint64_t> size_{0};
};

/// One replica of one partition: an in-memory arena mirrored to a segment
/// file when a directory is configured.
class ReplicaLog {
 public:
  /// `dir` empty keeps the replica memory-only. Existing segment contents
  /// are replayed; a torn trailing frame is truncated away.
  ReplicaLog(std::string topic, std::uint16_t partition, std::filesystem::path dir, bool sync_writes);

  void append(const Record& r);
  std::uint64_t size() const noexcept { return arena_.size(); }
  const Record& at(std::uint64_t i) const noexcept { return arena_.at(i); }
  const std::filesystem::path& segment_path() const noexcept { return path_; }

  bool live() const noexcept { return live_.load(std::memory_order_acquire); }
  void set_live(bool v) noexcept { live_.store(v, std::memory_order_release); }

 private:
  void replay();

  std::string topic_;
  std::uint16_t partition_;
  std::filesystem::path path_;
  bool sync_;
  net::Fd fd_;
  RecordArena arena_;
  std::atomic<bool> live_{true};
  Bytes scratch_;
};

}  // namespace smv::broker
