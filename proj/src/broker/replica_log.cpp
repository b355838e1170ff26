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

#include "smv/broker/replica_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

namespace smv::broker {

RecordArena::RecordArena() : dir_(new std::atomic<Chunk*>[kMaxChunks]) {
  for (std::size_t i = 0; i < kMaxChunks; ++i) dir_[i].store(nullptr, std::memory_order_relaxed);
}

RecordArena::~RecordArena() {
  for (std::size_t i = 0; i < kMaxChunks; ++i) delete dir_[i].load(std::memory_order_relaxed);
}

void RecordArena::push(Record r) {
  const std::uint64_t n = size_.load(std::memory_order_relaxed);
  const std::size_t chunk = n >> kChunkBits;
  if (chunk >= kMaxChunks) fail(Errc::InvalidArgument, "partition log capacity exhausted");
  Chunk* c = dir_[chunk].load(std::memory_order_relaxed);
  if (!c) {
    c = new Chunk;
    dir_[chunk].store(c, std::memory_order_release);
  }
  c->slots[n & (kChunkSize - 1)] = std::move(r);
  size_.store(n + 1, std::memory_order_release);
}

const Record& RecordArena::at(std::uint64_t i) const noexcept {
  return dir_[i >> kChunkBits].load(std::memory_order_acquire)->slots[i & (kChunkSize - 1)];
}

ReplicaLog::ReplicaLog(std::string topic, std::uint16_t partition, std::filesystem::path dir, bool sync_writes)
    : topic_(std::move(topic)), partition_(partition), sync_(sync_writes) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  path_ = dir / "00000000000000000000.log";
  if (std::filesystem::exists(path_)) replay();
  fd_.reset(::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644));
  if (!fd_.valid()) fail(Errc::SetupFailure, "open " + path_.string() + ": " + std::strerror(errno));
}

void ReplicaLog::replay() {
  std::ifstream in(path_, std::ios::binary);
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(data);
  std::size_t good = 0;
  try {
    Record rec;
    while (read_record_frame(r, rec)) {
      if (rec.offset != arena_.size()) break;
      rec.topic = topic_;
      rec.partition = partition_;
      arena_.push(rec);
      good = r.position();
    }
  } catch (const Error&) {
  }
  if (good != data.size()) std::filesystem::resize_file(path_, good);
}

void ReplicaLog::append(const Record& r) {
  if (fd_.valid()) {
    scratch_.clear();
    ByteWriter w(scratch_);
    write_record_frame(w, r.offset, r.ts_unix_ns, r.key, r.payload);
    std::size_t off = 0;
    while (off < scratch_.size()) {
      auto n = ::write(fd_.get(), scratch_.data() + off, scratch_.size() - off);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) fail(Errc::SetupFailure, "segment write: " + std::string(std::strerror(errno)));
      off += static_cast<std::size_t>(n);
    }
    if (sync_) ::fdatasync(fd_.get());
  }
  arena_.push(r);
}

}  // namespace smv::broker
