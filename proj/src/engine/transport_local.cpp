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

#include <condition_variable>
#include <deque>
#include <mutex>

#include "smv/common/error.hpp"
#include "smv/engine/transport.hpp"

namespace smv::engine {

namespace {

struct Channel {
  std::mutex mu;
  std::condition_variable not_empty, not_full;
  std::deque<Frame> slots;
  std::size_t depth;
  bool sender_closed = false;
  bool receiver_closed = false;
  TransportStats stats;

  explicit Channel(std::size_t d) : depth(d) {}
};

class LocalSender final : public FrameSender {
 public:
  explicit LocalSender(std::shared_ptr<Channel> ch) : ch_(std::move(ch)) {}
  ~LocalSender() override { close(); }

  void send(Frame&& frame) override {
    std::unique_lock lk(ch_->mu);
    ch_->not_full.wait(lk, [&] { return ch_->slots.size() < ch_->depth || ch_->receiver_closed || ch_->sender_closed; });
    if (ch_->receiver_closed || ch_->sender_closed) fail(Errc::TransportClosed, "zero-copy channel closed");
    ch_->slots.push_back(std::move(frame));
    ++ch_->stats.frames_sent;
    lk.unlock();
    ch_->not_empty.notify_one();
  }

  void close() override {
    {
      std::lock_guard lk(ch_->mu);
      ch_->sender_closed = true;
    }
    ch_->not_empty.notify_all();
    ch_->not_full.notify_all();
  }

  TransportStats stats() const override {
    std::lock_guard lk(ch_->mu);
    return ch_->stats;
  }

 private:
  std::shared_ptr<Channel> ch_;
};

class LocalReceiver final : public FrameReceiver {
 public:
  explicit LocalReceiver(std::shared_ptr<Channel> ch) : ch_(std::move(ch)) {}
  ~LocalReceiver() override { close(); }

  std::optional<Frame> recv(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      std::unique_lock lk(ch_->mu);
      if (!ch_->not_empty.wait_until(lk, deadline, [&] {
            return !ch_->slots.empty() || ch_->sender_closed || ch_->receiver_closed;
          }))
        return std::nullopt;
      if (ch_->receiver_closed || ch_->slots.empty()) fail(Errc::TransportClosed, "zero-copy channel closed");
      Frame f = std::move(ch_->slots.front());
      ch_->slots.pop_front();
      lk.unlock();
      ch_->not_full.notify_one();
      // Verified outside the lock so the sender can refill the slot meanwhile.
      const bool ok = f.intact();
      lk.lock();
      if (ok) {
        ++ch_->stats.frames_received;
        return f;
      }
      ++ch_->stats.corrupt;
    }
  }

  void close() override {
    {
      std::lock_guard lk(ch_->mu);
      ch_->receiver_closed = true;
    }
    ch_->not_empty.notify_all();
    ch_->not_full.notify_all();
  }

  TransportStats stats() const override {
    std::lock_guard lk(ch_->mu);
    return ch_->stats;
  }

 private:
  std::shared_ptr<Channel> ch_;
};

}  // namespace

TransportPair make_local_zero_copy(std::size_t depth) {
  if (depth == 0) fail(Errc::InvalidArgument, "zero-copy channel depth must be positive");
  auto ch = std::make_shared<Channel>(depth);
  return {std::make_unique<LocalSender>(ch), std::make_unique<LocalReceiver>(ch)};
}

}  // namespace smv::engine
