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

#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "smv/common/bytes.hpp"

namespace smv::engine {

class Bus;

enum class ApplyResult : std::uint8_t { Applied, Stale };

struct StateEntry {
  Bytes value;
  std::uint64_t seq = 0;
  std::uint32_t actor = 0;

  friend bool operator==(const StateEntry&, const StateEntry&) = default;
};

/// Last-writer-wins map. An update wins iff its (seq, actor) is
/// lexicographically greater than the stored one, so any delivery order of
/// the same updates converges. A (seq, actor) pair names one update; two
/// different values under the same pair are a caller bug.
class SceneState {
 public:
  ApplyResult apply(const std::string& key, Bytes value, std::uint64_t seq, std::uint32_t actor);
  std::optional<StateEntry> get(const std::string& key) const;
  std::map<std::string, StateEntry> snapshot() const;
  std::size_t size() const;

  friend bool operator==(const SceneState& a, const SceneState& b) { return a.snapshot() == b.snapshot(); }

 private:
  mutable std::mutex mu_;
  std::map<std::string, StateEntry> entries_;
};

/// Scene state that announces every applied change on a bus channel as an
/// event of type "state" whose payload is the key.
class StateManager {
 public:
  explicit StateManager(Bus* bus = nullptr, std::string channel = "scene")
      : bus_(bus), channel_(std::move(channel)) {}

  ApplyResult apply(const std::string& key, Bytes value, std::uint64_t seq, std::uint32_t actor);
  const SceneState& state() const noexcept { return state_; }

 private:
  SceneState state_;
  Bus* bus_;
  std::string channel_;
};

}  // namespace smv::engine
