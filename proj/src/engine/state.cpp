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

#include "smv/engine/state.hpp"

#include <tuple>

#include "smv/engine/bus.hpp"

namespace smv::engine {

ApplyResult SceneState::apply(const std::string& key, Bytes value, std::uint64_t seq, std::uint32_t actor) {
  std::lock_guard lk(mu_);
  auto [it, fresh] = entries_.try_emplace(key);
  if (!fresh && std::tie(seq, actor) <= std::tie(it->second.seq, it->second.actor)) return ApplyResult::Stale;
  it->second = StateEntry{std::move(value), seq, actor};
  return ApplyResult::Applied;
}

std::optional<StateEntry> SceneState::get(const std::string& key) const {
  std::lock_guard lk(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, StateEntry> SceneState::snapshot() const {
  std::lock_guard lk(mu_);
  return entries_;
}

std::size_t SceneState::size() const {
  std::lock_guard lk(mu_);
  return entries_.size();
}

ApplyResult StateManager::apply(const std::string& key, Bytes value, std::uint64_t seq, std::uint32_t actor) {
  const auto r = state_.apply(key, std::move(value), seq, actor);
  if (r == ApplyResult::Applied && bus_) {
    BusEvent ev;
    ev.type = "state";
    ev.payload.assign(key.begin(), key.end());
    ev.publisher = actor;
    bus_->publish(channel_, std::move(ev));
  }
  return r;
}

}  // namespace smv::engine
