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

#include "smv/twin/feeder.hpp"

#include "smv/common/clock.hpp"
#include "smv/common/error.hpp"

namespace smv::twin {

TwinFeeder::TwinFeeder(broker::BrokerApi& broker, TwinStore& store, const std::vector<std::string>& topics,
                       const std::string& group_id, Tap tap)
    : store_(store), tap_(std::move(tap)) {
  for (const auto& t : topics) streams_.push_back(broker.subscribe(t, group_id));
  for (auto& s : streams_) threads_.emplace_back([this, &s](std::stop_token st) { run(st, *s); });
}

TwinFeeder::~TwinFeeder() { stop(); }

void TwinFeeder::stop() {
  for (auto& t : threads_) t.request_stop();
  for (auto& t : threads_)
    if (t.joinable()) t.join();
}

void TwinFeeder::run(std::stop_token st, broker::RecordStream& stream) {
  while (!st.stop_requested()) {
    std::vector<broker::Record> batch;
    try {
      batch = stream.poll(std::chrono::milliseconds(50));
    } catch (const Error&) {
      // Broker briefly unavailable; keep polling.
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
      continue;
    }
    const std::uint64_t rx = unix_now_ns();
    for (const auto& rec : batch) {
      consumed_.fetch_add(1, std::memory_order_relaxed);
      gateway::BridgeEnvelope env;
      try {
        env = gateway::decode_envelope(rec.payload);
      } catch (const Error&) {
        malformed_.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      try {
        store_.ingest(env);
      } catch (const Error&) {
        rejected_.fetch_add(1, std::memory_order_relaxed);
        continue;
      }
      ingested_.fetch_add(1, std::memory_order_relaxed);
      if (tap_) tap_(env, rx);
    }
  }
}

FeederStats TwinFeeder::stats() const noexcept {
  return {consumed_.load(), ingested_.load(), malformed_.load(), rejected_.load()};
}

TwinConfig twin_config_from_json(const nlohmann::json& j) {
  TwinConfig c;
  try {
    for (const auto& r : j.value("fusionRules", nlohmann::json::array())) c.rules.push_back(rule_from_json(r));
    if (j.contains("retention")) {
      const auto& r = j.at("retention");
      c.retention.raw_points = r.value("rawPoints", c.retention.raw_points);
      c.retention.buckets_1s = r.value("buckets1s", c.retention.buckets_1s);
      c.retention.buckets_10s = r.value("buckets10s", c.retention.buckets_10s);
      c.retention.buckets_60s = r.value("buckets60s", c.retention.buckets_60s);
      if (c.retention.raw_points == 0 || c.retention.buckets_1s == 0 || c.retention.buckets_10s == 0 ||
          c.retention.buckets_60s == 0)
        fail(Errc::InvalidArgument, "retention limits must be positive");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("twin config: ") + e.what());
  }
  return c;
}

}  // namespace smv::twin
