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

#include "smv/gateway/gateway.hpp"

#include <algorithm>

#include "smv/common/clock.hpp"

namespace smv::gateway {

using broker::QosClass;
using namespace std::chrono_literals;

namespace {

std::size_t idx(QosClass q) { return static_cast<std::size_t>(q); }

bool critical(QosClass q) { return q == QosClass::Control || q == QosClass::Monitoring; }

}  // namespace

nlohmann::json to_json(const broker::TopicSpec& t) {
  return {{"name", t.name},
          {"partitions", t.partitions},
          {"replicationFactor", t.replication_factor},
          {"qosClass", std::string(broker::to_string(t.qos))}};
}

broker::TopicSpec topic_from_json(const nlohmann::json& j) {
  broker::TopicSpec t;
  t.name = j.at("name").get<std::string>();
  t.qos = broker::qos_from_string(j.value("qosClass", std::string("SensorData")));
  t.partitions = j.value("partitions", std::uint16_t{1});
  const std::uint8_t default_rf = critical(t.qos) ? broker::kDefaultCriticalReplication : 1;
  t.replication_factor = j.value("replicationFactor", default_rf);
  return t;
}

GatewayConfig gateway_config_from_json(const nlohmann::json& j) {
  GatewayConfig c;
  try {
    for (const auto& e : j.value("otEndpoints", nlohmann::json::array()))
      c.ot_endpoints.push_back(net::Endpoint::parse(e.get<std::string>()));
    for (const auto& t : j.value("topics", nlohmann::json::array())) c.topics.push_back(topic_from_json(t));
    for (const auto& b : j.value("bindings", nlohmann::json::array())) c.bindings.push_back(twin::binding_from_json(b));
    if (j.contains("policies"))
      for (const auto& [k, v] : j.at("policies").items()) {
        const auto q = broker::qos_from_string(k);
        c.policies[q] = policy_from_json(v, q);
      }
    c.buffer_limit = j.value("bufferLimit", c.buffer_limit);
    c.broker_address = j.value("broker", std::string());
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("gateway config: ") + e.what());
  }
  if (c.buffer_limit == 0) fail(Errc::InvalidArgument, "bufferLimit must be > 0");
  return c;
}

Gateway::Gateway(GatewayConfig cfg, broker::BrokerApi& broker, std::shared_ptr<const twin::MetadataRepository> meta)
    : cfg_(std::move(cfg)), broker_(broker), meta_(std::move(meta)) {
  if (!meta_) {
    auto repo = std::make_shared<twin::MetadataRepository>();
    for (const auto& b : cfg_.bindings) repo->add_static(b);
    meta_ = repo;
  }
  for (QosClass q : {QosClass::Control, QosClass::Monitoring, QosClass::SensorData, QosClass::Video})
    policies_[q] = default_policy(q);
  for (auto [q, p] : cfg_.policies) {
    p.qos = q;
    p.validate();
    policies_[q] = p;
  }
  for (const auto& [q, p] : policies_) batching_[idx(q)] = {p.batch_max_messages, p.batch_max_ms};
  for (const auto& t : cfg_.topics) topic_qos_[t.name] = t.qos;
  for (const auto& b : meta_->static_bindings()) topic_qos_.try_emplace(b.topic, QosClass::SensorData);
}

Gateway::~Gateway() { stop(0ms); }

void Gateway::start() {
  if (running_) return;
  std::map<std::string, bool> existing;
  for (const auto& t : broker_.describe()) existing[t.spec.name] = true;
  std::vector<broker::TopicSpec> wanted = cfg_.topics;
  for (const auto& [name, q] : topic_qos_)
    if (std::none_of(wanted.begin(), wanted.end(), [&](const auto& t) { return t.name == name; }))
      wanted.push_back({name, 1, 1, QosClass::SensorData});
  for (const auto& t : wanted) {
    if (existing.contains(t.name)) continue;
    try {
      broker_.create_topic(t);
    } catch (const Error& e) {
      if (e.code() != Errc::TopicExists) fail(Errc::SetupFailure, std::string("create topic: ") + e.what());
    }
  }
  for (const auto& ep : cfg_.ot_endpoints) subs_.push_back(otbus::Subscriber::bind(ep));
  running_ = true;
  sender_ = std::jthread([this](std::stop_token st) { sender_loop(st); });
  for (std::size_t i = 0; i < subs_.size(); ++i)
    ingest_threads_.emplace_back([this, i](std::stop_token st) { ingest_loop(i, st); });
}

void Gateway::stop(std::chrono::milliseconds drain_timeout) {
  for (auto& t : ingest_threads_) t.request_stop();
  ingest_threads_.clear();
  flush_aggregates(0, true);
  if (running_) drain(drain_timeout);
  if (sender_.joinable()) {
    sender_.request_stop();
    cv_.notify_all();
    sender_.join();
  }
  running_ = false;
}

bool Gateway::drain(std::chrono::milliseconds timeout) {
  std::unique_lock lk(mu_);
  cv_.notify_all();
  return drained_cv_.wait_for(lk, timeout, [&] { return idle_locked(); });
}

void Gateway::ingest_loop(std::size_t i, std::stop_token st) {
  auto& sub = subs_[i];
  while (!st.stop_requested()) {
    auto r = sub.next(50ms);
    if (r) ingest(r->msg, r->rx_unix_ns);
  }
}

bool Gateway::idle_locked() const {
  if (in_flight_ != 0) return false;
  for (const auto& q : queues_)
    if (!q.items.empty()) return false;
  return true;
}

PreprocessSpec Gateway::effective_spec_locked(const AssetId& asset, QosClass qos) const {
  if (auto it = overrides_.find(asset); it != overrides_.end()) return it->second;
  return policies_.at(qos).preprocess;
}

void Gateway::ingest(const otbus::DataSetMessage& msg, std::uint64_t rx_unix_ns) {
  auto binding = meta_->resolve_source(msg.publisher_id, msg.writer_id);
  {
    std::lock_guard lk(mu_);
    ++stats_.received;
    if (!binding) {
      ++stats_.unresolved;
      return;
    }
    ++stats_.received_by_asset[binding->asset.str()];
  }
  const QosClass qos = topic_class(binding->topic);

  Pending p;
  p.topic = binding->topic;
  p.env.asset = binding->asset;
  p.env.writer_id = msg.writer_id;
  p.env.ot_ts_unix_ns = msg.ts_unix_ns;
  p.env.gw_rx_unix_ns = rx_unix_ns;

  std::lock_guard pre(pre_mu_);
  const PreprocessSpec spec = effective_spec_locked(binding->asset, qos);
  auto& st = assets_[binding->asset];
  if (!(st.spec == spec)) {
    // Pre-processing changed for this asset: restart from a clean state.
    if (st.aggregator)
      if (auto out = st.aggregator->flush()) emit_aggregate(binding->asset, st, std::move(*out));
    st = AssetState{};
    st.spec = spec;
    if (spec.mode == PreprocessMode::Aggregate)
      st.aggregator = std::make_unique<WindowAggregator>(spec.window_ms, spec.stats);
  }
  st.topic = binding->topic;
  st.writer_id = msg.writer_id;

  switch (spec.mode) {
    case PreprocessMode::None:
      p.env.fields = msg.fields;
      break;
    case PreprocessMode::Deadband:
      for (const auto& f : msg.fields) {
        double v;
        bool forward;
        if (otbus::tag_of(f.value) != otbus::FieldTag::Str && otbus::tag_of(f.value) != otbus::FieldTag::Bool &&
            otbus::as_number(f.value, v)) {
          forward = apply_deadband(st.deadband[f.name], v, spec.delta) == Decision::Forward;
        } else {
          // Non-numeric fields pass on change.
          auto [it, fresh] = st.last_other.try_emplace(f.name, f.value);
          forward = fresh || !(it->second == f.value);
          it->second = f.value;
        }
        if (forward) p.env.fields.push_back(f);
      }
      if (p.env.fields.empty()) {
        std::lock_guard lk(mu_);
        ++stats_.suppressed;
        return;
      }
      break;
    case PreprocessMode::Aggregate: {
      bool accepted = false;
      auto out = st.aggregator->add(msg.ts_unix_ns, msg.fields, accepted);
      {
        std::lock_guard lk(mu_);
        ++(accepted ? stats_.suppressed : stats_.dropped);
      }
      if (out) emit_aggregate(binding->asset, st, std::move(*out));
      return;
    }
  }
  enqueue(std::move(p), qos);
}

void Gateway::emit_aggregate(const AssetId& asset, AssetState& s, WindowAggregator::Output out) {
  if (out.fields.empty()) return;
  Pending p;
  p.topic = s.topic;
  p.aggregate = true;
  p.env.asset = asset;
  p.env.writer_id = s.writer_id;
  p.env.ot_ts_unix_ns = out.window_end_ns;
  p.env.gw_rx_unix_ns = std::max(unix_now_ns(), out.window_end_ns);
  p.env.fields = std::move(out.fields);
  enqueue(std::move(p), topic_class(s.topic));
}

void Gateway::flush_aggregates(std::uint64_t now_unix_ns, bool force) {
  std::lock_guard pre(pre_mu_);
  for (auto& [asset, st] : assets_) {
    if (!st.aggregator) continue;
    auto out = force ? st.aggregator->flush() : st.aggregator->flush_expired(now_unix_ns);
    if (out) emit_aggregate(asset, st, std::move(*out));
  }
}

void Gateway::enqueue(Pending p, QosClass qos) {
  {
    std::lock_guard lk(mu_);
    auto& q = queues_[idx(qos)];
    const std::size_t limit = critical(qos) ? cfg_.buffer_limit * 10 : cfg_.buffer_limit;
    while (q.items.size() >= limit) {
      auto& old = q.items.front();
      if (--q.per_asset[old.env.asset.str()] == 0) q.per_asset.erase(old.env.asset.str());
      if (old.aggregate) {
        ++stats_.aggregates_dropped;
      } else {
        ++stats_.dropped;
        --stats_.pending;
      }
      q.items.pop_front();
    }
    p.enqueued_mono_ns = mono_now_ns();
    if (!p.aggregate) ++stats_.pending;
    ++q.per_asset[p.env.asset.str()];
    q.items.push_back(std::move(p));
  }
  cv_.notify_one();
}

bool Gateway::take_batch(std::vector<Pending>& batch, QosClass& qos, std::uint64_t now_mono,
                         std::uint64_t& next_deadline) {
  for (std::size_t c = 0; c < kQosClasses; ++c) {
    auto& q = queues_[c];
    if (q.items.empty()) continue;
    const auto [max_msgs, max_ms] = batching_[c];
    const std::uint64_t deadline = q.items.front().enqueued_mono_ns + std::uint64_t{max_ms} * 1'000'000;
    std::string key;
    if (max_msgs <= 1 || now_mono >= deadline) {
      key = q.items.front().env.asset.str();
    } else {
      for (const auto& [asset, n] : q.per_asset)
        if (n >= max_msgs) {
          key = asset;
          break;
        }
    }
    if (key.empty()) {
      next_deadline = std::min(next_deadline, deadline);
      continue;
    }
    qos = static_cast<QosClass>(c);
    const std::size_t want = std::max<std::size_t>(1, max_msgs);
    for (auto it = q.items.begin(); it != q.items.end() && batch.size() < want;) {
      if (it->env.asset.str() == key) {
        batch.push_back(std::move(*it));
        it = q.items.erase(it);
      } else {
        ++it;
      }
    }
    if ((q.per_asset[key] -= batch.size()) == 0) q.per_asset.erase(key);
    return true;
  }
  return false;
}

void Gateway::sender_loop(std::stop_token st) {
  std::vector<Pending> batch;
  std::uint64_t next_flush = 0;
  while (!st.stop_requested()) {
    const std::uint64_t now_unix = unix_now_ns();
    if (now_unix >= next_flush) {
      flush_aggregates(now_unix, false);
      next_flush = now_unix + 5'000'000;
    }
    QosClass qos = QosClass::SensorData;
    batch.clear();
    {
      std::unique_lock lk(mu_);
      std::uint64_t next_deadline = mono_now_ns() + 5'000'000;
      if (!take_batch(batch, qos, mono_now_ns(), next_deadline)) {
        if (idle_locked()) drained_cv_.notify_all();
        const auto wait = std::chrono::nanoseconds(next_deadline - std::min(next_deadline, mono_now_ns()));
        cv_.wait_for(lk, wait);
        continue;
      }
      in_flight_ += batch.size();
    }
    produce(batch, qos);
  }
}

void Gateway::produce(std::vector<Pending>& batch, QosClass qos) {
  const auto ack = critical(qos) ? broker::AckLevel::Quorum : broker::AckLevel::LeaderOnly;
  const std::string key = batch.front().env.asset.str();
  std::vector<Bytes> payloads(batch.size());
  for (;;) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      batch[i].env.gw_tx_unix_ns = unix_now_ns();
      encode_envelope(batch[i].env, payloads[i]);
    }
    try {
      broker_.produce_batch(batch.front().topic, as_bytes(key), payloads, ack);
      break;
    } catch (const Error& e) {
      std::lock_guard lk(mu_);
      ++stats_.produce_errors;
      const bool retryable = e.code() == Errc::BrokerUnavailable || e.code() == Errc::QuorumUnavailable ||
                             e.code() == Errc::SocketError;
      if (!retryable || sender_.get_stop_token().stop_requested()) {
        for (const auto& p : batch) {
          if (p.aggregate) {
            ++stats_.aggregates_dropped;
          } else {
            ++stats_.dropped;
            --stats_.pending;
          }
        }
        in_flight_ -= batch.size();
        return;
      }
    }
    std::this_thread::sleep_for(10ms);
  }
  std::lock_guard lk(mu_);
  ++stats_.produce_calls;
  in_flight_ -= batch.size();
  auto& ring = residence_[idx(qos)];
  for (const auto& p : batch) {
    if (p.aggregate) {
      ++stats_.aggregates_produced;
    } else {
      ++stats_.produced;
      --stats_.pending;
    }
    ++stats_.produced_by_class[idx(qos)];
    ring.push_back(p.env.gw_tx_unix_ns - std::min(p.env.gw_tx_unix_ns, p.env.gw_rx_unix_ns));
    if (ring.size() > kResidenceRing) ring.pop_front();
  }
}

void Gateway::set_policy(const FlowPolicy& p) {
  p.validate();
  std::lock_guard pre(pre_mu_);
  policies_[p.qos] = p;
  std::lock_guard lk(mu_);
  batching_[idx(p.qos)] = {p.batch_max_messages, p.batch_max_ms};
  cv_.notify_one();
}

FlowPolicy Gateway::policy(QosClass qos) const {
  std::lock_guard pre(pre_mu_);
  return policies_.at(qos);
}

void Gateway::set_preprocess(const AssetId& asset, const PreprocessSpec& spec) {
  spec.validate();
  bool bound = false;
  for (const auto& b : meta_->static_bindings()) bound = bound || b.asset == asset;
  if (!bound) fail(Errc::UnboundAsset, asset.str());
  std::lock_guard pre(pre_mu_);
  overrides_[asset] = spec;
}

void Gateway::clear_preprocess(const AssetId& asset) {
  std::lock_guard pre(pre_mu_);
  overrides_.erase(asset);
}

PreprocessSpec Gateway::preprocess_for(const AssetId& asset) const {
  std::lock_guard pre(pre_mu_);
  QosClass qos = QosClass::SensorData;
  try {
    qos = topic_class(meta_->resolve_topic(asset));
  } catch (const Error&) {
  }
  return effective_spec_locked(asset, qos);
}

BridgeStats Gateway::stats() const {
  std::lock_guard lk(mu_);
  return stats_;
}

std::vector<std::uint64_t> Gateway::residence_samples(QosClass qos) const {
  std::lock_guard lk(mu_);
  const auto& r = residence_[idx(qos)];
  return {r.begin(), r.end()};
}

std::vector<std::uint16_t> Gateway::ports() const {
  std::vector<std::uint16_t> out;
  for (const auto& s : subs_) out.push_back(s.port());
  return out;
}

QosClass Gateway::topic_class(const std::string& topic) const {
  auto it = topic_qos_.find(topic);
  return it == topic_qos_.end() ? QosClass::SensorData : it->second;
}

}  // namespace smv::gateway
