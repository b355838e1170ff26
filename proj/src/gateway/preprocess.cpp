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

#include "smv/gateway/preprocess.hpp"

#include <cmath>

namespace smv::gateway {

using broker::QosClass;

void PreprocessSpec::validate() const {
  switch (mode) {
    case PreprocessMode::None:
      return;
    case PreprocessMode::Deadband:
      if (!(delta > 0) || !std::isfinite(delta)) fail(Errc::InvalidArgument, "deadband delta must be > 0");
      return;
    case PreprocessMode::Aggregate:
      if (window_ms < 10) fail(Errc::InvalidArgument, "aggregate windowMs must be >= 10");
      if ((stats & 0x0f) == 0 || (stats & ~0x0f) != 0) fail(Errc::InvalidArgument, "aggregate needs stats");
      return;
  }
  fail(Errc::InvalidArgument, "unknown preprocess mode");
}

void FlowPolicy::validate() const {
  if (batch_max_messages < 1) fail(Errc::InvalidArgument, "batchMaxMessages must be >= 1");
  if ((qos == QosClass::Control || qos == QosClass::Monitoring) && batch_max_messages != 1)
    fail(Errc::InvalidArgument, std::string(broker::to_string(qos)) + " flows may not be batched");
  preprocess.validate();
}

FlowPolicy default_policy(QosClass qos) { return FlowPolicy{qos, 1, 0, {}}; }

namespace {

constexpr std::pair<Stat, const char*> kStatNames[] = {{kMean, "mean"}, {kMin, "min"}, {kMax, "max"}, {kCount, "count"}};

}  // namespace

nlohmann::json to_json(const PreprocessSpec& p) {
  switch (p.mode) {
    case PreprocessMode::None:
      return {{"mode", "None"}};
    case PreprocessMode::Deadband:
      return {{"mode", "Deadband"}, {"delta", p.delta}};
    case PreprocessMode::Aggregate: {
      auto stats = nlohmann::json::array();
      for (auto [bit, name] : kStatNames)
        if (p.stats & bit) stats.push_back(name);
      return {{"mode", "Aggregate"}, {"windowMs", p.window_ms}, {"stats", stats}};
    }
  }
  return {};
}

PreprocessSpec preprocess_from_json(const nlohmann::json& j) {
  PreprocessSpec p;
  try {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "None") {
      p.mode = PreprocessMode::None;
    } else if (mode == "Deadband") {
      p = PreprocessSpec::deadband(j.at("delta").get<double>());
    } else if (mode == "Aggregate") {
      std::uint8_t stats = 0;
      for (const auto& s : j.at("stats")) {
        bool known = false;
        for (auto [bit, name] : kStatNames)
          if (s.get<std::string>() == name) {
            stats |= bit;
            known = true;
          }
        if (!known) fail(Errc::InvalidArgument, "unknown stat " + s.dump());
      }
      p = PreprocessSpec::aggregate(j.at("windowMs").get<std::uint32_t>(), stats);
    } else {
      fail(Errc::InvalidArgument, "unknown preprocess mode '" + mode + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("preprocess: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const FlowPolicy& p) {
  return {{"qosClass", std::string(broker::to_string(p.qos))},
          {"batchMaxMessages", p.batch_max_messages},
          {"batchMaxMs", p.batch_max_ms},
          {"preprocess", to_json(p.preprocess)}};
}

FlowPolicy policy_from_json(const nlohmann::json& j, QosClass qos) {
  FlowPolicy p = default_policy(qos);
  try {
    if (j.contains("qosClass")) p.qos = broker::qos_from_string(j.at("qosClass").get<std::string>());
    p.batch_max_messages = j.value("batchMaxMessages", p.batch_max_messages);
    p.batch_max_ms = j.value("batchMaxMs", p.batch_max_ms);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("flow policy: ") + e.what());
  }
  if (j.contains("preprocess")) p.preprocess = preprocess_from_json(j.at("preprocess"));
  p.validate();
  return p;
}

Decision apply_deadband(DeadbandState& state, double value, double delta) {
  if (state.last_forwarded && !(std::fabs(value - *state.last_forwarded) >= delta)) return Decision::Suppress;
  state.last_forwarded = value;
  return Decision::Forward;
}

AggregateRecord apply_aggregate(std::span<const std::pair<std::uint64_t, double>> window, std::uint32_t window_ms) {
  if (window.empty()) fail(Errc::EmptyWindow, "aggregate over an empty window");
  if (window_ms == 0) fail(Errc::InvalidArgument, "windowMs must be > 0");
  const std::uint64_t start = window_start(window.front().first, window_ms);
  StatAccumulator acc;
  for (const auto& [ts, v] : window) {
    if (window_start(ts, window_ms) != start) fail(Errc::InvalidArgument, "samples span more than one window");
    acc.add(v);
  }
  return {start + std::uint64_t{window_ms} * 1'000'000, acc.count, acc.mean(), acc.min, acc.max};
}

void append_stat_fields(std::vector<otbus::Field>& out, const std::string& name, const StatAccumulator& acc,
                        std::uint8_t stats) {
  for (auto [bit, suffix] : kStatNames) {
    if (!(stats & bit)) continue;
    std::string field = name + "." + suffix;
    if (field.size() > otbus::kMaxNameLen) continue;
    switch (bit) {
      case kMean: out.push_back({std::move(field), acc.mean()}); break;
      case kMin: out.push_back({std::move(field), acc.min}); break;
      case kMax: out.push_back({std::move(field), acc.max}); break;
      case kCount: out.push_back({std::move(field), static_cast<std::int64_t>(acc.count)}); break;
    }
  }
}

std::optional<WindowAggregator::Output> WindowAggregator::add(std::uint64_t ts_ns,
                                                               const std::vector<otbus::Field>& fields,
                                                               bool& accepted) {
  const std::uint64_t start = window_start(ts_ns, window_ms_);
  std::optional<Output> closed;
  if (ts_ns < closed_until_ || (open_start_ && start < *open_start_)) {
    accepted = false;
    return std::nullopt;
  }
  if (open_start_ && start > *open_start_) closed = flush();
  open_start_ = start;
  accepted = true;
  ++inputs_;
  for (const auto& f : fields) {
    double v;
    if (otbus::tag_of(f.value) != otbus::FieldTag::Str && otbus::as_number(f.value, v)) vars_[f.name].add(v);
  }
  return closed;
}

std::optional<WindowAggregator::Output> WindowAggregator::flush_expired(std::uint64_t now_ns) {
  if (!open_start_ || now_ns < *open_start_ + std::uint64_t{window_ms_} * 1'000'000) return std::nullopt;
  return flush();
}

std::optional<WindowAggregator::Output> WindowAggregator::flush() {
  if (!open_start_) return std::nullopt;
  Output out;
  out.window_end_ns = *open_start_ + std::uint64_t{window_ms_} * 1'000'000;
  out.inputs = inputs_;
  for (const auto& [name, acc] : vars_) append_stat_fields(out.fields, name, acc, stats_);
  closed_until_ = out.window_end_ns;
  open_start_.reset();
  inputs_ = 0;
  vars_.clear();
  return out;
}

}  // namespace smv::gateway
