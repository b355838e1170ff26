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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "smv/broker/topic.hpp"
#include "smv/common/exact_sum.hpp"
#include "smv/otbus/message.hpp"

namespace smv::gateway {

enum class PreprocessMode : std::uint8_t { None, Deadband, Aggregate };

/// Bit set of aggregate statistics.
enum Stat : std::uint8_t { kMean = 1, kMin = 2, kMax = 4, kCount = 8 };

struct PreprocessSpec {
  PreprocessMode mode = PreprocessMode::None;
  double delta = 0;             // Deadband
  std::uint32_t window_ms = 0;  // Aggregate
  std::uint8_t stats = 0;       // Aggregate, Stat bits

  static PreprocessSpec none() { return {}; }
  static PreprocessSpec deadband(double delta) { return {PreprocessMode::Deadband, delta, 0, 0}; }
  static PreprocessSpec aggregate(std::uint32_t window_ms, std::uint8_t stats) {
    return {PreprocessMode::Aggregate, 0, window_ms, stats};
  }

  /// delta > 0 and finite; windowMs >= 10 with a non-empty stat set. Throws InvalidArgument.
  void validate() const;
  friend bool operator==(const PreprocessSpec&, const PreprocessSpec&) = default;
};

struct FlowPolicy {
  broker::QosClass qos = broker::QosClass::SensorData;
  std::uint16_t batch_max_messages = 1;
  std::uint16_t batch_max_ms = 0;
  PreprocessSpec preprocess;

  /// Control/Monitoring must flush immediately (batchMaxMessages == 1). Throws InvalidArgument.
  void validate() const;
  friend bool operator==(const FlowPolicy&, const FlowPolicy&) = default;
};

/// Built-in policy for a class: no batching, no pre-processing.
FlowPolicy default_policy(broker::QosClass qos);

nlohmann::json to_json(const PreprocessSpec& p);
PreprocessSpec preprocess_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FlowPolicy& p);
/// `qos` is taken from the enclosing key when the object omits "qosClass".
FlowPolicy policy_from_json(const nlohmann::json& j, broker::QosClass qos);

enum class Decision { Forward, Suppress };

struct DeadbandState {
  std::optional<double> last_forwarded;
};

/// Forward iff nothing was forwarded yet or |value - last| >= delta; a
/// forwarded value becomes the new reference.
Decision apply_deadband(DeadbandState& state, double value, double delta);

/// Running statistics of one variable. The mean is exact: sum kept as
/// non-overlapping partials, divided once by the count.
struct StatAccumulator {
  ExactSum sum;
  std::uint64_t count = 0;
  double min = 0;
  double max = 0;

  void add(double v) {
    if (count == 0 || v < min) min = v;
    if (count == 0 || v > max) max = v;
    sum.add(v);
    ++count;
  }
  double mean() const { return sum.value() / static_cast<double>(count); }
};

struct AggregateRecord {
  std::uint64_t window_end_ns = 0;
  std::uint64_t count = 0;
  double mean = 0;
  double min = 0;
  double max = 0;
};

/// Start of the aligned tumbling window holding ts.
constexpr std::uint64_t window_start(std::uint64_t ts_ns, std::uint32_t window_ms) noexcept {
  const std::uint64_t w = std::uint64_t{window_ms} * 1'000'000;
  return ts_ns - ts_ns % w;
}

/// Statistics over one window of (tsUnixNs, value) samples. All samples
/// must fall into the same aligned window; the record's timestamp is that
/// window's end. Throws EmptyWindow, InvalidArgument.
AggregateRecord apply_aggregate(std::span<const std::pair<std::uint64_t, double>> window, std::uint32_t window_ms);

/// Appends "<name>.mean" / ".min" / ".max" (F64) and "<name>.count" (I64)
/// for the requested stats.
void append_stat_fields(std::vector<otbus::Field>& out, const std::string& name, const StatAccumulator& acc,
                        std::uint8_t stats);

/// Tumbling-window aggregation of every numeric field of one asset's stream.
class WindowAggregator {
 public:
  struct Output {
    std::uint64_t window_end_ns = 0;
    std::uint64_t inputs = 0;
    std::vector<otbus::Field> fields;
  };

  WindowAggregator(std::uint32_t window_ms, std::uint8_t stats) : window_ms_(window_ms), stats_(stats) {}

  /// Folds a message in. A timestamp past the open window closes it and
  /// returns its aggregate. Samples belonging to an already closed window
  /// are rejected (`accepted` = false).
  std::optional<Output> add(std::uint64_t ts_ns, const std::vector<otbus::Field>& fields, bool& accepted);
  /// Closes the open window once `now_ns` reaches its end.
  std::optional<Output> flush_expired(std::uint64_t now_ns);
  std::optional<Output> flush();

 private:
  std::uint32_t window_ms_;
  std::uint8_t stats_;
  std::optional<std::uint64_t> open_start_;
  std::uint64_t closed_until_ = 0;
  std::uint64_t inputs_ = 0;
  std::map<std::string, StatAccumulator> vars_;
};

}  // namespace smv::gateway
