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
#include <cstdint>
#include <random>
#include <stop_token>
#include <string>
#include <vector>

#include <json.hpp>

#include "smv/common/net.hpp"
#include "smv/otbus/message.hpp"

namespace smv::otbus {

enum class Waveform { Constant, Ramp, Sine, UniformNoise };

/// Waveform parameters; each waveform reads only its own subset.
///   constant:      value
///   ramp:          start + slope * t
///   sine:          offset + amplitude * sin(2*pi*t/periodSec + phase)
///   uniform-noise: uniform in [min, max)
/// t is the message's nominal time in seconds (index / rate), not wall time.
struct WaveParams {
  double value = 0.0;
  double start = 0.0;
  double slope = 1.0;
  double amplitude = 1.0;
  double period_sec = 1.0;
  double phase = 0.0;
  double offset = 0.0;
  double min = 0.0;
  double max = 1.0;
};

struct VariableSpec {
  std::string name;
  Waveform waveform = Waveform::Constant;
  WaveParams params;
};

struct SimulatorProfile {
  std::uint16_t publisher_id = 1;
  std::uint16_t writer_id = 1;
  std::uint32_t rate_per_sec = 400;
  std::vector<VariableSpec> variables;
  std::uint64_t seed = 0;
  std::uint32_t duration_sec = 10;

  /// Chosen default workload: four F64 sensor channels.
  static SimulatorProfile with_default_variables(std::uint16_t publisher_id, std::uint16_t writer_id,
                                                 std::uint32_t rate, std::uint32_t duration, std::uint64_t seed);
  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

/// JSON uses the field names publisherId, writerId, ratePerSec, variables,
/// seed, durationSec; waveforms are "constant", "ramp", "sine", "uniform-noise".
SimulatorProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const SimulatorProfile& p);

/// Deterministic message source: same profile and seed give the same sequence
/// of (sequenceNumber, fields) regardless of timing.
class SignalGenerator {
 public:
  explicit SignalGenerator(SimulatorProfile profile);

  DataSetMessage next(std::uint64_t ts_unix_ns);
  /// Subsequent messages advance nominal time by 1/rate.
  void set_rate(std::uint32_t rate_per_sec);
  std::uint64_t produced() const noexcept { return index_; }

 private:
  SimulatorProfile profile_;
  std::mt19937_64 rng_;
  std::uint64_t index_ = 0;
  double t_ = 0.0;
  double dt_;
};

struct SimStats {
  std::uint64_t sent = 0;
  double target_rate = 0.0;
  double achieved_rate = 0.0;
};

/// Paced publisher for one profile. run() sends messages at fixed 1/rate
/// intervals to every endpoint until durationSec elapses (0 = until stopped).
class Simulator {
 public:
  Simulator(SimulatorProfile profile, std::vector<net::Endpoint> endpoints);

  SimStats run(std::stop_token stop = {});
  /// Takes effect on the next message; rebases the pacing schedule.
  void set_rate(std::uint32_t rate_per_sec);

  std::uint32_t rate() const noexcept { return rate_.load(std::memory_order_relaxed); }
  std::uint64_t sent() const noexcept { return sent_.load(std::memory_order_relaxed); }
  const SimulatorProfile& profile() const noexcept { return profile_; }

 private:
  SimulatorProfile profile_;
  std::vector<net::Endpoint> endpoints_;
  std::atomic<std::uint32_t> rate_;
  std::atomic<std::uint64_t> sent_{0};
};

/// Convenience wrapper: builds a Simulator and runs it to completion.
SimStats run_simulator(const SimulatorProfile& profile, const std::vector<net::Endpoint>& endpoints,
                       std::stop_token stop = {});

}  // namespace smv::otbus
