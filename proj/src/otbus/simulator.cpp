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

#include "smv/otbus/simulator.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

#include "smv/common/clock.hpp"
#include "smv/otbus/pubsub.hpp"

namespace smv::otbus {

namespace {

Waveform waveform_from_string(const std::string& s) {
  if (s == "constant") return Waveform::Constant;
  if (s == "ramp") return Waveform::Ramp;
  if (s == "sine") return Waveform::Sine;
  if (s == "uniform-noise") return Waveform::UniformNoise;
  fail(Errc::InvalidArgument, "unknown waveform '" + s + "'");
}

const char* waveform_name(Waveform w) {
  switch (w) {
    case Waveform::Constant: return "constant";
    case Waveform::Ramp: return "ramp";
    case Waveform::Sine: return "sine";
    case Waveform::UniformNoise: return "uniform-noise";
  }
  return "constant";
}

}  // namespace

SimulatorProfile SimulatorProfile::with_default_variables(std::uint16_t publisher_id, std::uint16_t writer_id,
                                                          std::uint32_t rate, std::uint32_t duration,
                                                          std::uint64_t seed) {
  SimulatorProfile p;
  p.publisher_id = publisher_id;
  p.writer_id = writer_id;
  p.rate_per_sec = rate;
  p.duration_sec = duration;
  p.seed = seed;
  WaveParams temp;
  temp.offset = 60.0;
  temp.amplitude = 5.0;
  temp.period_sec = 30.0;
  WaveParams vib;
  vib.min = -0.5;
  vib.max = 0.5;
  WaveParams spindle;
  spindle.value = 1200.0;
  WaveParams count;
  count.start = 0.0;
  count.slope = 2.0;
  p.variables = {{"temperature", Waveform::Sine, temp},
                 {"vibration", Waveform::UniformNoise, vib},
                 {"spindle_rpm", Waveform::Constant, spindle},
                 {"part_count", Waveform::Ramp, count}};
  return p;
}

void SimulatorProfile::validate() const {
  if (rate_per_sec < 1 || rate_per_sec > 100000) fail(Errc::InvalidArgument, "ratePerSec must be in [1, 100000]");
  DataSetMessage probe;
  for (const auto& v : variables) {
    probe.fields.push_back({v.name, 0.0});
    if (v.waveform == Waveform::Sine && v.params.period_sec <= 0)
      fail(Errc::InvalidArgument, "sine periodSec must be > 0");
    if (v.waveform == Waveform::UniformNoise && !(v.params.max >= v.params.min))
      fail(Errc::InvalidArgument, "uniform-noise needs max >= min");
  }
  validate_fields(probe.fields);
  if (encoded_size(probe) > kMaxDatagram) fail(Errc::OversizeMessage, "profile variables do not fit one datagram");
}

SimulatorProfile profile_from_json(const nlohmann::json& j) {
  SimulatorProfile p;
  try {
    p.publisher_id = j.at("publisherId").get<std::uint16_t>();
    p.writer_id = j.at("writerId").get<std::uint16_t>();
    p.rate_per_sec = j.at("ratePerSec").get<std::uint32_t>();
    p.seed = j.value("seed", std::uint64_t{0});
    p.duration_sec = j.value("durationSec", std::uint32_t{10});
    for (const auto& v : j.at("variables")) {
      VariableSpec spec;
      spec.name = v.at("name").get<std::string>();
      spec.waveform = waveform_from_string(v.at("waveform").get<std::string>());
      const auto params = v.value("params", nlohmann::json::object());
      auto& w = spec.params;
      w.value = params.value("value", w.value);
      w.start = params.value("start", w.start);
      w.slope = params.value("slope", w.slope);
      w.amplitude = params.value("amplitude", w.amplitude);
      w.period_sec = params.value("periodSec", w.period_sec);
      w.phase = params.value("phase", w.phase);
      w.offset = params.value("offset", w.offset);
      w.min = params.value("min", w.min);
      w.max = params.value("max", w.max);
      p.variables.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("simulator profile: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json profile_to_json(const SimulatorProfile& p) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : p.variables) {
    const auto& w = v.params;
    vars.push_back({{"name", v.name},
                    {"waveform", waveform_name(v.waveform)},
                    {"params",
                     {{"value", w.value},
                      {"start", w.start},
                      {"slope", w.slope},
                      {"amplitude", w.amplitude},
                      {"periodSec", w.period_sec},
                      {"phase", w.phase},
                      {"offset", w.offset},
                      {"min", w.min},
                      {"max", w.max}}}});
  }
  return {{"publisherId", p.publisher_id}, {"writerId", p.writer_id}, {"ratePerSec", p.rate_per_sec},
          {"variables", vars},             {"seed", p.seed},          {"durationSec", p.duration_sec}};
}

SignalGenerator::SignalGenerator(SimulatorProfile profile)
    : profile_(std::move(profile)), rng_(profile_.seed), dt_(1.0 / profile_.rate_per_sec) {}

void SignalGenerator::set_rate(std::uint32_t rate_per_sec) { dt_ = 1.0 / rate_per_sec; }

DataSetMessage SignalGenerator::next(std::uint64_t ts_unix_ns) {
  DataSetMessage m;
  m.publisher_id = profile_.publisher_id;
  m.writer_id = profile_.writer_id;
  m.sequence_number = static_cast<std::uint32_t>(index_);
  m.ts_unix_ns = ts_unix_ns;
  m.fields.reserve(profile_.variables.size());
  for (const auto& v : profile_.variables) {
    const auto& w = v.params;
    double x = 0.0;
    switch (v.waveform) {
      case Waveform::Constant: x = w.value; break;
      case Waveform::Ramp: x = w.start + w.slope * t_; break;
      case Waveform::Sine: x = w.offset + w.amplitude * std::sin(2.0 * std::numbers::pi * t_ / w.period_sec + w.phase); break;
      case Waveform::UniformNoise: {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        x = w.min + (w.max - w.min) * u;
        break;
      }
    }
    m.fields.push_back({v.name, x});
  }
  ++index_;
  t_ += dt_;
  return m;
}

Simulator::Simulator(SimulatorProfile profile, std::vector<net::Endpoint> endpoints)
    : profile_(std::move(profile)), endpoints_(std::move(endpoints)), rate_(profile_.rate_per_sec) {
  profile_.validate();
}

void Simulator::set_rate(std::uint32_t rate_per_sec) {
  if (rate_per_sec < 1 || rate_per_sec > 100000) fail(Errc::InvalidArgument, "ratePerSec must be in [1, 100000]");
  rate_.store(rate_per_sec, std::memory_order_relaxed);
}

SimStats Simulator::run(std::stop_token stop) {
  using clock = std::chrono::steady_clock;
  Publisher pub;
  SignalGenerator gen(profile_);
  const std::uint64_t duration_ns = std::uint64_t{profile_.duration_sec} * 1'000'000'000ull;

  std::uint32_t rate = rate_.load();
  gen.set_rate(rate);
  const auto start = clock::now();
  auto base = start;
  std::uint64_t base_index = 0;
  std::uint64_t base_offset_ns = 0;
  std::uint64_t k = 0;
  auto last_send = start;

  while (!stop.stop_requested()) {
    if (auto r = rate_.load(std::memory_order_relaxed); r != rate) {
      rate = r;
      gen.set_rate(rate);
      base = clock::now();
      base_offset_ns = static_cast<std::uint64_t>(std::chrono::nanoseconds(base - start).count());
      base_index = k;
    }
    const std::uint64_t offset_ns = (k - base_index) * 1'000'000'000ull / rate;
    if (duration_ns != 0 && base_offset_ns + offset_ns >= duration_ns) break;
    const auto deadline = base + std::chrono::nanoseconds(offset_ns);
    if (deadline > clock::now()) std::this_thread::sleep_until(deadline);

    auto msg = gen.next(unix_now_ns());
    pub.publish(endpoints_, msg);
    last_send = clock::now();
    ++k;
    sent_.store(k, std::memory_order_relaxed);
  }

  SimStats s;
  s.sent = k;
  s.target_rate = rate;
  const double elapsed = std::chrono::duration<double>(last_send - start).count() + 1.0 / rate;
  s.achieved_rate = k ? static_cast<double>(k) / elapsed : 0.0;
  return s;
}

SimStats run_simulator(const SimulatorProfile& profile, const std::vector<net::Endpoint>& endpoints,
                       std::stop_token stop) {
  Simulator sim(profile, endpoints);
  return sim.run(stop);
}

}  // namespace smv::otbus
