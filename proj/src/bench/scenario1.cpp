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

#include <csignal>
#include <fstream>
#include <ostream>
#include <thread>

#include <boost/process.hpp>

#include "smv/bench/bench.hpp"
#include "smv/broker/client.hpp"
#include "smv/broker/server.hpp"
#include "smv/common/clock.hpp"
#include "smv/gateway/gateway.hpp"
#include "smv/otbus/pubsub.hpp"
#include "smv/otbus/simulator.hpp"

namespace smv::bench {

namespace bp = boost::process;
using namespace std::chrono_literals;

std::string_view to_string(Stage s) noexcept { return s == Stage::OtM2M ? "OT_M2M" : "E2E_IT"; }

Stage stage_from_string(std::string_view s) {
  if (s == "OT_M2M") return Stage::OtM2M;
  if (s == "E2E_IT") return Stage::E2eIt;
  fail(Errc::InvalidArgument, "unknown stage '" + std::string(s) + "'");
}

std::string_view to_string(Mode m) noexcept { return m == Mode::InProc ? "inproc" : "process"; }

Mode mode_from_string(std::string_view s) {
  if (s == "inproc") return Mode::InProc;
  if (s == "process") return Mode::Process;
  fail(Errc::InvalidArgument, "unknown mode '" + std::string(s) + "' (inproc|process)");
}

namespace {

const AssetId kAsset = AssetId::parse("bench.site.area.cell.sim1");
constexpr std::uint16_t kPublisher = 1;
constexpr std::uint16_t kWriter = 1;

std::uint64_t latency(std::uint64_t rx, std::uint64_t tx) { return rx > tx ? rx - tx : 1; }

/// A helper tool started for one run. It announces itself with a line
/// "READY key=value ..." on stdout and is terminated on destruction.
class Child {
 public:
  Child(const std::filesystem::path& exe, const std::vector<std::string>& args) {
    if (!std::filesystem::exists(exe)) fail(Errc::SetupFailure, "missing tool " + exe.string());
    try {
      proc_ = bp::child(exe.string(), bp::args(args), bp::std_out > out_);
    } catch (const std::exception& e) {
      fail(Errc::SetupFailure, "spawn " + exe.string() + ": " + e.what());
    }
    std::string line;
    while (std::getline(out_, line))
      if (line.starts_with("READY")) {
        ready_ = line;
        return;
      }
    fail(Errc::SetupFailure, exe.filename().string() + " exited before becoming ready");
  }

  ~Child() {
    if (!proc_.running()) return;
    ::kill(proc_.id(), SIGTERM);
    if (!proc_.wait_for(3s)) proc_.terminate();
  }

  /// Value of `key=` on the ready line.
  std::uint16_t port(const std::string& key) const {
    const auto at = ready_.find(key + "=");
    if (at == std::string::npos) fail(Errc::SetupFailure, "ready line lacks " + key + ": " + ready_);
    return static_cast<std::uint16_t>(std::stoul(ready_.substr(at + key.size() + 1)));
  }

 private:
  bp::ipstream out_;
  bp::child proc_;
  std::string ready_;
};

std::filesystem::path default_tools_dir() {
  std::error_code ec;
  auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
  return ec ? std::filesystem::current_path() : self.parent_path();
}

/// Broker + gateway for one run, in this process or as child processes.
struct Pipeline {
  std::unique_ptr<broker::Broker> broker;
  std::unique_ptr<broker::BrokerServer> server;
  std::unique_ptr<broker::BrokerClient> gateway_link;
  std::unique_ptr<gateway::Gateway> gateway;
  std::unique_ptr<Child> broker_proc;
  std::unique_ptr<Child> gateway_proc;
  std::filesystem::path gateway_config;
  std::uint16_t broker_port = 0;
  std::uint16_t ot_port = 0;

  ~Pipeline() {
    gateway_proc.reset();
    if (gateway) gateway->stop(500ms);
    broker_proc.reset();
    if (!gateway_config.empty()) std::filesystem::remove(gateway_config);
  }
};

void start_pipeline(Pipeline& p, const Scenario1Options& opts) {
  gateway::GatewayConfig gc;
  gc.ot_endpoints = {{"127.0.0.1", 0}};
  gc.bindings = {{kAsset, twin::default_topic(kAsset), kPublisher, kWriter}};
  if (opts.mode == Mode::InProc) {
    p.broker = std::make_unique<broker::Broker>();
    p.server = std::make_unique<broker::BrokerServer>(*p.broker, net::Endpoint{"127.0.0.1", 0});
    p.broker_port = p.server->port();
    p.gateway_link = std::make_unique<broker::BrokerClient>(net::Endpoint{"127.0.0.1", p.broker_port});
    p.gateway = std::make_unique<gateway::Gateway>(gc, *p.gateway_link);
    p.gateway->start();
    p.ot_port = p.gateway->ports().at(0);
    return;
  }
  const auto dir = opts.tools_dir.empty() ? default_tools_dir() : opts.tools_dir;
  p.broker_proc = std::make_unique<Child>(dir / "smv-broker", std::vector<std::string>{"--listen", "127.0.0.1:0"});
  p.broker_port = p.broker_proc->port("broker");
  nlohmann::json cfg{{"otEndpoints", {"127.0.0.1:0"}},
                     {"broker", "127.0.0.1:" + std::to_string(p.broker_port)},
                     {"bindings", {twin::binding_to_json(gc.bindings[0])}}};
  p.gateway_config = std::filesystem::temp_directory_path() /
                     ("smv-bench-gateway-" + std::to_string(::getpid()) + "-" + std::to_string(mono_now_ns()) + ".json");
  std::ofstream(p.gateway_config) << cfg.dump(2);
  p.gateway_proc =
      std::make_unique<Child>(dir / "smv-gateway", std::vector<std::string>{"--config", p.gateway_config.string()});
  p.ot_port = p.gateway_proc->port("ot");
}

struct RunSamples {
  std::vector<std::uint64_t> ot;
  std::vector<std::uint64_t> e2e;
};

RunSamples run_rate(const Scenario1Options& opts, std::uint32_t rate) {
  Pipeline p;
  start_pipeline(p, opts);

  broker::BrokerClient consumer_link({"127.0.0.1", p.broker_port});
  auto stream = consumer_link.subscribe(twin::default_topic(kAsset), "bench-consumer");
  auto ot_sub = otbus::Subscriber::bind({"127.0.0.1", 0}, otbus::SourceFilter{kPublisher, kWriter});

  RunSamples s;
  const auto expected = static_cast<std::size_t>(rate) * static_cast<std::size_t>(opts.duration.count());
  s.ot.reserve(expected);
  s.e2e.reserve(expected);
  std::atomic<bool> done{false};
  std::atomic<std::uint64_t> sent{0};

  std::jthread ot_thread([&] {
    while (!done || s.ot.size() < sent) {
      auto r = ot_sub.next(100ms);
      if (r) s.ot.push_back(latency(r->rx_unix_ns, r->msg.ts_unix_ns));
      else if (done) break;
    }
  });
  std::jthread consumer_thread([&] {
    std::uint64_t idle_deadline = 0;
    while (true) {
      std::vector<broker::Record> batch;
      try {
        batch = stream->poll(100ms);
      } catch (const Error&) {
        break;
      }
      const auto rx = unix_now_ns();
      for (const auto& rec : batch) {
        try {
          s.e2e.push_back(latency(rx, gateway::decode_envelope(rec.payload).ot_ts_unix_ns));
        } catch (const Error&) {
        }
      }
      if (done) {
        if (s.e2e.size() >= sent) break;
        if (idle_deadline == 0) idle_deadline = mono_now_ns() + 3'000'000'000ull;
        if (mono_now_ns() > idle_deadline) break;
      }
    }
  });

  auto profile =
      otbus::SimulatorProfile::with_default_variables(kPublisher, kWriter, rate,
                                                      static_cast<std::uint32_t>(opts.duration.count()), rate);
  const auto stats = otbus::run_simulator(profile, {{"127.0.0.1", ot_sub.port()}, {"127.0.0.1", p.ot_port}});
  sent = stats.sent;
  done = true;
  ot_thread.join();
  consumer_thread.join();
  if (opts.log)
    *opts.log << "  rate " << rate << ": sent " << stats.sent << " (achieved " << stats.achieved_rate
              << "/s), OT samples " << s.ot.size() << ", E2E samples " << s.e2e.size() << "\n";
  return s;
}

}  // namespace

std::vector<LatencyRow> scenario1(const Scenario1Options& opts) {
  if (opts.rates.empty()) fail(Errc::InvalidArgument, "no rates");
  if (opts.duration.count() < 1) fail(Errc::InvalidArgument, "duration must be >= 1 s");
  for (auto r : opts.rates)
    if (r < 1 || r > 100000) fail(Errc::InvalidArgument, "rate must be in [1, 100000]");
  std::vector<LatencyRow> rows;
  for (auto rate : opts.rates) {
    RunSamples s;
    try {
      s = run_rate(opts, rate);
    } catch (const Error& e) {
      if (e.code() == Errc::SetupFailure) throw;
      fail(Errc::SetupFailure, std::string("scenario1 at ") + std::to_string(rate) + " msg/s: " + e.what());
    }
    for (auto [stage, samples] : {std::pair{Stage::OtM2M, &s.ot}, std::pair{Stage::E2eIt, &s.e2e}}) {
      drop_warmup(*samples, kWarmupFraction);
      if (samples->empty())
        fail(Errc::SetupFailure, std::string(to_string(stage)) + " collected no samples at " + std::to_string(rate));
      rows.push_back({stage, rate, summarize(*samples)});
    }
  }
  return rows;
}

std::vector<engine::FpsResult> scenario2(const Scenario2Options& opts) {
  if (opts.duration < std::chrono::seconds(5)) fail(Errc::InvalidArgument, "scenario2 needs duration >= 5 s");
  if (opts.resolutions.empty() || opts.transports.empty()) fail(Errc::InvalidArgument, "nothing to run");
  std::vector<engine::FpsResult> out;
  for (auto res : opts.resolutions)
    for (auto t : opts.transports) {
      auto r = engine::fps_bench(res, t, opts.duration);
      if (opts.log)
        *opts.log << "  " << engine::to_string(res) << " " << engine::to_string(t) << ": " << r.fps << " fps, p50 "
                  << static_cast<double>(r.latency.p50) / 1e6 << " ms\n";
      out.push_back(std::move(r));
    }
  return out;
}

}  // namespace smv::bench
