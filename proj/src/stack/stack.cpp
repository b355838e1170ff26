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

#include "smv/stack/stack.hpp"

#include <condition_variable>

#include "smv/broker/client.hpp"
#include "smv/common/clock.hpp"
#include "smv/common/percentiles.hpp"
#include "smv/simd/kernels.hpp"
#include "smv/twin/asset_store.hpp"

namespace smv::stack {

using namespace std::chrono_literals;
using broker::QosClass;

namespace {

constexpr std::size_t cls(QosClass q) { return static_cast<std::size_t>(q); }
constexpr QosClass kClasses[] = {QosClass::Control, QosClass::Monitoring, QosClass::SensorData, QosClass::Video};

std::uint64_t diff(std::uint64_t later, std::uint64_t earlier) { return later > earlier ? later - earlier : 0; }

std::uint64_t p50_of(std::vector<std::uint64_t>& v) { return v.empty() ? 0 : summarize(v).p50; }

std::string machine_node(const AssetId& a) { return "machine:" + a.str(); }

nlohmann::json fusion_json(const twin::FusionEvent& e) {
  return {{"ruleId", e.rule_id},
          {"assetId", e.target.str()},
          {"variable", e.variable},
          {"value", std::isfinite(e.value) ? nlohmann::json(e.value) : nlohmann::json()},
          {"flagged", e.flagged},
          {"tsUnixNs", e.ts_ns}};
}

Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace

struct Stack::Window {
  std::mutex mu;
  std::map<AssetId, std::vector<std::uint64_t>> ot;       // gwRx - otTs
  std::array<std::vector<std::uint64_t>, 4> residence;    // gwTx - gwRx
  std::array<std::vector<std::uint64_t>, 4> delivery;     // twin rx - gwTx
  std::array<std::uint64_t, 4> delivered{};
  std::vector<std::uint64_t> render_ns;
  std::vector<std::uint64_t> stream_ns;
};

nlohmann::json to_json(const TopologySnapshot& t) {
  auto nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    nlohmann::json j{{"id", n.id}, {"kind", n.kind}};
    if (n.asset) j["assetId"] = n.asset->str();
    nodes.push_back(std::move(j));
  }
  auto edges = nlohmann::json::array();
  for (const auto& e : t.edges)
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"qosClass", std::string(broker::to_string(e.qos))},
                     {"msgRatePerSec", e.msg_rate_per_sec},
                     {"p50LatencyNs", e.p50_latency_ns}});
  return {{"sampledUnixNs", t.sampled_unix_ns}, {"windowSec", t.window_sec}, {"nodes", nodes}, {"edges", edges}};
}

std::uint32_t browser_downscale_factor(std::uint32_t w, std::uint32_t h) noexcept {
  const auto fw = (w + kBrowserMaxWidth - 1) / kBrowserMaxWidth;
  const auto fh = (h + kBrowserMaxHeight - 1) / kBrowserMaxHeight;
  return std::max({1u, fw, fh});
}

Stack::Stack(StackConfig cfg) : cfg_(std::move(cfg)), window_(std::make_unique<Window>()) {
  meta_ = std::make_shared<twin::MetadataRepository>();
  twin::load_metadata(cfg_.metadata, *meta_);
  cfg_.gateway.bindings.clear();
  if (cfg_.gateway.ot_endpoints.empty()) cfg_.gateway.ot_endpoints.push_back({"127.0.0.1", 0});
  for (const auto& p : cfg_.simulators)
    if (!meta_->resolve_source(p.publisher_id, p.writer_id))
      fail(Errc::InvalidArgument, "simulator " + std::to_string(p.publisher_id) + "/" +
                                      std::to_string(p.writer_id) + " has no static binding");
  for (const auto& r : cfg_.twin.rules) r.validate();
  const auto size = engine::frame_size(cfg_.video.preset);
  for (const auto& [asset, a] : cfg_.video.overlay.spatial)
    if (a.x >= size.width || a.y >= size.height)
      fail(Errc::InvalidArgument, "overlay anchor for " + asset.str() + " outside the frame");
}

Stack::~Stack() { stop(); }

void Stack::start() {
  std::lock_guard control(control_mu_);
  if (running_ || stopped_) fail(Errc::SetupFailure, "stack can be started once");
  try {
    if (cfg_.broker_address.empty()) {
      broker::BrokerOptions bo;
      if (!cfg_.data_dir.empty()) bo.data_dir = cfg_.data_dir / "broker";
      embedded_ = std::make_unique<broker::Broker>(bo);
      broker_ = embedded_.get();
      if (cfg_.broker_listen) broker_server_ = std::make_unique<broker::BrokerServer>(*embedded_, *cfg_.broker_listen);
    } else {
      remote_ = std::make_unique<broker::BrokerClient>(net::Endpoint::parse(cfg_.broker_address));
      broker_ = remote_.get();
    }
    gateway_ = std::make_unique<gateway::Gateway>(cfg_.gateway, *broker_, meta_);
    for (const auto& b : meta_->static_bindings()) asset_class_[b.asset] = gateway_->topic_class(b.topic);
    gateway_->start();

    twin_ = std::make_unique<twin::TwinStore>(meta_, cfg_.twin.retention);
    for (const auto& r : cfg_.twin.rules) twin_->add_rule(r);
    twin_->on_fusion([this](const twin::FusionEvent& e) {
      if (e.flagged) bus_.publish(kEventsChannel, {"", "fusion", to_bytes(fusion_json(e).dump()), 0});
    });
    queries_ = std::make_unique<twin::QueryService>(*twin_);
    std::set<std::string> topics;
    for (const auto& b : meta_->static_bindings()) topics.insert(b.topic);
    feeder_ = std::make_unique<twin::TwinFeeder>(
        *broker_, *twin_, std::vector<std::string>(topics.begin(), topics.end()), "twin",
        [this](const gateway::BridgeEnvelope& env, std::uint64_t rx) { tap(env, rx); });
  } catch (const Error& e) {
    if (e.code() == Errc::BindError || e.code() == Errc::SetupFailure) throw;
    fail(Errc::SetupFailure, e.what());
  }

  std::vector<net::Endpoint> ot;
  for (auto port : gateway_->ports()) ot.push_back({"127.0.0.1", port});
  for (const auto& p : cfg_.simulators) {
    auto slot = std::make_unique<SimSlot>();
    slot->sim = std::make_unique<otbus::Simulator>(p, ot);
    slot->asset = meta_->resolve_source(p.publisher_id, p.writer_id)->asset;
    slot->running = true;
    auto* s = slot.get();
    slot->thread = std::jthread([s](std::stop_token st) {
      s->sim->run(st);
      s->running = false;
    });
    sims_.push_back(std::move(slot));
  }

  if (cfg_.video.enabled) {
    auto pair = engine::make_transport(cfg_.video.transport);
    video_tx_ = std::move(pair.sender);
    video_rx_ = std::move(pair.receiver);
    receive_thread_ = std::jthread([this](std::stop_token st) { receive_loop(st); });
    render_thread_ = std::jthread([this](std::stop_token st) { render_loop(st); });
  }

  last_mono_ = mono_now_ns();
  last_gw_ = gateway_->stats();
  running_ = true;
  sample(last_mono_, 0);
  sampler_ = std::jthread([this](std::stop_token st) { sample_loop(st); });
}

void Stack::stop() {
  std::lock_guard control(control_mu_);
  if (!running_) return;
  running_ = false;
  stopped_ = true;
  sampler_ = {};
  render_thread_ = {};
  if (video_tx_) video_tx_->close();
  receive_thread_ = {};
  for (auto& s : sims_) s->thread = {};
  gateway_->stop();
  feeder_->stop();
  export_series();
  bus_.close(kEventsChannel);
  if (broker_server_) broker_server_->stop();
}

// Keeps the twin's series in the document/segment stores so a stopped
// stack leaves its history on disk.
void Stack::export_series() {
  if (cfg_.data_dir.empty()) return;
  try {
    twin::AssetStores stores(cfg_.data_dir / "assets");
    for (const auto& a : twin_->assets()) {
      nlohmann::json doc{{"assetId", a.str()}, {"variables", twin_->variables(a)}};
      const auto text = doc.dump();
      stores.put(twin::StoreKind::Document, a.str(), Bytes(text.begin(), text.end()));
      for (const auto& v : twin_->variables(a)) stores.put(twin::StoreKind::SeriesSegment, a.str() + "/" + v, twin_->export_series(a, v));
    }
  } catch (const Error&) {
    // Export is best effort; the broker log remains the source of truth.
  }
}

std::vector<std::uint16_t> Stack::ot_ports() const {
  if (!gateway_) fail(Errc::NotRunning, "stack not started");
  return gateway_->ports();
}

std::uint16_t Stack::broker_port() const {
  if (!broker_server_) fail(Errc::NotRunning, "embedded broker is not served over TCP");
  return broker_server_->port();
}

void Stack::tap(const gateway::BridgeEnvelope& env, std::uint64_t rx) {
  auto it = asset_class_.find(env.asset);
  const auto c = cls(it == asset_class_.end() ? QosClass::SensorData : it->second);
  std::lock_guard lk(window_->mu);
  window_->ot[env.asset].push_back(diff(env.gw_rx_unix_ns, env.ot_ts_unix_ns));
  window_->residence[c].push_back(diff(env.gw_tx_unix_ns, env.gw_rx_unix_ns));
  window_->delivery[c].push_back(diff(rx, env.gw_tx_unix_ns));
  ++window_->delivered[c];
}

void Stack::sample_loop(std::stop_token st) {
  std::mutex m;
  std::condition_variable_any cv;
  std::uint64_t next = last_mono_;
  while (!st.stop_requested()) {
    next += 1'000'000'000;
    std::unique_lock lk(m);
    const auto wait = std::chrono::nanoseconds(diff(next, mono_now_ns()));
    if (cv.wait_for(lk, st, wait, [] { return false; })) break;
    if (st.stop_requested()) break;
    const auto now = mono_now_ns();
    sample(now, static_cast<double>(now - last_mono_) / 1e9);
    last_mono_ = now;
  }
}

void Stack::sample(std::uint64_t now_mono, double seconds) {
  Window w;
  {
    std::lock_guard lk(window_->mu);
    std::swap(w.ot, window_->ot);
    std::swap(w.residence, window_->residence);
    std::swap(w.delivery, window_->delivery);
    std::swap(w.delivered, window_->delivered);
    std::swap(w.render_ns, window_->render_ns);
    std::swap(w.stream_ns, window_->stream_ns);
  }
  bool healthy = true;
  try {
    broker_->describe();
  } catch (const Error&) {
    healthy = false;
  }
  const auto gw = gateway_->stats();
  auto rate = [&](std::uint64_t now, std::uint64_t before) {
    return seconds > 0 ? static_cast<double>(diff(now, before)) / seconds : 0.0;
  };

  auto t = std::make_shared<TopologySnapshot>();
  t->sampled_unix_ns = unix_now_ns();
  t->window_sec = seconds;
  std::set<QosClass> used;
  for (const auto& [asset, q] : asset_class_) {
    t->nodes.push_back({machine_node(asset), "machine", asset});
    used.insert(q);
    auto before = last_gw_.received_by_asset.find(asset.str());
    auto after = gw.received_by_asset.find(asset.str());
    const std::uint64_t b = before == last_gw_.received_by_asset.end() ? 0 : before->second;
    const std::uint64_t a = after == gw.received_by_asset.end() ? 0 : after->second;
    auto ot = w.ot.find(asset);
    t->edges.push_back({machine_node(asset), "gateway", q, rate(a, b), ot == w.ot.end() ? 0 : p50_of(ot->second)});
  }
  for (const char* n : {"gateway", "broker", "twin"}) t->nodes.push_back({n, n, std::nullopt});
  for (auto q : kClasses) {
    if (!used.contains(q)) continue;
    const auto c = cls(q);
    t->edges.push_back(
        {"gateway", "broker", q, rate(gw.produced_by_class[c], last_gw_.produced_by_class[c]), p50_of(w.residence[c])});
    t->edges.push_back({"broker", "twin", q, seconds > 0 ? static_cast<double>(w.delivered[c]) / seconds : 0.0,
                        p50_of(w.delivery[c])});
  }
  if (cfg_.video.enabled) {
    t->nodes.push_back({"engine", "engine", std::nullopt});
    t->nodes.push_back({"consumer", "consumer", std::nullopt});
    const double per = seconds > 0 ? 1.0 / seconds : 0.0;
    t->edges.push_back({"twin", "engine", QosClass::Video, static_cast<double>(w.render_ns.size()) * per,
                        p50_of(w.render_ns)});
    t->edges.push_back({"engine", "consumer", QosClass::Video, static_cast<double>(w.stream_ns.size()) * per,
                        p50_of(w.stream_ns)});
  }
  last_gw_ = gw;
  (void)now_mono;
  {
    std::lock_guard lk(topo_mu_);
    topo_ = t;
    broker_healthy_ = healthy;
  }
  if (seconds > 0) {
    try {
      bus_.publish(kEventsChannel, {"", "stats", to_bytes(to_json(*t).dump()), 0});
    } catch (const Error&) {
      // Channel closed during shutdown.
    }
  }
}

std::shared_ptr<const TopologySnapshot> Stack::topology() const {
  if (!running_) fail(Errc::NotRunning, "stack not running");
  std::lock_guard lk(topo_mu_);
  if (!broker_healthy_) fail(Errc::BrokerUnavailable, "broker unreachable");
  return topo_;
}

std::shared_ptr<const VideoFrame> Stack::latest_video() const {
  std::lock_guard lk(video_mu_);
  return video_;
}

void Stack::render_loop(std::stop_token st) {
  const auto size = engine::frame_size(cfg_.video.preset);
  const auto period = std::chrono::nanoseconds(1'000'000'000 / cfg_.video.fps);
  const auto window = std::uint64_t{cfg_.video.window_sec} * 1'000'000'000;
  auto next = std::chrono::steady_clock::now();
  std::uint64_t seq = 0;
  while (!st.stop_requested()) {
    const auto t0 = mono_now_ns();
    auto frame = engine::synthetic_frame(size.width, size.height, seq++, t0);
    if (!cfg_.video.overlay.series.empty()) {
      const auto now = unix_now_ns();
      try {
        auto view = engine::capture_view(*twin_, cfg_.video.overlay, now - std::min(now, window), now);
        engine::render_in_place(frame, cfg_.video.overlay, view);
      } catch (const Error&) {
        // No data yet for some series: stream the plain frame.
      }
    }
    {
      std::lock_guard lk(window_->mu);
      window_->render_ns.push_back(mono_now_ns() - t0);
    }
    frame.capture_ns = mono_now_ns();
    try {
      video_tx_->send(std::move(frame));
    } catch (const Error&) {
      return;
    }
    next += period;
    const auto now = std::chrono::steady_clock::now();
    if (next < now) next = now;
    std::mutex m;
    std::condition_variable_any cv;
    std::unique_lock lk(m);
    cv.wait_until(lk, st, next, [] { return false; });
  }
}

void Stack::receive_loop(std::stop_token st) {
  while (!st.stop_requested()) {
    std::optional<engine::Frame> f;
    try {
      f = video_rx_->recv(100ms);
    } catch (const Error& e) {
      if (e.code() == Errc::TransportClosed) return;
      continue;
    }
    if (!f) continue;
    {
      std::lock_guard lk(window_->mu);
      window_->stream_ns.push_back(diff(mono_now_ns(), f->capture_ns));
    }
    auto out = std::make_shared<VideoFrame>();
    const auto k = browser_downscale_factor(f->width, f->height);
    out->seq = f->seq;
    if (k == 1) {
      out->width = f->width;
      out->height = f->height;
      out->rgba = f->payload;
    } else {
      out->width = f->width / k;
      out->height = f->height / k;
      out->rgba.resize(engine::Frame::payload_size(out->width, out->height));
      simd::downscale_box(f->payload, f->width, f->height, k, out->rgba);
    }
    video_rx_->recycle(std::move(*f));
    std::lock_guard lk(video_mu_);
    video_ = std::move(out);
  }
}

nlohmann::json Stack::effective_config() const {
  nlohmann::json sims = nlohmann::json::array();
  for (const auto& s : sims_)
    sims.push_back({{"publisherId", s->sim->profile().publisher_id},
                    {"writerId", s->sim->profile().writer_id},
                    {"assetId", s->asset.str()},
                    {"ratePerSec", s->sim->rate()},
                    {"running", s->running.load()}});
  nlohmann::json policies = nlohmann::json::object();
  nlohmann::json pre = nlohmann::json::object();
  if (gateway_) {
    for (auto q : kClasses) policies[std::string(broker::to_string(q))] = gateway::to_json(gateway_->policy(q));
    for (const auto& b : meta_->static_bindings()) pre[b.asset.str()] = gateway::to_json(gateway_->preprocess_for(b.asset));
  }
  return {{"simulators", sims}, {"policies", policies}, {"preprocess", pre}};
}

nlohmann::json Stack::apply_qos(const nlohmann::json& req) {
  std::lock_guard control(control_mu_);
  if (!running_) fail(Errc::NotRunning, "stack not running");
  if (!req.is_object()) fail(Errc::InvalidArgument, "request must be a JSON object");
  std::string target;
  try {
    target = req.at("target").get<std::string>();
    if (target == "SimulatorRate") {
      const auto pub = req.at("publisherId").get<std::uint16_t>();
      const auto rate = req.at("ratePerSec").get<std::int64_t>();
      if (rate < 1 || rate > 100000) fail(Errc::InvalidArgument, "ratePerSec must be in [1, 100000]");
      bool found = false;
      for (auto& s : sims_)
        if (s->sim->profile().publisher_id == pub) {
          if (!s->running) fail(Errc::NotRunning, "simulator " + std::to_string(pub) + " is not running");
          s->sim->set_rate(static_cast<std::uint32_t>(rate));
          found = true;
        }
      if (!found) fail(Errc::NotRunning, "no simulator with publisherId " + std::to_string(pub));
    } else if (target == "FlowPolicy") {
      const auto q = broker::qos_from_string(req.at("qosClass").get<std::string>());
      auto p = gateway_->policy(q);
      p.batch_max_messages = req.value("batchMaxMessages", p.batch_max_messages);
      p.batch_max_ms = req.value("batchMaxMs", p.batch_max_ms);
      if (req.contains("preprocess")) p.preprocess = gateway::preprocess_from_json(req.at("preprocess"));
      gateway_->set_policy(p);
    } else if (target == "Preprocess") {
      const auto asset = AssetId::parse(req.at("assetId").get<std::string>());
      const auto spec = gateway::preprocess_from_json(req.at("spec"));
      try {
        if (spec.mode == gateway::PreprocessMode::None)
          gateway_->clear_preprocess(asset);
        else
          gateway_->set_preprocess(asset, spec);
      } catch (const Error& e) {
        if (e.code() == Errc::UnboundAsset) fail(Errc::NotRunning, e.what());
        throw;
      }
    } else {
      fail(Errc::InvalidArgument, "unknown target '" + target + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("qos request: ") + e.what());
  }
  return effective_config();
}

}  // namespace smv::stack
