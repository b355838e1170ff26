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

#include <gtest/gtest.h>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <sys/socket.h>

#include <thread>

#include "../support/expect.hpp"
#include "smv/api/server.hpp"
#include "smv/common/clock.hpp"

namespace smv::api {
namespace {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using namespace std::chrono_literals;
using nlohmann::json;

// ---- fixture ---------------------------------------------------------------

const char* kM1 = "acme.bo.a1.c1.m1";  // 400 msg/s, sine + constant
const char* kM2 = "acme.bo.a1.c1.m2";  // 100 msg/s, uniform noise feeding a z-score rule
const char* kM3 = "acme.bo.a1.c2.m3";  // 100 msg/s, constant only

json sim(int pub, int rate, json vars) {
  return {{"publisherId", pub}, {"writerId", 1}, {"ratePerSec", rate}, {"durationSec", 0}, {"seed", pub},
          {"variables", vars}};
}

json plant_config(bool video = true, bool sims = true) {
  json meta = {
      {"bindings",
       {{{"assetId", kM1}, {"publisherId", 1}, {"writerId", 1}},
        {{"assetId", kM2}, {"publisherId", 2}, {"writerId", 1}},
        {{"assetId", kM3}, {"publisherId", 3}, {"writerId", 1}}}},
      {"apps",
       {{{"appId", "ops"},
         {"assetIds", {"acme.*"}},
         {"views", {"Latest", "Series", "Video", "Topology"}},
         {"maxResolution", "Raw"}},
        {{"appId", "viewer"}, {"assetIds", {kM1}}, {"views", {"Latest", "Series"}}, {"maxResolution", "R10s"}},
        {{"appId", "c2-ops"}, {"assetIds", {"acme.bo.a1.c2.*"}}, {"views", {"Latest", "Topology", "Video"}}}}}};
  json c = {{"metadata", meta},
            {"twin",
             {{"fusionRules",
               {{{"ruleId", "vib-outlier"},
                 {"inputs", {{{"assetId", kM2}, {"variable", "vib"}}}},
                 {"zscore", {{"windowN", 20}, {"k", 1.5}}},
                 {"output", {{"assetId", kM2}, {"variable", "vib_z"}}}}}}}},
            {"video",
             {{"enabled", video},
              {"preset", "HD"},
              {"fps", 30},
              {"overlay",
               {{"series", {{{"assetId", kM1}, {"variable", "temp"}, {"resolution", "Raw"}}}},
                {"spatial", {{kM1, {{"x", 16}, {"y", 16}}}}}}}}},
            {"simulators", json::array()}};
  if (sims) {
    c["simulators"] = {
        sim(1, 400,
            {{{"name", "temp"}, {"waveform", "sine"}, {"params", {{"offset", 60}, {"amplitude", 5}, {"periodSec", 2}}}},
             {{"name", "rpm"}, {"waveform", "constant"}, {"params", {{"value", 1500}}}}}),
        sim(2, 100, {{{"name", "vib"}, {"waveform", "uniform-noise"}, {"params", {{"min", 0}, {"max", 1}}}}}),
        sim(3, 100, {{{"name", "level"}, {"waveform", "constant"}, {"params", {{"value", 7}}}}})};
  }
  return c;
}

struct Running {
  explicit Running(json cfg) : stack(stack::stack_config_from_json(cfg)) {
    stack.start();
    api = std::make_unique<OperatorApi>(stack, net::Endpoint{"127.0.0.1", 0});
  }
  ~Running() {
    api.reset();
    stack.stop();
  }
  stack::Stack stack;
  std::unique_ptr<OperatorApi> api;
};

// ---- client helpers --------------------------------------------------------

struct Reply {
  unsigned status = 0;
  std::string body;
  json j() const { return json::parse(body); }
};

Reply request(std::uint16_t port, http::verb method, const std::string& target, const std::string& app,
              const std::string& body = {}) {
  asio::io_context io;
  tcp::socket s(io);
  s.connect({asio::ip::make_address("127.0.0.1"), port});
  http::request<http::string_body> req{method, target, 11};
  req.set(http::field::host, "localhost");
  if (!app.empty()) req.set("X-App-Id", app);
  if (!body.empty()) {
    req.set(http::field::content_type, "application/json");
    req.body() = body;
  }
  req.prepare_payload();
  http::write(s, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(s, buf, res);
  return {res.result_int(), res.body()};
}

Reply get(std::uint16_t port, const std::string& target, const std::string& app = "ops") {
  return request(port, http::verb::get, target, app);
}

Reply post_qos(std::uint16_t port, const json& body, const std::string& app = "ops") {
  return request(port, http::verb::post, "/qos", app, body.dump());
}

struct WsClient {
  WsClient(std::uint16_t port, const std::string& path, const std::string& app, const std::string& proto)
      : ws(io) {
    ws.next_layer().connect({asio::ip::make_address("127.0.0.1"), port});
    timeval tv{3, 0};
    ::setsockopt(ws.next_layer().native_handle(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ws.set_option(websocket::stream_base::decorator([&](websocket::request_type& r) {
      if (!app.empty()) r.set("X-App-Id", app);
      if (!proto.empty()) r.set(http::field::sec_websocket_protocol, proto);
    }));
    ws.handshake(response, "localhost", path);
  }
  /// Next message, or nullopt once the server closed the stream.
  std::optional<std::string> read() {
    beast::flat_buffer buf;
    beast::error_code ec;
    ws.read(buf, ec);
    if (ec) {
      error = ec;
      return std::nullopt;
    }
    return beast::buffers_to_string(buf.data());
  }
  asio::io_context io;
  websocket::stream<tcp::socket> ws;
  websocket::response_type response;
  beast::error_code error;
};

const json* edge(const json& topo, const std::string& from, const std::string& to) {
  for (const auto& e : topo["edges"])
    if (e["from"] == from && e["to"] == to) return &e;
  return nullptr;
}

double machine_rate(std::uint16_t port, const char* asset) {
  auto t = get(port, "/topology").j();
  const auto* e = edge(t, std::string("machine:") + asset, "gateway");
  return e ? (*e)["msgRatePerSec"].get<double>() : -1;
}

// ---- pure helpers ----------------------------------------------------------

TEST(Api, QueryParsing) {
  auto q = parse_query("var=temp&from=10&x=a%20b+c&flag&&to=");
  EXPECT_EQ(q.at("var"), "temp");
  EXPECT_EQ(q.at("from"), "10");
  EXPECT_EQ(q.at("x"), "a b c");
  EXPECT_EQ(q.at("flag"), "");
  EXPECT_EQ(q.at("to"), "");
  EXPECT_EQ(percent_decode("acme.bo.%2A"), "acme.bo.*");
  EXPECT_EQ(testing::error_of([] { percent_decode("%4"); }), Errc::InvalidArgument);
  EXPECT_EQ(testing::error_of([] { percent_decode("%zz"); }), Errc::InvalidArgument);
}

TEST(Api, VideoMessageLayout) {
  stack::VideoFrame f{2, 1, 0x0102030405060708ull, {1, 2, 3, 4, 5, 6, 7, 8}};
  const Bytes want = {2, 0, 0, 0, 1, 0, 0, 0, 8, 7, 6, 5, 4, 3, 2, 1, 1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_EQ(encode_video_message(f), want);
  EXPECT_EQ(stack::browser_downscale_factor(1280, 720), 1u);
  EXPECT_EQ(stack::browser_downscale_factor(1920, 1080), 1u);
  EXPECT_EQ(stack::browser_downscale_factor(2560, 1440), 2u);
  EXPECT_EQ(stack::browser_downscale_factor(3840, 2160), 2u);
  EXPECT_EQ(stack::browser_downscale_factor(7680, 4320), 4u);
  EXPECT_EQ(stack::browser_downscale_factor(1921, 100), 2u);
}

TEST(Api, StatusMapping) {
  EXPECT_EQ(status_for(Errc::Forbidden), 403u);
  EXPECT_EQ(status_for(Errc::UnknownBinding), 403u);
  EXPECT_EQ(status_for(Errc::UnknownAsset), 404u);
  EXPECT_EQ(status_for(Errc::InvalidArgument), 400u);
  EXPECT_EQ(status_for(Errc::NotRunning), 409u);
  EXPECT_EQ(status_for(Errc::BrokerUnavailable), 503u);
}

TEST(StackConfig, RejectsBadValues) {
  auto c = plant_config();
  c["video"]["fps"] = 0;
  EXPECT_EQ(testing::error_of([&] { stack::stack_config_from_json(c); }), Errc::InvalidArgument);
  c = plant_config();
  c["simulators"][0]["ratePerSec"] = 0;
  EXPECT_EQ(testing::error_of([&] { stack::stack_config_from_json(c); }), Errc::InvalidArgument);
  c = plant_config();
  c["simulators"][0]["publisherId"] = 42;  // no binding
  EXPECT_EQ(testing::error_of([&] { stack::Stack s(stack::stack_config_from_json(c)); }), Errc::InvalidArgument);
  c = plant_config();
  c["video"]["overlay"]["spatial"][kM1]["x"] = 5000;
  EXPECT_EQ(testing::error_of([&] { stack::Stack s(stack::stack_config_from_json(c)); }), Errc::InvalidArgument);
}

// ---- stack not running -----------------------------------------------------

TEST(Api, UnavailableStackAnswers503) {
  stack::Stack idle(stack::stack_config_from_json(plant_config(false, false)));
  OperatorApi api(idle, {"127.0.0.1", 0});
  EXPECT_EQ(get(api.port(), "/topology").status, 503u);
  EXPECT_EQ(get(api.port(), "/healthz").status, 503u);
  EXPECT_EQ(get(api.port(), std::string("/assets/") + kM1 + "/latest").status, 503u);
  EXPECT_EQ(post_qos(api.port(), {{"target", "SimulatorRate"}, {"publisherId", 1}, {"ratePerSec", 5}}).status, 409u);
}

TEST(Api, IdleSystemReportsZeroRates) {
  Running r(plant_config(false, false));
  std::this_thread::sleep_for(1200ms);
  auto t = get(r.api->port(), "/topology").j();
  EXPECT_GE(t["nodes"].size(), 5u);
  ASSERT_FALSE(t["edges"].empty());
  for (const auto& e : t["edges"]) EXPECT_EQ(e["msgRatePerSec"].get<double>(), 0.0) << e.dump();
  EXPECT_EQ(get(r.api->port(), "/healthz").status, 200u);
}

// ---- the live plant --------------------------------------------------------

class LivePlant : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    plant_ = new Running(plant_config());
    std::this_thread::sleep_for(2500ms);
  }
  static void TearDownTestSuite() {
    delete plant_;
    plant_ = nullptr;
  }
  std::uint16_t port() const { return plant_->api->port(); }
  static Running* plant_;
};
Running* LivePlant::plant_ = nullptr;

TEST_F(LivePlant, TopologyCarriesLiveRates) {
  auto t = get(port(), "/topology").j();
  std::set<std::string> ids, kinds;
  for (const auto& n : t["nodes"]) {
    ids.insert(n["id"]);
    kinds.insert(n["kind"]);
  }
  EXPECT_GE(ids.size(), 5u);
  EXPECT_EQ(kinds, (std::set<std::string>{"machine", "gateway", "broker", "twin", "engine", "consumer"}));
  for (const auto& e : t["edges"]) {
    EXPECT_TRUE(ids.contains(e["from"])) << e.dump();
    EXPECT_TRUE(ids.contains(e["to"])) << e.dump();
    EXPECT_GE(e["msgRatePerSec"].get<double>(), 0.0);
  }
  EXPECT_NEAR(machine_rate(port(), kM1), 400.0, 40.0);
  EXPECT_NEAR(machine_rate(port(), kM2), 100.0, 10.0);
  const auto* twin_in = edge(t, "broker", "twin");
  ASSERT_TRUE(twin_in);
  EXPECT_GT((*twin_in)["msgRatePerSec"].get<double>(), 0.0);
  EXPECT_GT((*twin_in)["p50LatencyNs"].get<std::uint64_t>(), 0u);
  const auto* video = edge(t, "engine", "consumer");
  ASSERT_TRUE(video);
  EXPECT_NEAR((*video)["msgRatePerSec"].get<double>(), 30.0, 6.0);
  EXPECT_LE(unix_now_ns() - t["sampledUnixNs"].get<std::uint64_t>(), 1'500'000'000u);
}

TEST_F(LivePlant, TopologyIsScopedToTheApp) {
  auto t = get(port(), "/topology", "c2-ops").j();
  std::set<std::string> machines;
  for (const auto& n : t["nodes"])
    if (n["kind"] == "machine") machines.insert(n["assetId"]);
  EXPECT_EQ(machines, std::set<std::string>{kM3});
  EXPECT_EQ(get(port(), "/topology", "viewer").status, 403u);
  EXPECT_EQ(get(port(), "/topology", "").status, 403u);
  EXPECT_EQ(get(port(), "/topology", "nobody").status, 403u);
}

TEST_F(LivePlant, AssetQueries) {
  auto latest = get(port(), std::string("/assets/") + kM1 + "/latest", "viewer");
  ASSERT_EQ(latest.status, 200u) << latest.body;
  EXPECT_EQ(latest.j()["rpm"]["value"], 1500.0);

  const auto now = unix_now_ns();
  const auto range = "&from=" + std::to_string(now - 60'000'000'000ull) + "&to=" + std::to_string(now);
  auto series = get(port(), std::string("/assets/") + kM1 + "/series?var=temp&res=R10s" + range, "viewer");
  ASSERT_EQ(series.status, 200u) << series.body;
  EXPECT_EQ(series.j()["resolution"], "R10s");

  auto raw = get(port(), std::string("/assets/") + kM1 + "/series?var=temp&res=Raw" + range, "ops");
  ASSERT_EQ(raw.status, 200u);
  EXPECT_GT(raw.j()["points"].size(), 100u);

  auto cell = get(port(), "/assets/acme.bo.a1.c1.*/series?var=rpm&res=R1s" + range, "ops");
  ASSERT_EQ(cell.status, 200u) << cell.body;
  EXPECT_FALSE(cell.j()["buckets"].empty());

  auto tree = get(port(), "/assets", "c2-ops");
  ASSERT_EQ(tree.status, 200u);
  EXPECT_NE(tree.body.find(kM3), std::string::npos);
  EXPECT_EQ(tree.body.find(kM1), std::string::npos);
}

TEST_F(LivePlant, AuthorizationOnEveryAssetRoute) {
  const std::string m2 = std::string("/assets/") + kM2;
  const std::string m1 = std::string("/assets/") + kM1;
  // viewer is bound to m1 only, up to R10s, without Topology.
  for (const auto& target :
       {m2 + "/latest", m2 + "/series?var=vib", m1 + "/series?var=temp&res=Raw", m1 + "/series?var=temp&res=R1s",
        std::string("/assets/acme.bo.a1.c1.*/series?var=temp&res=R10s"), std::string("/assets"),
        std::string("/config"), std::string("/topology")})
    EXPECT_EQ(get(port(), target, "viewer").status, 403u) << target;
  for (const auto& target : {m1 + "/latest", m1 + "/series?var=temp"}) {
    EXPECT_EQ(get(port(), target, "").status, 403u) << target;
    EXPECT_EQ(get(port(), target, "nobody").status, 403u) << target;
  }
  EXPECT_EQ(post_qos(port(), {{"target", "SimulatorRate"}, {"publisherId", 1}, {"ratePerSec", 5}}, "viewer").status,
            403u);
  // c2-ops has Latest but not Series.
  EXPECT_EQ(get(port(), std::string("/assets/") + kM3 + "/series?var=level", "c2-ops").status, 403u);
  EXPECT_EQ(get(port(), std::string("/assets/") + kM3 + "/latest", "c2-ops").status, 200u);
}

TEST_F(LivePlant, ErrorStatuses) {
  EXPECT_EQ(get(port(), "/assets/acme.bo.a1.c1.m9/latest").status, 404u);
  EXPECT_EQ(get(port(), std::string("/assets/") + kM1 + "/series?var=nope").status, 404u);
  EXPECT_EQ(get(port(), std::string("/assets/") + kM1 + "/series").status, 400u);
  EXPECT_EQ(get(port(), std::string("/assets/") + kM1 + "/series?var=temp&from=x").status, 400u);
  EXPECT_EQ(get(port(), std::string("/assets/") + kM1 + "/series?var=temp&res=R5s").status, 400u);
  EXPECT_EQ(get(port(), std::string("/assets/") + kM1 + "/series?var=temp&from=9&to=1").status, 400u);
  EXPECT_EQ(get(port(), "/assets/not-an-id/latest").status, 400u);
  EXPECT_EQ(get(port(), "/nowhere").status, 404u);
  EXPECT_EQ(request(port(), http::verb::post, "/topology", "ops").status, 405u);
  EXPECT_EQ(request(port(), http::verb::get, "/qos", "ops").status, 405u);
}

TEST_F(LivePlant, QosValidation) {
  EXPECT_EQ(post_qos(port(), {{"target", "FlowPolicy"}, {"qosClass", "Control"}, {"batchMaxMessages", 2}}).status,
            400u);
  EXPECT_EQ(post_qos(port(), {{"target", "SimulatorRate"}, {"publisherId", 1}, {"ratePerSec", 0}}).status, 400u);
  EXPECT_EQ(post_qos(port(), {{"target", "SimulatorRate"}, {"publisherId", 1}, {"ratePerSec", 100001}}).status, 400u);
  EXPECT_EQ(post_qos(port(), {{"target", "SimulatorRate"}, {"publisherId", 9}, {"ratePerSec", 10}}).status, 409u);
  EXPECT_EQ(post_qos(port(), {{"target", "Teleport"}}).status, 400u);
  EXPECT_EQ(post_qos(port(), {{"target", "Preprocess"}, {"assetId", kM3}, {"spec", {{"mode", "Deadband"}, {"delta", -1}}}})
                .status,
            400u);
  EXPECT_EQ(post_qos(port(),
                     {{"target", "Preprocess"}, {"assetId", "acme.bo.a1.c9.m9"}, {"spec", {{"mode", "Deadband"}, {"delta", 1}}}})
                .status,
            409u);
  EXPECT_EQ(request(port(), http::verb::post, "/qos", "ops", "{not json").status, 400u);

  auto ok = post_qos(port(), {{"target", "FlowPolicy"}, {"qosClass", "SensorData"}, {"batchMaxMessages", 8},
                              {"batchMaxMs", 5}});
  ASSERT_EQ(ok.status, 200u) << ok.body;
  EXPECT_EQ(ok.j()["policies"]["SensorData"]["batchMaxMessages"], 8);
  EXPECT_EQ(get(port(), "/config").j()["policies"]["SensorData"]["batchMaxMs"], 5);
  ASSERT_EQ(post_qos(port(), {{"target", "FlowPolicy"}, {"qosClass", "SensorData"}, {"batchMaxMessages", 1},
                              {"batchMaxMs", 0}})
                .status,
            200u);
}

TEST_F(LivePlant, RateChangeShowsUpWithinTwoSeconds) {
  auto res = post_qos(port(), {{"target", "SimulatorRate"}, {"publisherId", 1}, {"ratePerSec", 1200}});
  ASSERT_EQ(res.status, 200u) << res.body;
  EXPECT_EQ(res.j()["simulators"][0]["ratePerSec"], 1200);
  const auto t0 = std::chrono::steady_clock::now();
  double rate = 0;
  while (std::chrono::steady_clock::now() - t0 < 2s) {
    rate = machine_rate(port(), kM1);
    if (std::abs(rate - 1200) <= 120) break;
    std::this_thread::sleep_for(50ms);
  }
  EXPECT_NEAR(rate, 1200.0, 120.0);
  ASSERT_EQ(post_qos(port(), {{"target", "SimulatorRate"}, {"publisherId", 1}, {"ratePerSec", 400}}).status, 200u);
}

TEST_F(LivePlant, DeadbandSilencesAConstantSignal) {
  auto& b = plant_->stack.broker();
  const auto topic = twin::default_topic(AssetId::parse(kM3));
  auto offsets = [&] {
    for (const auto& t : b.describe())
      if (t.spec.name == topic) return t.partitions.at(0).high_watermark;
    return std::uint64_t{0};
  };
  const auto a0 = offsets();
  std::this_thread::sleep_for(1s);
  EXPECT_NEAR(static_cast<double>(offsets() - a0), 100.0, 20.0);

  auto res = post_qos(port(), {{"target", "Preprocess"}, {"assetId", kM3}, {"spec", {{"mode", "Deadband"}, {"delta", 0.5}}}});
  ASSERT_EQ(res.status, 200u) << res.body;
  EXPECT_EQ(res.j()["preprocess"][kM3]["mode"], "Deadband");
  std::this_thread::sleep_for(200ms);
  const auto b0 = offsets();
  std::this_thread::sleep_for(1s);
  EXPECT_LE(offsets() - b0, 1u);
  ASSERT_EQ(post_qos(port(), {{"target", "Preprocess"}, {"assetId", kM3}, {"spec", {{"mode", "None"}}}}).status, 200u);
}

TEST_F(LivePlant, EventsStreamStatsAndFusionFlags) {
  WsClient c(port(), "/events", "ops", kEventsProtocol);
  EXPECT_EQ(c.response[http::field::sec_websocket_protocol], kEventsProtocol);
  bool stats = false, fusion = false;
  const auto t0 = std::chrono::steady_clock::now();
  while ((!stats || !fusion) && std::chrono::steady_clock::now() - t0 < 3s) {
    auto m = c.read();
    ASSERT_TRUE(m) << c.error.message();
    auto j = json::parse(*m);
    if (j["type"] == "stats") {
      stats = true;
      EXPECT_TRUE(j["topology"].contains("edges"));
    } else if (j["type"] == "fusion") {
      EXPECT_EQ(j["ruleId"], "vib-outlier");
      EXPECT_TRUE(j["flagged"].get<bool>());
      const auto lag = static_cast<std::int64_t>(unix_now_ns() - j["tsUnixNs"].get<std::uint64_t>());
      EXPECT_LT(lag, 1'000'000'000);
      fusion = true;
    }
  }
  EXPECT_TRUE(stats);
  EXPECT_TRUE(fusion);
}

TEST_F(LivePlant, StatsArriveAtOneHertz) {
  WsClient c(port(), "/events", "c2-ops", "");
  int stats = 0;
  const auto t0 = std::chrono::steady_clock::now();
  while (std::chrono::steady_clock::now() - t0 < 2100ms) {
    auto m = c.read();
    ASSERT_TRUE(m);
    auto j = json::parse(*m);
    EXPECT_NE(j["type"], "fusion");  // c2-ops cannot see m2
    if (j["type"] == "stats") ++stats;
  }
  EXPECT_GE(stats, 1);
}

TEST_F(LivePlant, UnauthorizedStreamsAreClosed) {
  for (const auto& [path, app] : {std::pair{"/events", "viewer"}, {"/events", "nobody"}, {"/video", "viewer"},
                                  {"/video", "c2-ops"}, {"/video", ""}}) {
    WsClient c(port(), path, app, "");
    EXPECT_FALSE(c.read()) << path << " " << app;
    EXPECT_EQ(c.ws.reason().code, websocket::close_code::policy_error) << path << " " << app;
  }
  EXPECT_THROW(WsClient(port(), "/events", "ops", "video.v1"), beast::system_error);
  EXPECT_THROW(WsClient(port(), "/elsewhere", "ops", ""), beast::system_error);
}

TEST_F(LivePlant, VideoFramesCarryTheirHeader) {
  WsClient c(port(), "/video?app=ops", "", kVideoProtocol);
  std::uint64_t last = 0;
  for (int i = 0; i < 5; ++i) {
    auto m = c.read();
    ASSERT_TRUE(m);
    ASSERT_GE(m->size(), 16u);
    ByteReader r(ByteSpan(reinterpret_cast<const std::uint8_t*>(m->data()), m->size()));
    const auto w = r.u32(), h = r.u32();
    const auto seq = r.u64();
    EXPECT_EQ(w, 1280u);
    EXPECT_EQ(h, 720u);
    EXPECT_EQ(r.remaining(), std::size_t{w} * h * 4);
    if (i > 0) {
      EXPECT_GT(seq, last);
    }
    last = seq;
  }
}

TEST(Api, VideoIsDownscaledForBrowsers) {
  auto cfg = plant_config(true, false);
  cfg["video"]["preset"] = "4K";
  cfg["video"]["fps"] = 5;
  Running r(cfg);
  WsClient c(r.api->port(), "/video", "ops", kVideoProtocol);
  auto m = c.read();
  ASSERT_TRUE(m);
  ByteReader rd(ByteSpan(reinterpret_cast<const std::uint8_t*>(m->data()), m->size()));
  EXPECT_EQ(rd.u32(), 1920u);
  EXPECT_EQ(rd.u32(), 1080u);
  rd.u64();
  EXPECT_EQ(rd.remaining(), 1920u * 1080 * 4);
}

}  // namespace
}  // namespace smv::api
