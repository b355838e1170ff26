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

namespace smv::stack {

namespace {

engine::OverlaySpec overlay_from_json(const nlohmann::json& j) {
  engine::OverlaySpec o;
  for (const auto& s : j.value("series", nlohmann::json::array()))
    o.series.push_back({AssetId::parse(s.at("assetId").get<std::string>()), s.at("variable").get<std::string>(),
                        twin::resolution_from_string(s.value("resolution", std::string("R1s")))});
  const auto spatial = j.value("spatial", nlohmann::json::object());
  for (const auto& [k, v] : spatial.items())
    o.spatial[AssetId::parse(k)] = {v.at("x").get<std::uint32_t>(), v.at("y").get<std::uint32_t>()};
  return o;
}

}  // namespace

StackConfig stack_config_from_json(const nlohmann::json& j) {
  StackConfig c;
  try {
    c.metadata = j.value("metadata", nlohmann::json::object());
    if (j.contains("gateway")) c.gateway = gateway::gateway_config_from_json(j.at("gateway"));
    for (const auto& p : j.value("simulators", nlohmann::json::array()))
      c.simulators.push_back(otbus::profile_from_json(p));
    if (j.contains("twin")) c.twin = twin::twin_config_from_json(j.at("twin"));
    if (j.contains("video")) {
      const auto& v = j.at("video");
      c.video.enabled = v.value("enabled", true);
      c.video.preset = engine::preset_from_string(v.value("preset", std::string("HD")));
      c.video.fps = v.value("fps", c.video.fps);
      c.video.transport = engine::transport_from_string(v.value("transport", std::string("zerocopy")));
      c.video.window_sec = v.value("windowSec", c.video.window_sec);
      if (v.contains("overlay")) c.video.overlay = overlay_from_json(v.at("overlay"));
    }
    c.data_dir = j.value("dataDir", std::string());
    if (j.contains("broker")) {
      const auto& b = j.at("broker");
      c.broker_address = b.value("address", std::string());
      if (b.contains("listen")) c.broker_listen = net::Endpoint::parse(b.at("listen").get<std::string>());
    }
    if (j.contains("http")) c.http = net::Endpoint::parse(j.at("http").get<std::string>());
    c.http_threads = j.value("httpThreads", c.http_threads);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("stack config: ") + e.what());
  }
  if (c.video.fps == 0 || c.video.fps > 240) fail(Errc::InvalidArgument, "video.fps must be in [1, 240]");
  if (c.video.window_sec == 0) fail(Errc::InvalidArgument, "video.windowSec must be > 0");
  if (c.http_threads == 0) fail(Errc::InvalidArgument, "httpThreads must be > 0");
  for (const auto& p : c.simulators) p.validate();
  return c;
}

}  // namespace smv::stack
