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
#include <string>

#include <json.hpp>

#include "smv/stack/stack.hpp"

namespace smv::api {

struct Request {
  std::string method;
  /// Path plus optional query string, as sent on the request line.
  std::string target;
  /// Value of the X-App-Id header (or the `app` query parameter).
  std::string app_id;
  std::string body;
};

struct Response {
  unsigned status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Splits "a=1&b=x%20y" into decoded pairs. Throws InvalidArgument on a bad
/// escape.
std::map<std::string, std::string> parse_query(std::string_view q);
std::string percent_decode(std::string_view s);

/// Binary WebSocket video message: u32 width | u32 height | u64 seq | RGBA payload (little-endian).
Bytes encode_video_message(const stack::VideoFrame& f);

/// HTTP routes of the operator API. Every asset-scoped route authorizes the
/// caller's app binding before touching data.
///
///   GET  /healthz                         200 / 503
///   GET  /topology                        Topology view; machine nodes limited to the app's assets
///   GET  /assets                          asset tree visible to the app (Topology view)
///   GET  /assets/{id}/latest              Latest view
///   GET  /assets/{id}/series?var=&from=&to=&res=   Series view, res within maxResolution;
///                                         {id} may be a prefix pattern ("acme.bo.*")
///   GET  /config                          effective QoS configuration (Topology view)
///   POST /qos                             QoS change request (Topology view)
class Router {
 public:
  explicit Router(stack::Stack& stack) : stack_(stack) {}

  Response handle(const Request& req) const;

  /// Empty string when the app may open /events, else the reason.
  std::string events_denied(const std::string& app_id) const;
  std::string video_denied(const std::string& app_id) const;
  /// Topology restricted to what the app may see; nullopt without the view.
  std::optional<nlohmann::json> topology_for(const std::string& app_id, const stack::TopologySnapshot& t) const;
  bool may_see(const std::string& app_id, const AssetId& asset, twin::View view) const;

 private:
  Response topology(const Request& req) const;
  Response assets(const Request& req) const;
  Response asset_route(const Request& req, std::string_view rest, const std::map<std::string, std::string>& q) const;
  Response qos(const Request& req) const;
  Response config(const Request& req) const;
  void require_view(const std::string& app_id, twin::View view) const;

  stack::Stack& stack_;
};

/// HTTP status for an error raised while serving a route.
unsigned status_for(Errc code) noexcept;
Response error_response(unsigned status, const std::string& message);

}  // namespace smv::api
