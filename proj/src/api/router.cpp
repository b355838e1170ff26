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

#include "smv/api/router.hpp"

#include <charconv>

#include "smv/common/clock.hpp"

namespace smv::api {

namespace {

constexpr std::uint64_t kDefaultSpanNs = 3600ull * 1'000'000'000;

std::uint64_t parse_u64(const std::string& name, const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(Errc::InvalidArgument, "query parameter '" + name + "' must be an unsigned integer");
  return v;
}

Response json_ok(const nlohmann::json& j) { return {200, j.dump(), "application/json"}; }

int hex(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%') {
      if (i + 2 >= s.size()) fail(Errc::InvalidArgument, "truncated escape");
      const int hi = hex(s[i + 1]), lo = hex(s[i + 2]);
      if (hi < 0 || lo < 0) fail(Errc::InvalidArgument, "bad escape");
      out += static_cast<char>(hi * 16 + lo);
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::map<std::string, std::string> parse_query(std::string_view q) {
  std::map<std::string, std::string> out;
  while (!q.empty()) {
    const auto amp = q.find('&');
    const auto part = q.substr(0, amp);
    q = amp == std::string_view::npos ? std::string_view{} : q.substr(amp + 1);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    out[percent_decode(part.substr(0, eq))] = eq == std::string_view::npos ? "" : percent_decode(part.substr(eq + 1));
  }
  return out;
}

Bytes encode_video_message(const stack::VideoFrame& f) {
  Bytes out;
  out.reserve(16 + f.rgba.size());
  ByteWriter w(out);
  w.u32(f.width);
  w.u32(f.height);
  w.u64(f.seq);
  w.raw(f.rgba);
  return out;
}

unsigned status_for(Errc code) noexcept {
  switch (code) {
    case Errc::Forbidden:
    case Errc::UnknownBinding:
      return 403;
    case Errc::UnknownAsset:
    case Errc::UnknownVariable:
    case Errc::NotFound:
      return 404;
    case Errc::InvalidArgument:
    case Errc::ParseError:
    case Errc::PolicyViolation:
      return 400;
    case Errc::NotRunning:
      return 409;
    case Errc::BrokerUnavailable:
      return 503;
    default:
      return 500;
  }
}

Response error_response(unsigned status, const std::string& message) {
  return {status, nlohmann::json{{"error", message}}.dump(), "application/json"};
}

bool Router::may_see(const std::string& app_id, const AssetId& asset, twin::View view) const {
  try {
    stack_.metadata().authorize(app_id, asset, view);
    return true;
  } catch (const Error&) {
    return false;
  }
}

void Router::require_view(const std::string& app_id, twin::View view) const {
  if (app_id.empty()) fail(Errc::Forbidden, "missing X-App-Id");
  if (!stack_.metadata().app(app_id).views.contains(view))
    fail(Errc::Forbidden, "app '" + app_id + "' lacks the " + std::string(twin::to_string(view)) + " view");
}

std::optional<nlohmann::json> Router::topology_for(const std::string& app_id, const stack::TopologySnapshot& t) const {
  try {
    require_view(app_id, twin::View::Topology);
  } catch (const Error&) {
    return std::nullopt;
  }
  stack::TopologySnapshot out{t.sampled_unix_ns, t.window_sec, {}, {}};
  std::set<std::string> kept;
  for (const auto& n : t.nodes)
    if (!n.asset || may_see(app_id, *n.asset, twin::View::Topology)) {
      out.nodes.push_back(n);
      kept.insert(n.id);
    }
  for (const auto& e : t.edges)
    if (kept.contains(e.from) && kept.contains(e.to)) out.edges.push_back(e);
  return stack::to_json(out);
}

std::string Router::events_denied(const std::string& app_id) const {
  try {
    require_view(app_id, twin::View::Topology);
    return {};
  } catch (const Error& e) {
    return e.what();
  }
}

std::string Router::video_denied(const std::string& app_id) const {
  try {
    require_view(app_id, twin::View::Video);
    // The overlay shows these assets' data, so the app must see all of them.
    for (const auto& [asset, _] : stack_.config().video.overlay.spatial)
      stack_.metadata().authorize(app_id, asset, twin::View::Video);
    return {};
  } catch (const Error& e) {
    return e.what();
  }
}

Response Router::handle(const Request& req) const {
  try {
    const auto qpos = req.target.find('?');
    const std::string path = percent_decode(std::string_view(req.target).substr(0, qpos));
    const auto q = qpos == std::string::npos ? std::map<std::string, std::string>{}
                                             : parse_query(std::string_view(req.target).substr(qpos + 1));
    if (path == "/healthz") {
      try {
        stack_.topology();
        return {200, R"({"status":"ok"})"};
      } catch (const Error& e) {
        return error_response(503, e.what());
      }
    }
    if (path == "/topology" || path == "/assets" || path == "/config" || path == "/qos" ||
        path.starts_with("/assets/")) {
      const bool post = path == "/qos";
      if (req.method != (post ? "POST" : "GET")) return error_response(405, "method not allowed");
      if (path == "/topology") return topology(req);
      if (path == "/assets") return assets(req);
      if (path == "/config") return config(req);
      if (path == "/qos") return qos(req);
      return asset_route(req, std::string_view(path).substr(8), q);
    }
    return error_response(404, "no route for " + path);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), e.what());
  }
}

Response Router::topology(const Request& req) const {
  require_view(req.app_id, twin::View::Topology);
  std::shared_ptr<const stack::TopologySnapshot> t;
  try {
    t = stack_.topology();
  } catch (const Error& e) {
    return error_response(503, e.what());
  }
  return json_ok(*topology_for(req.app_id, *t));
}

Response Router::assets(const Request& req) const {
  if (!stack_.running()) return error_response(503, "stack not running");
  return json_ok(twin::to_json(stack_.queries().topology(req.app_id)));
}

Response Router::config(const Request& req) const {
  require_view(req.app_id, twin::View::Topology);
  return json_ok(stack_.effective_config());
}

Response Router::qos(const Request& req) const {
  require_view(req.app_id, twin::View::Topology);
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, std::string("request body: ") + e.what());
  }
  return json_ok(stack_.apply_qos(body));
}

Response Router::asset_route(const Request& req, std::string_view rest,
                             const std::map<std::string, std::string>& q) const {
  if (!stack_.running()) return error_response(503, "stack not running");
  const auto slash = rest.find('/');
  if (slash == std::string_view::npos) return error_response(404, "no route");
  const std::string id(rest.substr(0, slash));
  const auto what = rest.substr(slash + 1);
  if (req.app_id.empty()) return error_response(403, "missing X-App-Id");
  const auto& qs = stack_.queries();
  if (what == "latest") {
    return json_ok(twin::to_json(qs.latest(req.app_id, AssetId::parse(id))));
  }
  if (what == "series") {
    auto var = q.find("var");
    if (var == q.end() || var->second.empty()) return error_response(400, "missing query parameter 'var'");
    const std::uint64_t to = q.contains("to") ? parse_u64("to", q.at("to")) : unix_now_ns();
    const std::uint64_t from = q.contains("from") ? parse_u64("from", q.at("from")) : to - std::min(to, kDefaultSpanNs);
    const auto res = twin::resolution_from_string(q.contains("res") ? q.at("res") : "R1s");
    const auto pattern = twin::AssetPattern::parse(id);
    if (pattern.is_prefix()) return json_ok(twin::to_json(qs.series(req.app_id, pattern, var->second, from, to, res)));
    return json_ok(twin::to_json(qs.series(req.app_id, AssetId::parse(id), var->second, from, to, res)));
  }
  return error_response(404, "no route");
}

}  // namespace smv::api
