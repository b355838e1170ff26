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

#include "smv/api/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast.hpp>

namespace smv::api {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using asio::use_awaitable;
using Strand = asio::strand<asio::io_context::executor_type>;
using Socket = asio::basic_stream_socket<tcp, Strand>;
using namespace std::chrono_literals;

namespace {

constexpr std::size_t kBodyLimit = 1 << 20;
constexpr auto kEventsPoll = 20ms;
constexpr auto kVideoPoll = 5ms;

std::string_view sv(beast::string_view s) { return {s.data(), s.size()}; }

std::string app_of(const http::request<http::string_body>& req) {
  if (auto it = req.find("X-App-Id"); it != req.end()) return std::string(it->value());
  const auto target = sv(req.target());
  if (auto q = target.find('?'); q != std::string_view::npos) {
    try {
      auto params = parse_query(target.substr(q + 1));
      if (auto it = params.find("app"); it != params.end()) return it->second;
    } catch (const Error&) {
    }
  }
  return {};
}

bool offers(std::string_view header, std::string_view proto) {
  while (!header.empty()) {
    const auto comma = header.find(',');
    auto item = header.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item == proto) return true;
    header = comma == std::string_view::npos ? std::string_view{} : header.substr(comma + 1);
  }
  return false;
}

}  // namespace

struct OperatorApi::Impl {
  Impl(stack::Stack& s, const net::Endpoint& ep) : stack(s), router(s), acceptor(io) {
    try {
      tcp::endpoint at(asio::ip::make_address(ep.host), ep.port);
      acceptor.open(at.protocol());
      acceptor.set_option(asio::socket_base::reuse_address(true));
      acceptor.bind(at);
      acceptor.listen();
    } catch (const boost::system::system_error& e) {
      fail(Errc::BindError, "operator api " + ep.str() + ": " + e.what());
    }
  }

  asio::awaitable<void> accept_loop() {
    for (;;) {
      auto sock = co_await acceptor.async_accept(asio::make_strand(io), use_awaitable);
      auto ex = sock.get_executor();
      asio::co_spawn(ex, http_session(std::move(sock)), asio::detached);
    }
  }

  asio::awaitable<void> http_session(Socket sock) {
    beast::flat_buffer buf;
    try {
      for (;;) {
        http::request_parser<http::string_body> parser;
        parser.body_limit(kBodyLimit);
        co_await http::async_read(sock, buf, parser, use_awaitable);
        auto req = parser.release();
        if (websocket::is_upgrade(req)) {
          co_await ws_session(std::move(sock), std::move(req));
          co_return;
        }
        http::response<http::string_body> res;
        res.version(req.version());
        res.set(http::field::access_control_allow_origin, "*");
        if (req.method() == http::verb::options) {
          res.result(http::status::no_content);
          res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
          res.set(http::field::access_control_allow_headers, "Content-Type, X-App-Id");
        } else {
          const auto out = router.handle(
              {std::string(req.method_string()), std::string(req.target()), app_of(req), std::move(req.body())});
          res.result(static_cast<http::status>(out.status));
          res.set(http::field::content_type, out.content_type);
          res.body() = out.body;
        }
        res.keep_alive(req.keep_alive());
        res.prepare_payload();
        co_await http::async_write(sock, res, use_awaitable);
        if (!req.keep_alive()) break;
      }
      sock.shutdown(tcp::socket::shutdown_send);
    } catch (const boost::system::system_error&) {
      // Client went away or sent garbage.
    }
  }

  asio::awaitable<void> ws_session(Socket sock, http::request<http::string_body> req) {
    const auto target = sv(req.target());
    const std::string path(target.substr(0, target.find('?')));
    const char* proto = path == "/events" ? kEventsProtocol : path == "/video" ? kVideoProtocol : nullptr;
    const std::string offered(req[http::field::sec_websocket_protocol]);
    if (!proto || (!offered.empty() && !offers(offered, proto))) {
      http::response<http::string_body> res{proto ? http::status::bad_request : http::status::not_found,
                                            req.version()};
      res.body() = proto ? std::string("unsupported subprotocol; expected ") + proto : "no such stream";
      res.prepare_payload();
      co_await http::async_write(sock, res, use_awaitable);
      co_return;
    }
    const auto app = app_of(req);
    auto ws = std::make_shared<websocket::stream<Socket>>(std::move(sock));
    ws->set_option(websocket::stream_base::decorator([proto, offered](websocket::response_type& res) {
      if (!offered.empty()) res.set(http::field::sec_websocket_protocol, proto);
    }));
    co_await ws->async_accept(req, use_awaitable);

    const auto denied = path == "/events" ? router.events_denied(app) : router.video_denied(app);
    if (!denied.empty()) {
      co_await ws->async_close(websocket::close_reason(websocket::close_code::policy_error, denied.substr(0, 120)),
                               use_awaitable);
      co_return;
    }

    // Reads only to notice the client closing; both coroutines share the strand.
    auto closed = std::make_shared<bool>(false);
    asio::co_spawn(
        ws->get_executor(),
        [ws, closed]() -> asio::awaitable<void> {
          beast::flat_buffer b;
          try {
            for (;;) {
              co_await ws->async_read(b, use_awaitable);
              b.consume(b.size());
            }
          } catch (const boost::system::system_error&) {
          }
          *closed = true;
        },
        asio::detached);

    asio::steady_timer timer(ws->get_executor());
    if (path == "/events") {
      std::unique_ptr<engine::Subscription> sub;
      try {
        sub = stack.bus().subscribe(stack::kEventsChannel);
      } catch (const Error&) {
        co_await ws->async_close(websocket::close_code::going_away, use_awaitable);
        co_return;
      }
      try {
        while (!*closed) {
          std::vector<std::string> out;
          while (auto e = sub->next(0ms)) {
            if (auto msg = event_message(app, *e); !msg.empty()) out.push_back(std::move(msg));
          }
          for (const auto& msg : out) {
            ws->text(true);
            co_await ws->async_write(asio::buffer(msg), use_awaitable);
          }
          timer.expires_after(kEventsPoll);
          co_await timer.async_wait(use_awaitable);
        }
      } catch (const Error&) {
        // Channel closed: the stack is shutting down.
        if (!*closed) co_await ws->async_close(websocket::close_code::going_away, use_awaitable);
      }
    } else {
      std::uint64_t last = ~0ull;
      while (!*closed) {
        auto f = stack.latest_video();
        if (f && f->seq != last) {
          last = f->seq;
          const auto msg = encode_video_message(*f);
          ws->binary(true);
          co_await ws->async_write(asio::buffer(msg), use_awaitable);
        }
        timer.expires_after(kVideoPoll);
        co_await timer.async_wait(use_awaitable);
      }
    }
  }

  /// JSON text for one bus event as seen by `app`; empty when hidden.
  std::string event_message(const std::string& app, const engine::BusEvent& e) {
    if (e.type == "stats") {
      std::shared_ptr<const stack::TopologySnapshot> t;
      try {
        t = stack.topology();
      } catch (const Error&) {
        return {};
      }
      auto j = router.topology_for(app, *t);
      return j ? nlohmann::json{{"type", "stats"}, {"topology", *j}}.dump() : std::string();
    }
    if (e.type == "fusion") {
      auto j = nlohmann::json::parse(e.payload.begin(), e.payload.end(), nullptr, false);
      if (j.is_discarded() || !j.contains("assetId")) return {};
      try {
        if (!router.may_see(app, AssetId::parse(j["assetId"].get<std::string>()), twin::View::Latest)) return {};
      } catch (const Error&) {
        return {};
      }
      j["type"] = "fusion";
      return j.dump();
    }
    return {};
  }

  stack::Stack& stack;
  Router router;
  asio::io_context io;
  tcp::acceptor acceptor;
  std::vector<std::thread> threads;
};

OperatorApi::OperatorApi(stack::Stack& stack, const net::Endpoint& ep, std::size_t threads)
    : impl_(std::make_unique<Impl>(stack, ep)) {
  port_ = impl_->acceptor.local_endpoint().port();
  asio::co_spawn(impl_->io, impl_->accept_loop(), asio::detached);
  for (std::size_t i = 0; i < std::max<std::size_t>(1, threads); ++i)
    impl_->threads.emplace_back([this] { impl_->io.run(); });
}

OperatorApi::~OperatorApi() { stop(); }

void OperatorApi::stop() {
  if (!impl_) return;
  impl_->io.stop();
  for (auto& t : impl_->threads) t.join();
  impl_.reset();
}

}  // namespace smv::api
