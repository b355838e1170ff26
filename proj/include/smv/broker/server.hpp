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
#include <list>
#include <mutex>
#include <thread>

#include "smv/broker/broker.hpp"
#include "smv/common/net.hpp"

namespace smv::broker {

/// Serves a BrokerApi over TCP, one thread per connection.
class BrokerServer {
 public:
  /// Port 0 binds an ephemeral port; see port().
  BrokerServer(BrokerApi& broker, const net::Endpoint& ep);
  ~BrokerServer();
  BrokerServer(const BrokerServer&) = delete;
  BrokerServer& operator=(const BrokerServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  void stop();

 private:
  struct Conn {
    net::TcpStream stream;
    std::atomic<bool> done{false};
    std::jthread thread;
  };

  void accept_loop(std::stop_token st);
  void serve(Conn& c, std::stop_token st);
  void stream_subscription(net::TcpStream& s, RecordStream& rs, const std::string& topic, std::stop_token st);

  BrokerApi& broker_;
  net::TcpListener listener_;
  std::uint16_t port_ = 0;
  std::mutex conns_mu_;
  std::list<Conn> conns_;
  std::jthread acceptor_;
};

}  // namespace smv::broker
