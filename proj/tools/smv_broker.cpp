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

// Stand-alone broker server.
#include <iostream>

#include <CLI11.hpp>

#include "shutdown.hpp"
#include "smv/broker/server.hpp"

int main(int argc, char** argv) {
  const auto signals = smv::tools::block_shutdown_signals();
  CLI::App app{"smv message broker"};
  std::string listen = "127.0.0.1:9092";
  std::string data_dir;
  bool sync = false;
  app.add_option("--listen", listen, "host:port to serve on; port 0 picks a free one")->capture_default_str();
  app.add_option("--data-dir", data_dir, "segment file root; omit to keep logs in memory");
  app.add_flag("--sync", sync, "fdatasync every append");
  CLI11_PARSE(app, argc, argv);

  try {
    smv::broker::Broker broker({data_dir, sync});
    smv::broker::BrokerServer server(broker, smv::net::Endpoint::parse(listen));
    std::cout << "READY broker=" << server.port() << std::endl;
    smv::tools::wait_for_shutdown(signals);
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "smv-broker: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
