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

// Stand-alone OT-to-broker gateway.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shutdown.hpp"
#include "smv/broker/client.hpp"
#include "smv/gateway/gateway.hpp"

int main(int argc, char** argv) {
  const auto signals = smv::tools::block_shutdown_signals();
  CLI::App app{"smv OT gateway"};
  std::string config;
  app.add_option("--config", config, "gateway JSON config")->required()->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config);
    auto cfg = smv::gateway::gateway_config_from_json(nlohmann::json::parse(in));
    if (cfg.broker_address.empty()) throw std::runtime_error("config lacks \"broker\"");
    smv::broker::BrokerClient link(smv::net::Endpoint::parse(cfg.broker_address));
    smv::gateway::Gateway gw(cfg, link);
    gw.start();
    std::cout << "READY";
    const auto ports = gw.ports();
    for (std::size_t i = 0; i < ports.size(); ++i) std::cout << (i ? " ot" + std::to_string(i) : " ot") << "=" << ports[i];
    std::cout << std::endl;
    smv::tools::wait_for_shutdown(signals);
    gw.stop();
  } catch (const std::exception& e) {
    std::cerr << "smv-gateway: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
