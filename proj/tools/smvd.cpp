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

// Whole pipeline plus the operator API in one process.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shutdown.hpp"
#include "smv/api/server.hpp"

int main(int argc, char** argv) {
  const auto signals = smv::tools::block_shutdown_signals();
  CLI::App app{"smv daemon: simulators, gateway, broker, twin, engine and operator API"};
  std::string config;
  std::string http;
  app.add_option("--config", config, "stack JSON config")->required()->check(CLI::ExistingFile);
  app.add_option("--http", http, "override the operator API host:port");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config);
    auto cfg = smv::stack::stack_config_from_json(nlohmann::json::parse(in));
    if (!http.empty()) cfg.http = smv::net::Endpoint::parse(http);
    smv::stack::Stack stack(cfg);
    stack.start();
    smv::api::OperatorApi api(stack, cfg.http, cfg.http_threads);
    std::cout << "READY http=" << api.port();
    if (stack.config().broker_listen) std::cout << " broker=" << stack.broker_port();
    for (auto p : stack.ot_ports()) std::cout << " ot=" << p;
    std::cout << std::endl;
    smv::tools::wait_for_shutdown(signals);
    api.stop();
    stack.stop();
  } catch (const std::exception& e) {
    std::cerr << "smvd: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
