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

// Evaluation harness: scenario1 (message latency), scenario2 (frame
// streaming) and report (summary + SVG charts from the CSVs).
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "smv/bench/bench.hpp"

namespace {

namespace fs = std::filesystem;
using namespace smv;

void print_report(const fs::path& dir) {
  const auto r = bench::report(dir);
  std::cout << r.summary;
  for (const auto& c : r.charts) std::cout << "chart: " << c.string() << "\n";
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"smv benchmark harness"};
  app.require_subcommand(1);

  auto* s1 = app.add_subcommand("scenario1", "OT_M2M and E2E_IT latency per message rate");
  std::vector<std::uint32_t> rates{400, 800, 1200};
  std::uint32_t s1_duration = 60;
  std::string s1_out = "bench-out";
  std::string mode = "inproc";
  std::string tools_dir;
  s1->add_option("--rates", rates, "messages per second, comma separated")->delimiter(',')->capture_default_str();
  s1->add_option("--duration", s1_duration, "seconds per rate")->check(CLI::Range(1u, 3600u))->capture_default_str();
  s1->add_option("--out", s1_out, "output directory")->capture_default_str();
  s1->add_option("--mode", mode, "inproc: broker and gateway as tasks here; process: as smv-broker/smv-gateway")
      ->check(CLI::IsMember({"inproc", "process"}))
      ->capture_default_str();
  s1->add_option("--tools-dir", tools_dir, "directory holding smv-broker and smv-gateway (process mode)");

  auto* s2 = app.add_subcommand("scenario2", "frame rate and latency per resolution and transport");
  std::vector<std::string> resolutions{"hd", "fhd", "qhd", "4k", "8k"};
  std::vector<std::string> transports{"datagram", "zerocopy"};
  std::uint32_t s2_duration = 10;
  std::string s2_out = "bench-out";
  s2->add_option("--resolutions", resolutions, "hd,fhd,qhd,4k,8k")->delimiter(',')->capture_default_str();
  s2->add_option("--transports", transports, "datagram,zerocopy")->delimiter(',')->capture_default_str();
  s2->add_option("--duration", s2_duration, "seconds per combination (>= 5)")->capture_default_str();
  s2->add_option("--out", s2_out, "output directory")->capture_default_str();

  auto* rep = app.add_subcommand("report", "summary tables and SVG charts from scenario CSVs");
  std::string in = "bench-out";
  rep->add_option("--in", in, "directory holding scenario1.csv and/or scenario2.csv")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s1) {
      bench::Scenario1Options o;
      o.rates = rates;
      o.duration = std::chrono::seconds(s1_duration);
      o.mode = bench::mode_from_string(mode);
      o.tools_dir = tools_dir;
      o.log = &std::cerr;
      const auto rows = bench::scenario1(o);
      const auto dir = prepare_out(s1_out);
      std::ofstream f(dir / bench::kScenario1File);
      bench::write_scenario1_csv(f, rows);
      f.close();
      print_report(dir);
    } else if (*s2) {
      bench::Scenario2Options o;
      o.resolutions.clear();
      for (const auto& r : resolutions) o.resolutions.push_back(engine::preset_from_string(r));
      o.transports.clear();
      for (const auto& t : transports) o.transports.push_back(engine::transport_from_string(t));
      o.duration = std::chrono::seconds(s2_duration);
      o.log = &std::cerr;
      std::vector<bench::FpsRow> rows;
      for (const auto& r : bench::scenario2(o)) rows.push_back(bench::to_row(r));
      const auto dir = prepare_out(s2_out);
      std::ofstream f(dir / bench::kScenario2File);
      bench::write_scenario2_csv(f, rows);
      f.close();
      print_report(dir);
    } else if (*rep) {
      print_report(in);
    }
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
