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

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <iterator>
#include <string>
#include <vector>

#include "smv/common/percentiles.hpp"
#include "smv/engine/fps_bench.hpp"

namespace smv::bench {

enum class Stage { OtM2M, E2eIt };
/// "OT_M2M", "E2E_IT".
std::string_view to_string(Stage s) noexcept;
Stage stage_from_string(std::string_view s);

/// In-process tasks, or broker and gateway as separate local processes.
enum class Mode { InProc, Process };
std::string_view to_string(Mode m) noexcept;
Mode mode_from_string(std::string_view s);

/// Fraction of samples (in arrival order) discarded at the start of each run.
inline constexpr double kWarmupFraction = 0.1;

struct LatencyRow {
  Stage stage = Stage::OtM2M;
  std::uint32_t rate = 0;
  Percentiles latency;  // ns; count = samples kept after warm-up
};

struct Scenario1Options {
  std::vector<std::uint32_t> rates{400, 800, 1200};
  std::chrono::seconds duration{60};
  Mode mode = Mode::InProc;
  /// Where smv-broker and smv-gateway live (Process mode); empty means next
  /// to the running executable.
  std::filesystem::path tools_dir;
  /// Progress lines; may be null.
  std::ostream* log = nullptr;
};

/// Machine-to-machine and machine-to-consumer latency per message rate.
///
/// One simulator publishes each message to two endpoints: an OT subscriber
/// (OT_M2M = subscriber receive time - message timestamp) and the gateway,
/// which bridges it into the broker over TCP, where a consumer receives it
/// (E2E_IT = consumer receive time - OT message timestamp). Every component
/// reads the same host clock. Throws SetupFailure, InvalidArgument.
std::vector<LatencyRow> scenario1(const Scenario1Options& opts);

struct Scenario2Options {
  std::vector<engine::FramePreset> resolutions{std::begin(engine::kAllPresets), std::end(engine::kAllPresets)};
  std::vector<engine::TransportKind> transports{engine::TransportKind::Datagram, engine::TransportKind::LocalZeroCopy};
  std::chrono::seconds duration{10};
  std::ostream* log = nullptr;
};

/// fps_bench for every resolution x transport. Runs below 5 s are refused
/// (InvalidArgument). Throws SetupFailure.
std::vector<engine::FpsResult> scenario2(const Scenario2Options& opts);

/// One scenario-2 CSV row.
struct FpsRow {
  engine::FramePreset resolution = engine::FramePreset::HD;
  engine::TransportKind transport = engine::TransportKind::LocalZeroCopy;
  double fps = 0;
  std::uint64_t p50_ns = 0, p95_ns = 0, p99_ns = 0;
};
FpsRow to_row(const engine::FpsResult& r);

inline constexpr const char* kScenario1Header = "stage,rate,samples,p50_ns,p95_ns,p99_ns,mean_ns";
inline constexpr const char* kScenario2Header = "resolution,transport,fps,p50_ns,p95_ns,p99_ns";
inline constexpr const char* kScenario1File = "scenario1.csv";
inline constexpr const char* kScenario2File = "scenario2.csv";

void write_scenario1_csv(std::ostream& out, const std::vector<LatencyRow>& rows);
void write_scenario2_csv(std::ostream& out, const std::vector<FpsRow>& rows);
/// Throw ParseError on a wrong header, malformed rows, or no rows at all.
std::vector<LatencyRow> read_scenario1_csv(std::istream& in);
std::vector<FpsRow> read_scenario2_csv(std::istream& in);

// ---- charts -----------------------------------------------------------------

struct ChartSeries {
  std::string name;
  std::vector<double> y;  // one value per x position; NaN leaves a gap
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  /// Either numeric x positions or category labels (evenly spaced).
  std::vector<double> x;
  std::vector<std::string> categories;
  std::vector<ChartSeries> series;
  bool log_y = false;
};

struct Axis {
  double min = 0;
  double max = 1;
  std::vector<double> ticks;
};

/// Axes enclosing every data point, on rounded tick values.
Axis x_axis(const Chart& c);
Axis y_axis(const Chart& c);
std::string render_svg(const Chart& c);

/// Scenario-1 charts: OT_M2M and E2E_IT percentiles against rate.
std::vector<Chart> scenario1_charts(const std::vector<LatencyRow>& rows);
/// Scenario-2 charts: fps and p50 latency against resolution, per transport.
std::vector<Chart> scenario2_charts(const std::vector<FpsRow>& rows);

struct Report {
  std::string summary;
  std::vector<std::filesystem::path> charts;
};

/// Reads scenario1.csv and/or scenario2.csv from `in_dir`, writes the SVG
/// charts next to them and returns a text summary including the ordering
/// checks. Throws ParseError (bad CSV) and NotFound (neither file present).
Report report(const std::filesystem::path& in_dir);

}  // namespace smv::bench
