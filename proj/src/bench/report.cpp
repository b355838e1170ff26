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

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "smv/bench/bench.hpp"

namespace smv::bench {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

template <typename T>
T number(const std::string& cell, std::size_t line) {
  std::istringstream in(cell);
  T v{};
  if (!(in >> v) || !in.eof()) fail(Errc::ParseError, "line " + std::to_string(line) + ": bad number '" + cell + "'");
  return v;
}

/// Rows of a CSV with the expected header, blank lines skipped.
std::vector<std::vector<std::string>> read_table(std::istream& in, const char* header, std::size_t columns) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, "empty CSV");
  if (strip(line) != header) fail(Errc::ParseError, "unexpected header '" + strip(line) + "', want '" + header + "'");
  std::vector<std::vector<std::string>> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    line = strip(line);
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != columns)
      fail(Errc::ParseError, "line " + std::to_string(n) + ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) fail(Errc::ParseError, "CSV has no data rows");
  return rows;
}

double nice_step(double span, int target) {
  if (!(span > 0)) return 1;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10 * mag;
}

Axis linear_axis(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0 ? 1 : std::fabs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  }
  const double step = nice_step(hi - lo, 5);
  Axis a{std::floor(lo / step) * step, std::ceil(hi / step) * step, {}};
  for (double t = a.min; t <= a.max + step * 1e-9; t += step) a.ticks.push_back(std::fabs(t) < step * 1e-9 ? 0 : t);
  return a;
}

Axis log_axis(double lo, double hi) {
  const double a = std::floor(std::log10(lo)), b = std::max(a + 1, std::ceil(std::log10(hi)));
  Axis ax{std::pow(10.0, a), std::pow(10.0, b), {}};
  for (double e = a; e <= b; ++e) ax.ticks.push_back(std::pow(10.0, e));
  return ax;
}

std::pair<double, double> y_range(const Chart& c) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : c.series)
    for (double v : s.y)
      if (std::isfinite(v) && (!c.log_y || v > 0)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!std::isfinite(lo)) return {c.log_y ? 1 : 0, c.log_y ? 10 : 1};
  return {lo, hi};
}

std::string fmt(double v) {
  std::ostringstream o;
  if (v != 0 && (std::fabs(v) >= 1e6 || std::fabs(v) < 1e-2)) o << std::setprecision(2) << v;
  else o << std::setprecision(6) << v;
  return o.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '<') out += "&lt;";
    else if (ch == '>') out += "&gt;";
    else if (ch == '&') out += "&amp;";
    else out += ch;
  }
  return out;
}

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

FpsRow to_row(const engine::FpsResult& r) {
  return {r.preset, r.transport, r.fps, r.latency.p50, r.latency.p95, r.latency.p99};
}

void write_scenario1_csv(std::ostream& out, const std::vector<LatencyRow>& rows) {
  out << kScenario1Header << "\n";
  for (const auto& r : rows)
    out << to_string(r.stage) << "," << r.rate << "," << r.latency.count << "," << r.latency.p50 << ","
        << r.latency.p95 << "," << r.latency.p99 << "," << std::fixed << std::setprecision(1) << r.latency.mean
        << std::defaultfloat << "\n";
}

void write_scenario2_csv(std::ostream& out, const std::vector<FpsRow>& rows) {
  out << kScenario2Header << "\n";
  for (const auto& r : rows)
    out << engine::to_string(r.resolution) << "," << engine::to_string(r.transport) << "," << std::fixed
        << std::setprecision(2) << r.fps << std::defaultfloat << "," << r.p50_ns << "," << r.p95_ns << "," << r.p99_ns
        << "\n";
}

std::vector<LatencyRow> read_scenario1_csv(std::istream& in) {
  std::vector<LatencyRow> out;
  std::size_t line = 1;
  for (const auto& c : read_table(in, kScenario1Header, 7)) {
    ++line;
    LatencyRow r;
    try {
      r.stage = stage_from_string(c[0]);
    } catch (const Error& e) {
      fail(Errc::ParseError, e.what());
    }
    r.rate = number<std::uint32_t>(c[1], line);
    r.latency.count = number<std::uint64_t>(c[2], line);
    r.latency.p50 = number<std::uint64_t>(c[3], line);
    r.latency.p95 = number<std::uint64_t>(c[4], line);
    r.latency.p99 = number<std::uint64_t>(c[5], line);
    r.latency.mean = number<double>(c[6], line);
    out.push_back(r);
  }
  return out;
}

std::vector<FpsRow> read_scenario2_csv(std::istream& in) {
  std::vector<FpsRow> out;
  std::size_t line = 1;
  for (const auto& c : read_table(in, kScenario2Header, 6)) {
    ++line;
    FpsRow r;
    try {
      r.resolution = engine::preset_from_string(c[0]);
      r.transport = engine::transport_from_string(c[1]);
    } catch (const Error& e) {
      fail(Errc::ParseError, e.what());
    }
    r.fps = number<double>(c[2], line);
    r.p50_ns = number<std::uint64_t>(c[3], line);
    r.p95_ns = number<std::uint64_t>(c[4], line);
    r.p99_ns = number<std::uint64_t>(c[5], line);
    out.push_back(r);
  }
  return out;
}

Axis x_axis(const Chart& c) {
  if (!c.categories.empty()) {
    Axis a{-0.5, static_cast<double>(c.categories.size()) - 0.5, {}};
    for (std::size_t i = 0; i < c.categories.size(); ++i) a.ticks.push_back(static_cast<double>(i));
    return a;
  }
  if (c.x.empty()) return linear_axis(0, 1);
  auto [lo, hi] = std::minmax_element(c.x.begin(), c.x.end());
  return linear_axis(*lo, *hi);
}

Axis y_axis(const Chart& c) {
  auto [lo, hi] = y_range(c);
  return c.log_y ? log_axis(lo, hi) : linear_axis(std::min(0.0, lo), hi);
}

std::string render_svg(const Chart& c) {
  constexpr double W = 720, H = 440, L = 90, R = 160, T = 40, B = 60;
  const auto xa = x_axis(c), ya = y_axis(c);
  auto px = [&](double x) { return L + (x - xa.min) / (xa.max - xa.min) * (W - L - R); };
  auto py = [&](double y) {
    const double f = c.log_y ? (std::log10(y) - std::log10(ya.min)) / (std::log10(ya.max) - std::log10(ya.min))
                             : (y - ya.min) / (ya.max - ya.min);
    return H - B - f * (H - T - B);
  };
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\""
    << " font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(c.title) << "</text>\n";
  for (double t : ya.ticks) {
    s << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(t) << "\" y2=\"" << py(t)
      << "\" stroke=\"#ddd\"/>\n<text x=\"" << L - 6 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">" << fmt(t)
      << "</text>\n";
  }
  for (std::size_t i = 0; i < xa.ticks.size(); ++i) {
    const double t = xa.ticks[i];
    const std::string label = c.categories.empty() ? fmt(t) : c.categories[i];
    s << "<text x=\"" << px(t) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << escape(label)
      << "</text>\n";
  }
  s << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << H - B << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n<line x1=\"" << L << "\" x2=\"" << L << "\" y1=\"" << T << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << escape(c.x_label)
    << "</text>\n<text transform=\"translate(20," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(c.y_label) << "</text>\n";
  for (std::size_t k = 0; k < c.series.size(); ++k) {
    const auto& ser = c.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string path;
    for (std::size_t i = 0; i < ser.y.size(); ++i) {
      const double x = c.categories.empty() ? c.x.at(i) : static_cast<double>(i);
      const double y = ser.y[i];
      if (!std::isfinite(y) || (c.log_y && y <= 0)) continue;
      path += (path.empty() ? "M" : " L") + fmt(px(x)) + "," + fmt(py(y));
      s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (!path.empty()) s << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    const double ly = T + 10 + 18 * static_cast<double>(k);
    s << "<rect x=\"" << W - R + 14 << "\" y=\"" << ly - 8 << "\" width=\"12\" height=\"4\" fill=\"" << color
      << "\"/>\n<text x=\"" << W - R + 32 << "\" y=\"" << ly << "\">" << escape(ser.name) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<Chart> scenario1_charts(const std::vector<LatencyRow>& rows) {
  std::vector<Chart> out;
  for (auto stage : {Stage::OtM2M, Stage::E2eIt}) {
    std::map<std::uint32_t, Percentiles> by_rate;
    for (const auto& r : rows)
      if (r.stage == stage) by_rate[r.rate] = r.latency;
    Chart c;
    c.title = std::string(to_string(stage)) + " latency vs message rate";
    c.x_label = "message rate (msg/s)";
    c.y_label = "latency (us)";
    ChartSeries p50{"p50", {}}, p95{"p95", {}}, p99{"p99", {}};
    for (const auto& [rate, p] : by_rate) {
      c.x.push_back(rate);
      p50.y.push_back(static_cast<double>(p.p50) / 1e3);
      p95.y.push_back(static_cast<double>(p.p95) / 1e3);
      p99.y.push_back(static_cast<double>(p.p99) / 1e3);
    }
    c.series = {p50, p95, p99};
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Chart> scenario2_charts(const std::vector<FpsRow>& rows) {
  std::vector<engine::FramePreset> presets;
  std::vector<engine::TransportKind> transports;
  for (auto p : engine::kAllPresets)
    if (std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.resolution == p; })) presets.push_back(p);
  for (auto t : {engine::TransportKind::Datagram, engine::TransportKind::LocalZeroCopy})
    if (std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.transport == t; })) transports.push_back(t);

  Chart fps{"Streaming FPS vs resolution", "resolution", "frames per second (log)", {}, {}, {}, true};
  Chart lat{"Frame latency p50 vs resolution", "resolution", "p50 latency (ms, log)", {}, {}, {}, true};
  for (auto p : presets) {
    fps.categories.emplace_back(engine::to_string(p));
    lat.categories.emplace_back(engine::to_string(p));
  }
  for (auto t : transports) {
    ChartSeries f{std::string(engine::to_string(t)), {}}, l{std::string(engine::to_string(t)), {}};
    for (auto p : presets) {
      auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.resolution == p && r.transport == t; });
      f.y.push_back(it == rows.end() ? NAN : it->fps);
      l.y.push_back(it == rows.end() ? NAN : static_cast<double>(it->p50_ns) / 1e6);
    }
    fps.series.push_back(std::move(f));
    lat.series.push_back(std::move(l));
  }
  return {fps, lat};
}

namespace {

std::string yes(bool b) { return b ? "yes" : "NO"; }

void summarize1(std::ostream& o, const std::vector<LatencyRow>& rows) {
  std::map<std::uint32_t, std::map<Stage, Percentiles>> t;
  for (const auto& r : rows) t[r.rate][r.stage] = r.latency;
  o << "Scenario 1: latency by message rate (microseconds)\n";
  o << "  rate    OT_M2M p50 / p95 / p99        E2E_IT p50 / p95 / p99\n";
  for (const auto& [rate, st] : t) {
    o << "  " << std::setw(6) << rate;
    for (auto s : {Stage::OtM2M, Stage::E2eIt}) {
      auto it = st.find(s);
      o << "    ";
      if (it == st.end()) {
        o << std::setw(26) << "-";
        continue;
      }
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(1) << it->second.p50 / 1e3 << " / " << it->second.p95 / 1e3 << " / "
           << it->second.p99 / 1e3;
      o << std::setw(26) << cell.str();
    }
    o << "\n";
  }
  bool sub_ms = true, above = true, monotone = true, complete = true;
  double lo = INFINITY, hi = 0, prev = -1;
  for (const auto& [rate, st] : t) {
    if (!st.contains(Stage::OtM2M) || !st.contains(Stage::E2eIt)) {
      complete = false;
      continue;
    }
    const double ot = st.at(Stage::OtM2M).p50, e2e = st.at(Stage::E2eIt).p50;
    sub_ms = sub_ms && ot < 1e6;
    above = above && e2e > ot;
    monotone = monotone && e2e >= prev;
    prev = e2e;
    lo = std::min(lo, ot);
    hi = std::max(hi, ot);
  }
  o << "  OT_M2M p50 below 1 ms at every rate:        " << yes(sub_ms) << "\n";
  o << "  OT_M2M p50 within 2x across rates:          " << yes(hi <= 2 * lo) << "\n";
  if (t.contains(400) && t.at(400).contains(Stage::E2eIt))
    o << "  E2E_IT p50 below 10 ms at 400 msg/s:        " << yes(t.at(400).at(Stage::E2eIt).p50 < 10e6) << "\n";
  o << "  E2E_IT p50 above OT_M2M p50 at every rate:  " << yes(above && complete) << "\n";
  o << "  E2E_IT p50 non-decreasing with rate:        " << yes(monotone && complete) << "\n";
}

void summarize2(std::ostream& o, const std::vector<FpsRow>& rows) {
  o << "Scenario 2: streaming by resolution and transport\n";
  o << "  resolution  transport        fps    p50 ms    p95 ms    p99 ms\n";
  for (const auto& r : rows)
    o << "  " << std::left << std::setw(10) << engine::to_string(r.resolution) << "  " << std::setw(9)
      << engine::to_string(r.transport) << std::right << std::fixed << std::setprecision(1) << std::setw(11) << r.fps
      << std::setprecision(3) << std::setw(10) << r.p50_ns / 1e6 << std::setw(10) << r.p95_ns / 1e6 << std::setw(10)
      << r.p99_ns / 1e6 << "\n";
  o << std::defaultfloat;
  auto find = [&](engine::FramePreset p, engine::TransportKind t) -> const FpsRow* {
    for (const auto& r : rows)
      if (r.resolution == p && r.transport == t) return &r;
    return nullptr;
  };
  bool monotone = true, ranking = true;
  for (auto t : {engine::TransportKind::Datagram, engine::TransportKind::LocalZeroCopy}) {
    double prev = INFINITY;
    for (auto p : engine::kAllPresets)
      if (auto r = find(p, t)) {
        monotone = monotone && r->fps <= prev;
        prev = r->fps;
      }
  }
  for (auto p : engine::kAllPresets) {
    auto z = find(p, engine::TransportKind::LocalZeroCopy), d = find(p, engine::TransportKind::Datagram);
    if (z && d) ranking = ranking && z->fps >= d->fps && z->p50_ns <= d->p50_ns;
  }
  if (auto z = find(engine::FramePreset::HD, engine::TransportKind::LocalZeroCopy))
    o << "  zerocopy HD fps >= 1000:                    " << yes(z->fps >= 1000) << "\n";
  if (auto z = find(engine::FramePreset::UHD4K, engine::TransportKind::LocalZeroCopy)) {
    o << "  zerocopy 4K fps >= 100:                     " << yes(z->fps >= 100) << "\n";
    o << "  zerocopy 4K p50 <= 10 ms:                   " << yes(z->p50_ns <= 10'000'000) << "\n";
  }
  o << "  fps non-increasing HD->8K per transport:    " << yes(monotone) << "\n";
  o << "  zerocopy >= datagram fps, <= p50 per row:   " << yes(ranking) << "\n";
}

void write_chart(const Chart& c, const std::filesystem::path& path, Report& r) {
  std::ofstream f(path);
  if (!f) fail(Errc::InvalidArgument, "cannot write " + path.string());
  f << render_svg(c);
  r.charts.push_back(path);
}

}  // namespace

Report report(const std::filesystem::path& in_dir) {
  Report r;
  std::ostringstream o;
  const auto p1 = in_dir / kScenario1File, p2 = in_dir / kScenario2File;
  if (!std::filesystem::exists(p1) && !std::filesystem::exists(p2))
    fail(Errc::NotFound, "neither " + p1.string() + " nor " + p2.string() + " exists");
  if (std::filesystem::exists(p1)) {
    std::ifstream f(p1);
    const auto rows = read_scenario1_csv(f);
    summarize1(o, rows);
    const auto charts = scenario1_charts(rows);
    write_chart(charts[0], in_dir / "scenario1_ot_m2m.svg", r);
    write_chart(charts[1], in_dir / "scenario1_e2e_it.svg", r);
  }
  if (std::filesystem::exists(p2)) {
    std::ifstream f(p2);
    const auto rows = read_scenario2_csv(f);
    if (std::filesystem::exists(p1)) o << "\n";
    summarize2(o, rows);
    const auto charts = scenario2_charts(rows);
    write_chart(charts[0], in_dir / "scenario2_fps.svg", r);
    write_chart(charts[1], in_dir / "scenario2_latency.svg", r);
  }
  r.summary = o.str();
  return r;
}

}  // namespace smv::bench
