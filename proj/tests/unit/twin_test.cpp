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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include "../support/expect.hpp"
#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "smv/broker/broker.hpp"
#include "smv/broker/topic.hpp"
#include "smv/twin/asset_store.hpp"
#include "smv/twin/feeder.hpp"
#include "smv/twin/query.hpp"

namespace smv::twin {
namespace {

using gateway::BridgeEnvelope;
using smv::testing::error_of;

constexpr std::uint64_t kSec = 1'000'000'000ULL;

AssetId id(const std::string& s) { return AssetId::parse(s); }

std::shared_ptr<MetadataRepository> plant() {
  auto m = std::make_shared<MetadataRepository>();
  std::uint16_t w = 1;
  for (auto a : {"acme.bo.a1.c1.m1", "acme.bo.a1.c1.m2", "acme.bo.a1.c1.m3", "acme.bo.a1.c2.m4"})
    m->add_static({id(a), default_topic(id(a)), 1, w++});
  AppBinding viewer{"viewer", {AssetPattern::parse("acme.bo.a1.c1.*")}, {View::Latest, View::Series, View::Topology},
                    Resolution::R10s};
  m->add_app(viewer);
  m->add_app({"latest-only", {AssetPattern::parse("acme.bo.a1.c1.m1")}, {View::Latest}, Resolution::Raw});
  m->add_app({"raw", {AssetPattern::parse("acme.*")}, {View::Series}, Resolution::Raw});
  return m;
}

BridgeEnvelope env(const std::string& asset, std::uint64_t ts, std::vector<otbus::Field> fields) {
  return {id(asset), 1, ts, ts, ts, std::move(fields)};
}

// Oracle: buckets rebuilt from the raw stream with MPFR-exact sums.
struct OracleBucket {
  std::uint64_t count = 0;
  double min = INFINITY, max = -INFINITY;
  std::vector<double> values;
};

std::map<std::uint64_t, OracleBucket> recompute(const std::vector<RawPoint>& raw, std::uint64_t width) {
  std::map<std::uint64_t, OracleBucket> out;
  for (const auto& p : raw) {
    auto& b = out[p.ts_ns / width * width];
    ++b.count;
    b.min = std::min(b.min, p.value);
    b.max = std::max(b.max, p.value);
    b.values.push_back(p.value);
  }
  return out;
}

TEST(Twin, BucketFromThreeValues) {
  TwinStore s(plant());
  for (double v : {1.0, 2.0, 3.0}) s.ingest(env("acme.bo.a1.c1.m1", 5 * kSec + static_cast<std::uint64_t>(v), {{"t", v}}));
  for (auto res : kRollupTiers) {
    auto r = s.query_series(id("acme.bo.a1.c1.m1"), "t", 0, 120 * kSec, res);
    ASSERT_EQ(r.buckets.size(), 1u);
    EXPECT_EQ(r.buckets[0].count, 3u);
    EXPECT_EQ(r.buckets[0].mean(), 2.0);
    EXPECT_EQ(r.buckets[0].min, 1.0);
    EXPECT_EQ(r.buckets[0].max, 3.0);
  }
  EXPECT_EQ(s.query_series(id("acme.bo.a1.c1.m1"), "t", 5 * kSec, 6 * kSec, Resolution::R1s).buckets[0].start_ns,
            5 * kSec);
}

TEST(Twin, OutOfOrderUpdatesRollupsButNotLatest) {
  TwinStore s(plant());
  s.ingest(env("acme.bo.a1.c1.m1", 10 * kSec, {{"t", 1.0}}));
  s.ingest(env("acme.bo.a1.c1.m1", 3 * kSec, {{"t", 9.0}}));
  auto latest = s.query_latest(id("acme.bo.a1.c1.m1"));
  EXPECT_EQ(latest.at("t"), (LatestValue{1.0, 10 * kSec}));
  auto r = s.query_series(id("acme.bo.a1.c1.m1"), "t", 0, 60 * kSec, Resolution::R1s);
  ASSERT_EQ(r.buckets.size(), 2u);
  EXPECT_EQ(r.buckets[0].start_ns, 3 * kSec);
  EXPECT_EQ(r.buckets[0].max, 9.0);
  // Equal timestamps count as newer.
  s.ingest(env("acme.bo.a1.c1.m1", 10 * kSec, {{"t", 2.0}}));
  EXPECT_EQ(s.query_latest(id("acme.bo.a1.c1.m1")).at("t").value, otbus::FieldValue(2.0));
  auto raw = s.query_series(id("acme.bo.a1.c1.m1"), "t", 0, 60 * kSec, Resolution::Raw).raw;
  EXPECT_EQ(raw, (std::vector<RawPoint>{{3 * kSec, 9.0}, {10 * kSec, 1.0}, {10 * kSec, 2.0}}));
}

TEST(Twin, LatestKeepsNonNumericFields) {
  TwinStore s(plant());
  s.ingest(env("acme.bo.a1.c1.m1", 1, {{"state", std::string("RUN")}, {"ok", true}, {"n", std::int64_t{4}}}));
  auto l = s.query_latest(id("acme.bo.a1.c1.m1"));
  EXPECT_EQ(l.at("state").value, otbus::FieldValue(std::string("RUN")));
  EXPECT_EQ(s.variables(id("acme.bo.a1.c1.m1")), (std::vector<std::string>{"n", "ok"}));
  EXPECT_EQ(error_of([&] { s.query_series(id("acme.bo.a1.c1.m1"), "state", 0, 10, Resolution::Raw); }),
            Errc::UnknownVariable);
}

TEST(Twin, Errors) {
  TwinStore s(plant());
  EXPECT_EQ(error_of([&] { s.ingest(env("acme.bo.a1.c9.m9", 1, {{"t", 1.0}})); }), Errc::UnboundAsset);
  EXPECT_EQ(error_of([&] { s.query_latest(id("acme.bo.a1.c9.m9")); }), Errc::UnknownAsset);
  EXPECT_TRUE(s.query_latest(id("acme.bo.a1.c1.m2")).empty());
  EXPECT_EQ(error_of([&] { s.query_series(id("acme.bo.a1.c9.m9"), "t", 0, 1, Resolution::R1s); }),
            Errc::UnknownAsset);
  EXPECT_EQ(error_of([&] { s.query_series(id("acme.bo.a1.c1.m2"), "t", 0, 1, Resolution::R1s); }),
            Errc::UnknownVariable);
  s.ingest(env("acme.bo.a1.c1.m1", 1, {{"t", 1.0}}));
  EXPECT_EQ(error_of([&] { s.query_series(id("acme.bo.a1.c1.m1"), "x", 0, 1, Resolution::R1s); }),
            Errc::UnknownVariable);
  EXPECT_EQ(error_of([&] { s.query_series(id("acme.bo.a1.c1.m1"), "t", 5, 1, Resolution::R1s); }),
            Errc::InvalidArgument);
  EXPECT_TRUE(s.query_series(id("acme.bo.a1.c1.m1"), "t", 1, 1, Resolution::Raw).raw.empty());
  EXPECT_TRUE(s.query_series(id("acme.bo.a1.c1.m1"), "t", 100 * kSec, 200 * kSec, Resolution::R1s).buckets.empty());
}

TEST(Twin, SixtySecondsAtOneHertz) {
  TwinStore s(plant());
  for (std::uint64_t i = 0; i < 60; ++i) s.ingest(env("acme.bo.a1.c1.m1", 600 * kSec + i * kSec, {{"t", double(i)}}));
  auto r10 = s.query_series(id("acme.bo.a1.c1.m1"), "t", 600 * kSec, 660 * kSec, Resolution::R10s);
  ASSERT_EQ(r10.buckets.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(r10.buckets[i].count, 10u);
    EXPECT_EQ(r10.buckets[i].start_ns, 600 * kSec + i * 10 * kSec);
    EXPECT_EQ(r10.buckets[i].mean(), 10.0 * i + 4.5);
  }
  // Buckets straddling either end of the range are left out.
  auto part = s.query_series(id("acme.bo.a1.c1.m1"), "t", 605 * kSec, 655 * kSec, Resolution::R10s);
  ASSERT_EQ(part.buckets.size(), 4u);
  EXPECT_EQ(part.buckets.front().start_ns, 610 * kSec);
  EXPECT_EQ(s.query_series(id("acme.bo.a1.c1.m1"), "t", 600 * kSec, 660 * kSec, Resolution::R60s).buckets.size(), 1u);
  EXPECT_EQ(s.query_series(id("acme.bo.a1.c1.m1"), "t", 600 * kSec, 659 * kSec, Resolution::R60s).buckets.size(), 0u);
}

// Every bucket at every tier equals a recomputation from the raw stream.
TEST(Twin, RollupsMatchRawRecomputation) {
  TwinStore s(plant());
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> ts(1000 * kSec, 1300 * kSec);
  std::uniform_real_distribution<double> mag(-12, 12), unit(-1, 1);
  std::map<std::string, std::vector<RawPoint>> raw;
  const char* vars[] = {"t", "v"};
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t t = ts(rng);
    const std::string var = vars[rng() % 2];
    const double v = unit(rng) * std::pow(10.0, mag(rng));
    s.ingest(env("acme.bo.a1.c1.m1", t, {{var, v}}));
    raw[var].push_back({t, v});
  }
  for (const auto& [var, points] : raw) {
    for (auto res : kRollupTiers) {
      auto oracle = recompute(points, resolution_ns(res));
      auto got = s.query_series(id("acme.bo.a1.c1.m1"), var, 0, UINT64_MAX / 2, res).buckets;
      ASSERT_EQ(got.size(), oracle.size()) << var << " " << to_string(res);
      for (const auto& b : got) {
        const auto& o = oracle.at(b.start_ns);
        ASSERT_EQ(b.count, o.count);
        ASSERT_EQ(b.min, o.min);
        ASSERT_EQ(b.max, o.max);
        ASSERT_EQ(b.mean(), testing::mpfr_exact_sum(o.values) / static_cast<double>(o.count));
        ASSERT_LE(b.min, b.mean());
        ASSERT_LE(b.mean(), b.max);
      }
    }
    auto got_raw = s.query_series(id("acme.bo.a1.c1.m1"), var, 0, UINT64_MAX, Resolution::Raw).raw;
    auto sorted = points;
    std::stable_sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.ts_ns < b.ts_ns; });
    EXPECT_EQ(got_raw, sorted);
  }
}

TEST(Twin, CoarseTiersComposeFromFinerOnes) {
  TwinStore s(plant());
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> val(0, 100);
  for (int i = 0; i < 20000; ++i) s.ingest(env("acme.bo.a1.c1.m1", rng() % (600 * kSec), {{"t", val(rng)}}));
  const auto m1 = id("acme.bo.a1.c1.m1");
  auto r1 = s.query_series(m1, "t", 0, 600 * kSec, Resolution::R1s).buckets;
  auto r10 = s.query_series(m1, "t", 0, 600 * kSec, Resolution::R10s).buckets;
  auto r60 = s.query_series(m1, "t", 0, 600 * kSec, Resolution::R60s).buckets;
  ASSERT_EQ(r60.size(), 10u);
  for (const auto& big : r60) {
    RollupBucket from10, from1;
    std::uint64_t count = 0;
    double min = INFINITY, max = -INFINITY;
    std::vector<double> weighted;
    int children = 0;
    for (const auto& b : r10) {
      if (bucket_start(b.start_ns, 60 * kSec) != big.start_ns) continue;
      ++children;
      from10.merge(b);
      count += b.count;
      min = std::min(min, b.min);
      max = std::max(max, b.max);
      weighted.push_back(b.mean() * static_cast<double>(b.count));
    }
    for (const auto& b : r1)
      if (bucket_start(b.start_ns, 60 * kSec) == big.start_ns) from1.merge(b);
    EXPECT_EQ(children, 6);
    // Merged through the exact sums: identical in every field.
    EXPECT_EQ(from10.count, big.count);
    EXPECT_EQ(from10.min, big.min);
    EXPECT_EQ(from10.max, big.max);
    EXPECT_EQ(from10.mean(), big.mean());
    EXPECT_EQ(from1.count, big.count);
    EXPECT_EQ(from1.mean(), big.mean());
    // Independent composition from exposed fields only.
    EXPECT_EQ(count, big.count);
    EXPECT_EQ(min, big.min);
    EXPECT_EQ(max, big.max);
    const double cw = testing::mpfr_exact_sum(weighted) / static_cast<double>(count);
    EXPECT_NEAR(cw, big.mean(), 1e-12 * std::fabs(big.mean()));
  }
}

TEST(Twin, SpatialPrefixMergesMachines) {
  TwinStore s(plant());
  for (std::uint64_t i = 0; i < 10; ++i) {
    s.ingest(env("acme.bo.a1.c1.m1", i * kSec, {{"t", 1.0}}));
    s.ingest(env("acme.bo.a1.c1.m2", i * kSec, {{"t", 3.0}}));
    s.ingest(env("acme.bo.a1.c2.m4", i * kSec, {{"t", 100.0}}));
  }
  auto cell = s.query_series(AssetPattern::parse("acme.bo.a1.c1.*"), "t", 0, 10 * kSec, Resolution::R10s);
  ASSERT_EQ(cell.buckets.size(), 1u);
  EXPECT_EQ(cell.buckets[0].count, 20u);
  EXPECT_EQ(cell.buckets[0].mean(), 2.0);
  EXPECT_EQ(cell.buckets[0].max, 3.0);
  auto area = s.query_series(AssetPattern::parse("acme.bo.a1.*"), "t", 0, 10 * kSec, Resolution::R1s);
  ASSERT_EQ(area.buckets.size(), 10u);
  EXPECT_EQ(area.buckets[0].count, 3u);
  EXPECT_EQ(s.query_series(AssetPattern::parse("acme.bo.a1.*"), "t", 0, 10 * kSec, Resolution::Raw).raw.size(), 30u);
  EXPECT_EQ(error_of([&] { s.query_series(AssetPattern::parse("acme.zz.*"), "t", 0, 1, Resolution::R1s); }),
            Errc::UnknownAsset);
  EXPECT_EQ(error_of([&] { s.query_series(AssetPattern::parse("acme.bo.*"), "x", 0, 1, Resolution::R1s); }),
            Errc::UnknownVariable);
}

TEST(Twin, SnapshotsAreNeverTorn) {
  TwinStore s(plant());
  const auto m1 = id("acme.bo.a1.c1.m1");
  std::atomic<bool> done{false};
  std::jthread writer([&] {
    for (std::int64_t i = 1; i <= 20000; ++i)
      s.ingest(env("acme.bo.a1.c1.m1", static_cast<std::uint64_t>(i), {{"a", i}, {"b", -i}}));
    done = true;
  });
  std::uint64_t last_ts = 0, reads = 0;
  while (!done) {
    auto snap = s.query_latest(m1);
    if (snap.empty()) continue;
    ASSERT_EQ(std::get<std::int64_t>(snap.at("a").value), -std::get<std::int64_t>(snap.at("b").value));
    ASSERT_GE(snap.at("a").ts_ns, last_ts);
    last_ts = snap.at("a").ts_ns;
    ++reads;
  }
  EXPECT_GT(reads, 0u);
}

TEST(Twin, RetentionBoundsMemory) {
  TwinStore s(plant(), Retention{100, 50, 50, 50});
  for (std::uint64_t i = 0; i < 1000; ++i) s.ingest(env("acme.bo.a1.c1.m1", i * kSec, {{"t", 1.0}}));
  const auto m1 = id("acme.bo.a1.c1.m1");
  auto raw = s.query_series(m1, "t", 0, UINT64_MAX, Resolution::Raw).raw;
  ASSERT_EQ(raw.size(), 100u);
  EXPECT_EQ(raw.front().ts_ns, 900 * kSec);
  auto r1 = s.query_series(m1, "t", 0, UINT64_MAX, Resolution::R1s).buckets;
  ASSERT_EQ(r1.size(), 50u);
  EXPECT_EQ(r1.front().start_ns, 950 * kSec);
  EXPECT_EQ(s.query_series(m1, "t", 0, UINT64_MAX, Resolution::R60s).buckets.size(), 17u);
}

TEST(Metadata, ResolvesTopicsAndPrefixes) {
  auto m = plant();
  EXPECT_EQ(m->resolve_topic(id("acme.bo.a1.c1.m1")), "acme.bo.a1.c1.m1.sensors");
  EXPECT_EQ(m->resolve_assets("viewer").size(), 3u);
  EXPECT_EQ(error_of([&] { m->resolve_assets("nobody"); }), Errc::UnknownBinding);
  EXPECT_EQ(error_of([&] { m->resolve_topic(id("acme.bo.a1.c9.m9")); }), Errc::UnknownBinding);
  EXPECT_TRUE(AssetPattern::parse("acme.*").covers(AssetPattern::parse("acme.bo.a1.*")));
  EXPECT_FALSE(AssetPattern::parse("acme.bo.a1.*").covers(AssetPattern::parse("acme.*")));
}

TEST(Query, EnforcesAppBindings) {
  TwinStore s(plant());
  QueryService q(s);
  for (auto a : {"acme.bo.a1.c1.m1", "acme.bo.a1.c2.m4"}) s.ingest(env(a, kSec, {{"t", 1.0}}));
  const auto m1 = id("acme.bo.a1.c1.m1"), m4 = id("acme.bo.a1.c2.m4");

  EXPECT_EQ(q.latest("viewer", m1).size(), 1u);
  EXPECT_EQ(error_of([&] { q.latest("viewer", m4); }), Errc::Forbidden);
  EXPECT_EQ(error_of([&] { q.latest("nobody", m1); }), Errc::UnknownBinding);

  EXPECT_EQ(q.series("viewer", m1, "t", 0, 60 * kSec, Resolution::R10s).buckets.size(), 1u);
  EXPECT_EQ(q.series("viewer", m1, "t", 0, 60 * kSec, Resolution::R60s).buckets.size(), 1u);
  EXPECT_EQ(error_of([&] { q.series("viewer", m1, "t", 0, 60 * kSec, Resolution::R1s); }), Errc::Forbidden);
  EXPECT_EQ(error_of([&] { q.series("viewer", m1, "t", 0, 60 * kSec, Resolution::Raw); }), Errc::Forbidden);
  EXPECT_EQ(error_of([&] { q.series("viewer", m4, "t", 0, 60 * kSec, Resolution::R60s); }), Errc::Forbidden);
  EXPECT_EQ(error_of([&] { q.series("latest-only", m1, "t", 0, 60 * kSec, Resolution::R60s); }), Errc::Forbidden);
  EXPECT_EQ(q.series("raw", m4, "t", 0, 60 * kSec, Resolution::Raw).raw.size(), 1u);

  auto cell = AssetPattern::parse("acme.bo.a1.c1.*"), area = AssetPattern::parse("acme.bo.a1.*");
  EXPECT_EQ(q.series("viewer", cell, "t", 0, 60 * kSec, Resolution::R10s).buckets.size(), 1u);
  EXPECT_EQ(error_of([&] { q.series("viewer", area, "t", 0, 60 * kSec, Resolution::R10s); }), Errc::Forbidden);
  EXPECT_EQ(error_of([&] { q.series("viewer", AssetPattern::parse("acme.zz.*"), "t", 0, 1, Resolution::R10s); }),
            Errc::Forbidden);
  EXPECT_EQ(q.series("raw", area, "t", 0, 60 * kSec, Resolution::Raw).raw.size(), 2u);

  auto topo = q.topology("viewer");
  ASSERT_EQ(topo.size(), 3u);
  EXPECT_EQ(topo[0].topic, "acme.bo.a1.c1.m1.sensors");
  EXPECT_EQ(topo[0].variables, std::vector<std::string>{"t"});
  EXPECT_EQ(error_of([&] { q.topology("raw"); }), Errc::Forbidden);
  auto tree = to_json(topo);
  EXPECT_EQ(tree["acme"]["bo"]["a1"]["c1"]["m2"]["assetId"], "acme.bo.a1.c1.m2");
}

TEST(Query, JsonShapes) {
  TwinStore s(plant());
  s.ingest(env("acme.bo.a1.c1.m1", 2 * kSec, {{"t", 4.0}, {"s", std::string("x")}}));
  auto l = to_json(s.query_latest(id("acme.bo.a1.c1.m1")));
  EXPECT_EQ(l["t"]["value"], 4.0);
  EXPECT_EQ(l["t"]["tsUnixNs"], 2 * kSec);
  EXPECT_EQ(l["s"]["value"], "x");
  auto b = to_json(s.query_series(id("acme.bo.a1.c1.m1"), "t", 0, 10 * kSec, Resolution::R1s));
  EXPECT_EQ(b["resolution"], "R1s");
  EXPECT_EQ(b["buckets"][0], (nlohmann::json{{"bucketStartNs", 2 * kSec}, {"count", 1}, {"mean", 4.0},
                                             {"min", 4.0}, {"max", 4.0}}));
  auto r = to_json(s.query_series(id("acme.bo.a1.c1.m1"), "t", 0, 10 * kSec, Resolution::Raw));
  EXPECT_EQ(r["points"][0]["value"], 4.0);
}

TEST(Expression, EvaluatesWithPrecedence) {
  std::map<std::string, double> v{{"a", 120}, {"b", 7}};
  EXPECT_TRUE(Expression::parse("a > 100 AND b > 5").test(v));
  EXPECT_FALSE(Expression::parse("a > 100 AND b > 8").test(v));
  EXPECT_TRUE(Expression::parse("a > 200 or b >= 7").test(v));
  EXPECT_TRUE(Expression::parse("NOT a < 100").test(v));
  EXPECT_TRUE(Expression::parse("!(a < 100) && true").test(v));
  EXPECT_EQ(Expression::parse("a - b * 2 + -3").evaluate(v), 103.0);
  EXPECT_EQ(Expression::parse("(a - b) / 113").evaluate(v), 1.0);
  EXPECT_TRUE(Expression::parse("a == 120 AND b != 120").test(v));
  EXPECT_TRUE(Expression::parse("false OR a > 1 AND b > 1").test(v));
  EXPECT_FALSE(Expression::parse("(false OR a > 1) AND b > 100").test(v));
  EXPECT_EQ(Expression::parse("a > 1e2").evaluate(v), 1.0);
  EXPECT_EQ(Expression::parse("a > b AND b > 1").names(), (std::vector<std::string>{"a", "b"}));
}

TEST(Expression, Errors) {
  for (auto bad : {"", "a >", "(a > 1", "a > 1)", "a b", "a > 1 AND", "a $ b", "ANDa"})
    EXPECT_EQ(error_of([&] { Expression::parse(bad, {"a", "b"}); }), Errc::ParseError) << bad;
  EXPECT_EQ(error_of([&] { Expression::parse("c > 1", {"a", "b"}); }), Errc::ParseError);
  EXPECT_EQ(error_of([&] { Expression::parse("a > b").evaluate({{"a", 1}}); }), Errc::InsufficientHistory);
}

TEST(ZScore, DegenerateAndShortWindows) {
  const std::vector<double> flat{10, 10, 10};
  auto r = zscore(flat, 10, 3, 3);
  EXPECT_EQ(r.z, 0.0);
  EXPECT_FALSE(r.flagged);
  EXPECT_EQ(zscore(flat, 1e9, 3, 3).z, 0.0);
  EXPECT_EQ(error_of([&] { zscore(std::vector<double>{1, 2}, 1, 3, 3); }), Errc::InsufficientHistory);
  EXPECT_EQ(error_of([&] { zscore(flat, 1, 2, 3); }), Errc::InvalidArgument);
  // Only the trailing window counts.
  EXPECT_EQ(zscore(std::vector<double>{1000, 1, 2, 3}, 2, 3, 3).z, 0.0);
  EXPECT_DOUBLE_EQ(zscore(std::vector<double>{1, 2, 3}, 4, 3, 3).z, 2.0 / std::sqrt(2.0 / 3.0));
}

// Independent recomputation: two-pass long double statistics.
TEST(ZScore, FlagRateMatchesOracleOnGaussianSamples) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n01;
  std::vector<double> xs(20000);
  for (auto& x : xs) x = n01(rng);
  const std::size_t w = 20;
  const double k = 2.0;
  std::size_t flags = 0, oracle_flags = 0;
  for (std::size_t i = w; i < xs.size(); ++i) {
    std::span<const double> hist(xs.data(), i);
    auto r = zscore(hist, xs[i], w, k);
    long double mean = 0, var = 0;
    for (std::size_t j = i - w; j < i; ++j) mean += xs[j];
    mean /= w;
    for (std::size_t j = i - w; j < i; ++j) var += (xs[j] - mean) * (xs[j] - mean);
    const long double z = (xs[i] - mean) / std::sqrt(var / w);
    ASSERT_NEAR(r.z, static_cast<double>(z), 1e-9);
    flags += r.flagged;
    oracle_flags += std::fabs(z) > k;
  }
  EXPECT_EQ(flags, oracle_flags);
  EXPECT_GT(flags, 0u);
}

TEST(Fusion, ThresholdRuleDerivesVariableAndEvents) {
  TwinStore s(plant());
  std::vector<FusionEvent> events;
  s.on_fusion([&](const FusionEvent& e) { events.push_back(e); });
  s.add_rule(rule_from_json(nlohmann::json::parse(R"({
    "ruleId": "hot-and-shaking",
    "inputs": [{"alias": "a", "assetId": "acme.bo.a1.c1.m1", "variable": "temperature"},
               {"alias": "b", "assetId": "acme.bo.a1.c1.m2", "variable": "vibration"}],
    "threshold": "a > 100 AND b > 5",
    "output": {"assetId": "acme.bo.a1.c1.m1", "variable": "alarm"}})")));
  s.ingest(env("acme.bo.a1.c1.m1", 1, {{"temperature", 120.0}}));
  EXPECT_TRUE(events.empty());  // b has no value yet
  s.ingest(env("acme.bo.a1.c1.m2", 2, {{"vibration", 7.0}}));
  ASSERT_EQ(events.size(), 1u);
  EXPECT_TRUE(events[0].flagged);
  EXPECT_EQ(events[0].value, 1.0);
  EXPECT_EQ(s.query_latest(id("acme.bo.a1.c1.m1")).at("alarm").value, otbus::FieldValue(1.0));
  s.ingest(env("acme.bo.a1.c1.m2", 3, {{"vibration", 1.0}}));
  ASSERT_EQ(events.size(), 2u);
  EXPECT_FALSE(events[1].flagged);
  EXPECT_EQ(s.query_series(id("acme.bo.a1.c1.m1"), "alarm", 0, kSec, Resolution::R1s).buckets[0].count, 2u);
}

TEST(Fusion, ZScoreRuleFlagsSpikes) {
  TwinStore s(plant());
  std::vector<FusionEvent> events;
  s.on_fusion([&](const FusionEvent& e) { events.push_back(e); });
  s.add_rule({"spike", {{"x", id("acme.bo.a1.c1.m3"), "vibration"}}, ZScoreRule{5, 3}, id("acme.bo.a1.c1.m3"), "vib_z"});
  const double vals[] = {1, 2, 1, 2, 1, 1.5, 50};
  for (std::size_t i = 0; i < std::size(vals); ++i) s.ingest(env("acme.bo.a1.c1.m3", i, {{"vibration", vals[i]}}));
  ASSERT_EQ(events.size(), 2u);  // the first five only build history
  EXPECT_FALSE(events[0].flagged);
  EXPECT_TRUE(events[1].flagged);
  EXPECT_EQ(events[1].value, zscore(std::vector<double>{2, 1, 2, 1, 1.5}, 50, 5, 3).z);
}

TEST(Fusion, RuleValidation) {
  TwinStore s(plant());
  auto base = nlohmann::json::parse(R"({"ruleId": "r", "inputs": [{"assetId": "a.b.c.d.e", "variable": "v"}],
                                        "zscore": {"windowN": 3, "k": 2}, "output": {"assetId": "a.b.c.d.e", "variable": "z"}})");
  auto r = rule_from_json(base);
  EXPECT_EQ(r.inputs[0].alias, "v");
  EXPECT_EQ(to_json(r), (nlohmann::json::parse(R"({"ruleId": "r", "inputs": [{"alias": "v", "assetId": "a.b.c.d.e", "variable": "v"}],
                                        "zscore": {"windowN": 3, "k": 2.0}, "output": {"assetId": "a.b.c.d.e", "variable": "z"}})")));
  s.add_rule(r);
  EXPECT_EQ(error_of([&] { s.add_rule(r); }), Errc::InvalidArgument);
  auto j = base;
  j["zscore"]["windowN"] = 2;
  EXPECT_EQ(error_of([&] { rule_from_json(j); }), Errc::InvalidArgument);
  j = base;
  j["inputs"] = nlohmann::json::array();
  EXPECT_EQ(error_of([&] { rule_from_json(j); }), Errc::InvalidArgument);
  j = base;
  j.erase("zscore");
  EXPECT_EQ(error_of([&] { rule_from_json(j); }), Errc::InvalidArgument);
  j["threshold"] = "w > 1";
  EXPECT_EQ(error_of([&] { rule_from_json(j); }), Errc::ParseError);
}

TEST(AssetStore, BlobsAreContentAddressed) {
  testing::TempDir dir;
  AssetStores stores(dir.path());
  auto& blobs = dynamic_cast<BlobStore&>(stores.store(StoreKind::Blob));
  EXPECT_EQ(sha256_hex(as_bytes(std::string_view("abc"))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::mt19937_64 rng(3);
  Bytes data(1 << 20);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng());
  const auto key = stores.put(StoreKind::Blob, "", data);
  EXPECT_EQ(key, sha256_hex(data));
  EXPECT_EQ(stores.get(StoreKind::Blob, key), data);
  EXPECT_EQ(blobs.put(data), key);
  EXPECT_EQ(blobs.keys(), std::vector<std::string>{key});
  EXPECT_EQ(blobs.put(key, data), key);

  EXPECT_EQ(error_of([&] { blobs.put(std::string(64, 'a'), data); }), Errc::HashMismatch);
  EXPECT_EQ(error_of([&] { blobs.get(std::string(64, 'b')); }), Errc::NotFound);
  EXPECT_EQ(error_of([&] { blobs.get("nothex"); }), Errc::InvalidArgument);
  {
    std::fstream f(blobs.path_of(key), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(100);
    f.put(static_cast<char>(data[100] ^ 1));
  }
  EXPECT_EQ(error_of([&] { blobs.get(key); }), Errc::HashMismatch);
  // Re-putting the content repairs the damaged copy.
  blobs.put(data);
  EXPECT_EQ(blobs.get(key), data);
}

TEST(AssetStore, DocumentsAndSegments) {
  testing::TempDir dir;
  AssetStores stores(dir.path());
  const std::string doc = R"({"name": "press 4", "axes": [1, 2, 3]})";
  stores.put(StoreKind::Document, "acme/bo/press-4", as_bytes(std::string_view(doc)));
  EXPECT_EQ(as_string(stores.get(StoreKind::Document, "acme/bo/press-4")), doc);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "documents/acme/bo/press-4.json"));
  stores.put(StoreKind::Document, "acme/bo/press-4", as_bytes(std::string_view("[]")));
  EXPECT_EQ(as_string(stores.get(StoreKind::Document, "acme/bo/press-4")), "[]");
  EXPECT_EQ(stores.store(StoreKind::Document).keys(), std::vector<std::string>{"acme/bo/press-4"});
  EXPECT_EQ(error_of([&] { stores.put(StoreKind::Document, "x", as_bytes(std::string_view("{nope"))); }),
            Errc::InvalidArgument);
  for (auto bad : {"", "../x", "a//b", "a/./b", "a b"})
    EXPECT_EQ(error_of([&] { stores.put(StoreKind::Document, bad, as_bytes(std::string_view("1"))); }),
              Errc::InvalidArgument)
        << bad;
  EXPECT_EQ(error_of([&] { stores.get(StoreKind::Document, "missing"); }), Errc::NotFound);

  TwinStore s(plant());
  for (std::uint64_t i = 0; i < 5; ++i) s.ingest(env("acme.bo.a1.c1.m1", i, {{"t", 0.5 * i}}));
  const Bytes seg = s.export_series(id("acme.bo.a1.c1.m1"), "t");
  stores.put(StoreKind::SeriesSegment, "acme.bo.a1.c1.m1/t", seg);
  const Bytes back = stores.get(StoreKind::SeriesSegment, "acme.bo.a1.c1.m1/t");
  EXPECT_EQ(back, seg);
  ByteReader r(back);
  broker::Record rec;
  std::uint64_t n = 0;
  while (broker::read_record_frame(r, rec)) {
    EXPECT_EQ(rec.offset, n);
    EXPECT_EQ(rec.ts_unix_ns, n);
    EXPECT_EQ(ByteReader(rec.payload).f64(), 0.5 * n);
    ++n;
  }
  EXPECT_EQ(n, 5u);
  Bytes torn(seg.begin(), seg.end() - 1);
  EXPECT_EQ(error_of([&] { stores.put(StoreKind::SeriesSegment, "bad", torn); }), Errc::InvalidArgument);
  EXPECT_EQ(store_kind_from_string("series-segment"), StoreKind::SeriesSegment);
  EXPECT_EQ(error_of([&] { store_kind_from_string("tape"); }), Errc::InvalidArgument);
}

TEST(Feeder, IngestsEnvelopesFromBroker) {
  auto meta = plant();
  TwinStore s(meta);
  broker::Broker b;
  const std::string topic = meta->resolve_topic(id("acme.bo.a1.c1.m1"));
  b.create_topic({topic, 2, 1, broker::QosClass::SensorData});
  std::atomic<int> tapped{0};
  TwinFeeder feeder(b, s, {topic}, "twin", [&](const BridgeEnvelope&, std::uint64_t) { ++tapped; });
  for (std::uint64_t i = 0; i < 100; ++i) {
    auto e = gateway::encode_envelope(env("acme.bo.a1.c1.m1", i, {{"t", double(i)}}));
    b.produce(topic, as_bytes(std::string_view("acme.bo.a1.c1.m1")), e, broker::AckLevel::LeaderOnly);
  }
  b.produce(topic, {}, as_bytes(std::string_view("junk")), broker::AckLevel::LeaderOnly);
  auto e = gateway::encode_envelope(env("acme.bo.a1.c9.m9", 1, {{"t", 1.0}}));
  b.produce(topic, {}, e, broker::AckLevel::LeaderOnly);
  for (int i = 0; i < 200 && feeder.stats().consumed < 102; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  feeder.stop();
  auto st = feeder.stats();
  EXPECT_EQ(st.consumed, 102u);
  EXPECT_EQ(st.ingested, 100u);
  EXPECT_EQ(st.malformed, 1u);
  EXPECT_EQ(st.rejected, 1u);
  EXPECT_EQ(tapped, 100);
  EXPECT_EQ(s.query_latest(id("acme.bo.a1.c1.m1")).at("t").value, otbus::FieldValue(99.0));
}

TEST(TwinConfigJson, Parses) {
  auto c = twin_config_from_json(nlohmann::json::parse(R"({
    "fusionRules": [{"ruleId": "r", "inputs": [{"alias": "a", "assetId": "a.b.c.d.e", "variable": "v"}],
                     "threshold": "a > 1", "output": {"assetId": "a.b.c.d.e", "variable": "hot"}}],
    "retention": {"rawPoints": 10, "buckets60s": 5}})"));
  ASSERT_EQ(c.rules.size(), 1u);
  EXPECT_EQ(c.retention.raw_points, 10u);
  EXPECT_EQ(c.retention.buckets_60s, 5u);
  EXPECT_EQ(c.retention.buckets_1s, Retention{}.buckets_1s);
  EXPECT_EQ(error_of([&] { twin_config_from_json(nlohmann::json::parse(R"({"retention": {"rawPoints": 0}})")); }),
            Errc::InvalidArgument);
}

}  // namespace
}  // namespace smv::twin
