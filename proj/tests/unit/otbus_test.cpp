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

#include <cstring>
#include <map>
#include <thread>

#include "../support/expect.hpp"
#include "../support/generators.hpp"
#include "smv/common/clock.hpp"
#include "smv/common/error.hpp"
#include "smv/otbus/asset_id.hpp"
#include "smv/otbus/pubsub.hpp"
#include "smv/otbus/simulator.hpp"

namespace smv::otbus {
namespace {

using namespace std::chrono_literals;

using smv::testing::error_of;

Bytes hex(const char* s) {
  Bytes out;
  for (std::size_t i = 0; s[i];) {
    if (s[i] == ' ') {
      ++i;
      continue;
    }
    out.push_back(static_cast<std::uint8_t>(std::stoi(std::string(s + i, 2), nullptr, 16)));
    i += 2;
  }
  return out;
}

TEST(AssetIdTest, ParseFormatRoundTrip) {
  auto a = AssetId::parse("acme.bo.a1.c1.m-7_x");
  EXPECT_EQ(a.enterprise(), "acme");
  EXPECT_EQ(a.machine(), "m-7_x");
  EXPECT_EQ(a.str(), "acme.bo.a1.c1.m-7_x");
  EXPECT_EQ(AssetId::parse(a.str()), a);
}

TEST(AssetIdTest, RejectsBadSegments) {
  for (const char* bad : {"", "a.b.c.d", "a.b.c.d.e.f", "a..c.d.e", "a.b.c.d.", "a.b c.c.d.e", "a.b.c.d.é"})
    EXPECT_EQ(error_of([&] { AssetId::parse(bad); }), Errc::InvalidArgument) << bad;
}

TEST(Codec, SingleF64FieldLayout) {
  DataSetMessage m{1, 7, 0, 0, {{"temp", 25.0}}};
  auto buf = encode_network_message(m);
  ASSERT_EQ(buf.size(), 33u);
  // Hand-encoded per the wire table.
  EXPECT_EQ(buf, hex("01 0100 0700 00000000 0000000000000000 0100 04 74656d70 00 0000000000003940"));
  double tail;
  std::memcpy(&tail, buf.data() + 25, 8);
  EXPECT_EQ(tail, 25.0);
}

TEST(Codec, EmptyMessageIsNineteenBytes) {
  DataSetMessage m{};
  EXPECT_EQ(encode_network_message(m), hex("01 0000 0000 00000000 0000000000000000 0000"));
}

TEST(Codec, AllTagsLayout) {
  DataSetMessage m{0x0102, 0x0304, 0x05060708, 0x1112131415161718ull,
                   {{"i", std::int64_t{-2}}, {"b", true}, {"s", std::string("hi")}}};
  EXPECT_EQ(encode_network_message(m), hex("01 0201 0403 08070605 1817161514131211 0300"
                                           "01 69 01 feffffffffffffff"
                                           "01 62 02 01"
                                           "01 73 03 0200 6869"));
}

TEST(Codec, OversizeStringRejected) {
  DataSetMessage m{1, 1, 0, 0, {{"blob", std::string(1400, 'x')}}};
  EXPECT_EQ(error_of([&] { encode_network_message(m); }), Errc::OversizeMessage);
}

TEST(Codec, InvariantViolationsRejected) {
  DataSetMessage dup{1, 1, 0, 0, {{"a", 1.0}, {"a", 2.0}}};
  EXPECT_EQ(error_of([&] { encode_network_message(dup); }), Errc::InvalidArgument);
  DataSetMessage long_str{1, 1, 0, 0, {{"s", std::string(256, 'x')}}};
  EXPECT_EQ(error_of([&] { encode_network_message(long_str); }), Errc::InvalidArgument);
}

TEST(Codec, DecodeRejectsMalformed) {
  EXPECT_EQ(error_of([] { decode_network_message({}); }), Errc::MalformedMessage);
  auto good = encode_network_message(DataSetMessage{1, 7, 0, 0, {{"temp", 25.0}}});
  auto v2 = good;
  v2[0] = 2;
  EXPECT_EQ(error_of([&] { decode_network_message(v2); }), Errc::MalformedMessage);
  for (std::size_t cut = 0; cut < good.size(); ++cut)
    EXPECT_EQ(error_of([&] { decode_network_message(ByteSpan(good.data(), cut)); }), Errc::MalformedMessage);
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(error_of([&] { decode_network_message(trailing); }), Errc::MalformedMessage);
  // Two fields both named "a", built by hand since the encoder refuses it.
  auto dup = hex("01 0000 0000 00000000 0000000000000000 0200 0161 02 01 0161 02 00");
  EXPECT_EQ(error_of([&] { decode_network_message(dup); }), Errc::MalformedMessage);
  auto bad_tag = hex("01 0000 0000 00000000 0000000000000000 0100 0161 07 00");
  EXPECT_EQ(error_of([&] { decode_network_message(bad_tag); }), Errc::MalformedMessage);
}

TEST(Codec, RandomRoundTrip) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    auto m = testing::random_message(rng);
    ASSERT_EQ(decode_network_message(encode_network_message(m)), m);
  }
}

TEST(Codec, RandomBytesNeverCrash) {
  std::mt19937_64 rng(43);
  int decoded = 0;
  for (int i = 0; i < 20000; ++i) {
    Bytes buf(rng() % 64);
    for (auto& b : buf) b = static_cast<std::uint8_t>(rng());
    if (!buf.empty() && (rng() & 1)) buf[0] = 1;  // get past the version check half the time
    try {
      decode_network_message(buf);
      ++decoded;
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), Errc::MalformedMessage);
    }
  }
  SUCCEED() << decoded << " random buffers decoded";
}

TEST(PubSub, LoopbackDeliversIdenticalBytes) {
  auto raw = net::UdpSocket::bind(net::Endpoint::parse("127.0.0.1:0"));
  net::Endpoint to{"127.0.0.1", raw.local_port()};
  DataSetMessage m{3, 9, 41, unix_now_ns(), {{"temp", 21.5}, {"on", true}}};
  Publisher pub;
  pub.publish(to, m);
  Bytes buf(2048);
  auto n = raw.recv(buf, 1000ms);
  ASSERT_TRUE(n);
  buf.resize(*n);
  EXPECT_EQ(buf, encode_network_message(m));
}

TEST(PubSub, PublishWithoutSubscriberSucceeds) {
  auto probe = net::UdpSocket::bind(net::Endpoint::parse("127.0.0.1:0"));
  net::Endpoint to{"127.0.0.1", probe.local_port()};
  probe = net::UdpSocket::open();  // nobody listens on `to` any more
  Publisher pub;
  for (int i = 0; i < 5; ++i) EXPECT_NO_THROW(pub.publish(to, DataSetMessage{1, 1, std::uint32_t(i), 0, {}}));
}

TEST(PubSub, OversizeFailsBeforeSend) {
  auto sub = Subscriber::bind(net::Endpoint::parse("127.0.0.1:0"));
  Publisher pub;
  net::Endpoint to{"127.0.0.1", sub.port()};
  EXPECT_EQ(error_of([&] { pub.publish(to, DataSetMessage{1, 1, 0, 0, {{"x", std::string(1400, 'x')}}}); }),
            Errc::OversizeMessage);
  EXPECT_FALSE(sub.next(100ms));
}

TEST(PubSub, FilterDropsOtherSources) {
  auto sub = Subscriber::bind(net::Endpoint::parse("127.0.0.1:0"), SourceFilter{1, 7});
  net::Endpoint to{"127.0.0.1", sub.port()};
  Publisher pub;
  pub.publish(to, DataSetMessage{2, 7, 0, 0, {}});
  pub.publish(to, DataSetMessage{1, 7, 5, 0, {}});
  auto r = sub.next(1000ms);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->msg.publisher_id, 1);
  EXPECT_EQ(r->msg.sequence_number, 5u);
  EXPECT_EQ(sub.filtered(), 1u);
}

TEST(PubSub, MalformedCountedAndSkipped) {
  auto sub = Subscriber::bind(net::Endpoint::parse("127.0.0.1:0"));
  net::Endpoint to{"127.0.0.1", sub.port()};
  auto raw = net::UdpSocket::open();
  Bytes junk = {9, 9, 9};
  raw.send_to(to, junk);
  Publisher pub;
  pub.publish(to, DataSetMessage{4, 4, 1, 0, {}});
  auto r = sub.next(1000ms);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->msg.publisher_id, 4);
  EXPECT_EQ(sub.malformed(), 1u);
}

TEST(PubSub, ReceiveTimestampNotBeforeSendTimestamp) {
  auto sub = Subscriber::bind(net::Endpoint::parse("127.0.0.1:0"));
  net::Endpoint to{"127.0.0.1", sub.port()};
  Publisher pub;
  for (std::uint32_t i = 0; i < 50; ++i) pub.publish(to, DataSetMessage{1, 1, i, unix_now_ns(), {}});
  for (int i = 0; i < 50; ++i) {
    auto r = sub.next(1000ms);
    ASSERT_TRUE(r);
    EXPECT_GE(r->rx_unix_ns, r->msg.ts_unix_ns);
  }
}

TEST(Simulator, ConstantWaveformAndDeterminism) {
  SimulatorProfile p;
  p.rate_per_sec = 100;
  p.seed = 99;
  p.variables = {{"c", Waveform::Constant, {.value = 5.0}},
                 {"n", Waveform::UniformNoise, {.min = -1.0, .max = 1.0}},
                 {"r", Waveform::Ramp, {.start = 1.0, .slope = 2.0}}};
  SignalGenerator a(p), b(p);
  for (std::uint32_t i = 0; i < 500; ++i) {
    auto ma = a.next(1000 + i), mb = b.next(777);
    EXPECT_EQ(ma.sequence_number, i);
    EXPECT_EQ(std::get<double>(ma.fields[0].value), 5.0);
    EXPECT_EQ(ma.fields, mb.fields);
    double n = std::get<double>(ma.fields[1].value);
    EXPECT_GE(n, -1.0);
    EXPECT_LT(n, 1.0);
  }
  SimulatorProfile q = p;
  q.seed = 100;
  SignalGenerator c(q);
  SignalGenerator d(p);
  EXPECT_NE(c.next(0).fields[1], d.next(0).fields[1]);
}

TEST(Simulator, ProfileJsonRoundTrip) {
  auto p = SimulatorProfile::with_default_variables(3, 4, 800, 5, 17);
  auto j = profile_to_json(p);
  EXPECT_TRUE(j.contains("publisherId"));
  EXPECT_TRUE(j.contains("ratePerSec"));
  EXPECT_TRUE(j.contains("durationSec"));
  auto back = profile_from_json(j);
  EXPECT_EQ(back.publisher_id, 3);
  EXPECT_EQ(back.rate_per_sec, 800u);
  ASSERT_EQ(back.variables.size(), 4u);
  SignalGenerator g1(p), g2(back);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(g1.next(0), g2.next(0));
  auto bad = j;
  bad["ratePerSec"] = 0;
  EXPECT_EQ(error_of([&] { profile_from_json(bad); }), Errc::InvalidArgument);
}

TEST(Simulator, PacedRunSendsRateTimesDuration) {
  auto sub = Subscriber::bind(net::Endpoint::parse("127.0.0.1:0"));
  net::Endpoint to{"127.0.0.1", sub.port()};
  auto profile = SimulatorProfile::with_default_variables(1, 7, 400, 10, 1);

  std::map<std::uint32_t, int> seen;
  std::uint32_t last = 0;
  bool increasing = true;
  std::jthread rx([&](std::stop_token st) {
    bool first = true;
    while (!st.stop_requested()) {
      auto r = sub.next(50ms);
      if (!r) continue;
      if (!first && r->msg.sequence_number <= last) increasing = false;
      last = r->msg.sequence_number;
      first = false;
      seen[r->msg.sequence_number]++;
    }
  });
  auto stats = run_simulator(profile, {to});
  std::this_thread::sleep_for(200ms);
  rx.request_stop();
  rx.join();

  EXPECT_EQ(stats.sent, 4000u);
  EXPECT_NEAR(stats.achieved_rate, 400.0, 400.0 * 0.05);
  EXPECT_TRUE(increasing);
  EXPECT_EQ(seen.size(), 4000u);
}

}  // namespace
}  // namespace smv::otbus
