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

#include <algorithm>
#include <random>
#include <thread>

#include "../support/expect.hpp"
#include "smv/common/clock.hpp"
#include "smv/engine/bus.hpp"
#include "smv/engine/fps_bench.hpp"
#include "smv/engine/renderer.hpp"
#include "smv/engine/state.hpp"
#include "smv/simd/kernels.hpp"

namespace smv::engine {
namespace {

using namespace std::chrono_literals;
using smv::testing::error_of;

TEST(Frame, PresetsAndPayloadSizes) {
  EXPECT_EQ(Frame::payload_size(3840, 2160), 33'177'600u);
  const std::pair<FramePreset, FrameSize> table[] = {{FramePreset::HD, {1280, 720}},
                                                     {FramePreset::FHD, {1920, 1080}},
                                                     {FramePreset::QHD, {2560, 1440}},
                                                     {FramePreset::UHD4K, {3840, 2160}},
                                                     {FramePreset::UHD8K, {7680, 4320}}};
  for (auto [p, s] : table) {
    EXPECT_EQ(frame_size(p).width, s.width);
    EXPECT_EQ(frame_size(p).height, s.height);
    EXPECT_EQ(preset_from_string(to_string(p)), p);
  }
  EXPECT_EQ(preset_from_string("hd"), FramePreset::HD);
  EXPECT_EQ(preset_from_string("uhd8k"), FramePreset::UHD8K);
  EXPECT_EQ(error_of([] { preset_from_string("16k"); }), Errc::InvalidArgument);
  EXPECT_EQ(transport_from_string("LocalZeroCopy"), TransportKind::LocalZeroCopy);
  EXPECT_EQ(transport_from_string("datagram"), TransportKind::Datagram);
}

TEST(Frame, SyntheticFramesAreDeterministicAndSealed) {
  auto a = synthetic_frame(64, 48, 7, 99), b = synthetic_frame(64, 48, 7, 1);
  EXPECT_TRUE(a.intact());
  EXPECT_EQ(a.payload, b.payload);
  EXPECT_EQ(a.crc, simd::crc32(a.payload));
  EXPECT_NE(synthetic_frame(64, 48, 8).payload, a.payload);
  // Pixel (3, 2) of seed 7: R = 3+7, G = 2+14, B = (3^2)+21, A = 255.
  const auto* px = a.payload.data() + (2 * 64 + 3) * 4;
  EXPECT_EQ(px[0], 10);
  EXPECT_EQ(px[1], 16);
  EXPECT_EQ(px[2], 22);
  EXPECT_EQ(px[3], 255);
  a.payload[5] ^= 1;
  EXPECT_FALSE(a.intact());
  b.payload.pop_back();
  EXPECT_FALSE(b.intact());
}

TEST(LocalZeroCopy, HandsOverTheSameBuffer) {
  auto [tx, rx] = make_local_zero_copy();
  auto f = synthetic_frame(1280, 720, 1);
  const auto* data = f.payload.data();
  const auto crc = f.crc;
  tx->send(std::move(f));
  auto got = rx->recv(1s);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->payload.data(), data);  // moved, not copied
  EXPECT_EQ(got->crc, crc);
  EXPECT_TRUE(got->intact());
  EXPECT_FALSE(rx->recv(10ms));
}

TEST(LocalZeroCopy, DropsCorruptFramesAndCloses) {
  auto [tx, rx] = make_local_zero_copy(4);
  auto bad = synthetic_frame(32, 32, 1);
  bad.payload[0] ^= 0xFF;
  tx->send(std::move(bad));
  tx->send(synthetic_frame(32, 32, 2));
  tx->close();
  auto got = rx->recv(1s);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->seq, 2u);
  EXPECT_EQ(rx->stats().corrupt, 1u);
  EXPECT_EQ(error_of([&] { rx->recv(10ms); }), Errc::TransportClosed);
  EXPECT_EQ(error_of([&] { tx->send(synthetic_frame(8, 8, 3)); }), Errc::TransportClosed);

  auto [tx2, rx2] = make_local_zero_copy(1);
  rx2->close();
  EXPECT_EQ(error_of([&] { tx2->send(synthetic_frame(8, 8, 1)); }), Errc::TransportClosed);
}

TEST(LocalZeroCopy, BoundedQueueKeepsOrder) {
  auto [tx, rx] = make_local_zero_copy(2);
  std::jthread producer([&] {
    for (std::uint64_t i = 0; i < 200; ++i) tx->send(synthetic_frame(16, 16, i));
    tx->close();
  });
  std::uint64_t expect = 0;
  try {
    for (;;)
      if (auto f = rx->recv(1s)) {
        EXPECT_EQ(f->seq, expect++);
      }
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TransportClosed);
  }
  EXPECT_EQ(expect, 200u);
}

TEST(Datagram, RoundTripsFramesBitExact) {
  auto [tx, rx] = make_datagram_loopback();
  std::mt19937 rng(4);
  std::vector<Frame> sent;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const std::uint32_t w = 1 + rng() % 300, h = 1 + rng() % 200;
    sent.push_back(synthetic_frame(w, h, i, 1000 + i));
  }
  std::jthread producer([&, &tx = tx] {
    for (const auto& f : sent) tx->send(Frame(f));
  });
  for (const auto& want : sent) {
    auto got = rx->recv(2s);
    ASSERT_TRUE(got);
    EXPECT_EQ(got->seq, want.seq);
    EXPECT_EQ(got->width, want.width);
    EXPECT_EQ(got->height, want.height);
    EXPECT_EQ(got->capture_ns, want.capture_ns);
    EXPECT_EQ(got->crc, want.crc);
    EXPECT_EQ(got->payload, want.payload);
    rx->recycle(std::move(*got));
  }
  producer.join();
  EXPECT_EQ(tx->stats().frames_sent, 20u);
  EXPECT_EQ(rx->stats().frames_received, 20u);
}

// Sniffs the wire: header layout, descriptor and the 1400-byte ceiling.
TEST(Datagram, WireFormat) {
  auto sock = net::UdpSocket::bind({"127.0.0.1", 0});
  auto tx = make_datagram_sender({"127.0.0.1", sock.local_port()});
  auto frame = synthetic_frame(40, 30, 77, 123456);  // 4800 bytes of payload
  const auto copy = frame;
  tx->send(std::move(frame));
  const std::size_t data = 1400 - 16;
  const std::uint32_t count = (24 + 4800 + data - 1) / data;
  ASSERT_EQ(count, 4u);
  Bytes stream;
  for (std::uint32_t i = 0; i < count; ++i) {
    Bytes buf(2000);
    auto n = sock.recv(buf, 1s);
    ASSERT_TRUE(n);
    ASSERT_LE(*n, 1400u);
    ByteReader r(ByteSpan(buf.data(), *n));
    EXPECT_EQ(r.u64(), 77u);
    EXPECT_EQ(r.u32(), i);
    EXPECT_EQ(r.u32(), count);
    auto body = r.raw(r.remaining());
    stream.insert(stream.end(), body.begin(), body.end());
  }
  ByteReader d(stream);
  EXPECT_EQ(d.u32(), 40u);
  EXPECT_EQ(d.u32(), 30u);
  EXPECT_EQ(d.u64(), 123456u);
  EXPECT_EQ(d.u32(), copy.crc);
  EXPECT_EQ(d.u32(), 4800u);
  auto payload = d.raw(d.remaining());
  EXPECT_EQ(Bytes(payload.begin(), payload.end()), copy.payload);
}

// Chunks arriving shuffled and duplicated still make exactly one frame.
TEST(Datagram, ReassemblesReorderedAndDuplicatedChunks) {
  std::uint16_t port = 0;
  auto rx = make_datagram_receiver({"127.0.0.1", 0}, port);
  auto f = synthetic_frame(100, 50, 5, 42);
  Bytes stream;
  ByteWriter w(stream);
  w.u32(100);
  w.u32(50);
  w.u64(42);
  w.u32(f.crc);
  w.u32(static_cast<std::uint32_t>(f.payload.size()));
  w.raw(f.payload);
  const std::size_t data = 1384;
  const auto count = static_cast<std::uint32_t>((stream.size() + data - 1) / data);
  std::vector<Bytes> dgrams;
  for (std::uint32_t i = 0; i < count; ++i) {
    Bytes d;
    ByteWriter dw(d);
    dw.u64(5);
    dw.u32(i);
    dw.u32(count);
    dw.raw(ByteSpan(stream.data() + i * data, std::min(data, stream.size() - i * data)));
    dgrams.push_back(d);
  }
  dgrams.push_back(dgrams[1]);
  std::shuffle(dgrams.begin(), dgrams.end(), std::mt19937(8));
  auto out = net::UdpSocket::open();
  for (const auto& d : dgrams) out.send_to(net::Endpoint{"127.0.0.1", port}, d);
  for (const auto& d : dgrams) out.send_to(net::Endpoint{"127.0.0.1", port}, d);  // late replay
  auto got = rx->recv(1s);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->payload, f.payload);
  EXPECT_FALSE(rx->recv(50ms));
  EXPECT_EQ(rx->stats().frames_received, 1u);
}

TEST(Datagram, LostChunkFailsOnlyThatFrame) {
  DatagramOptions o;
  o.drop = [](std::uint64_t seq, std::uint32_t chunk) { return seq == 1 && chunk == 3; };
  auto [tx, rx] = make_datagram_loopback(o);
  for (std::uint64_t i = 0; i < 3; ++i) tx->send(synthetic_frame(64, 64, i));
  auto f0 = rx->recv(1s);
  ASSERT_TRUE(f0);
  EXPECT_EQ(f0->seq, 0u);
  EXPECT_EQ(error_of([&] { rx->recv(1s); }), Errc::FrameIncomplete);
  auto f2 = rx->recv(1s);
  ASSERT_TRUE(f2);
  EXPECT_EQ(f2->seq, 2u);
  EXPECT_TRUE(f2->intact());
  EXPECT_EQ(tx->stats().chunks_dropped, 1u);
  EXPECT_EQ(rx->stats().incomplete, 1u);

  // A lost tail chunk is noticed by silence rather than by a newer frame.
  DatagramOptions tail;
  tail.drop = [](std::uint64_t, std::uint32_t chunk) { return chunk == 2; };
  tail.reassembly_timeout = 50ms;
  auto [tx2, rx2] = make_datagram_loopback(tail);
  tx2->send(synthetic_frame(64, 64, 0));
  EXPECT_EQ(error_of([&, &rx2 = rx2] { rx2->recv(1s); }), Errc::FrameIncomplete);
}

TEST(Datagram, CorruptPayloadIsNeverDelivered) {
  auto [tx, rx] = make_datagram_loopback();
  auto bad = synthetic_frame(64, 64, 0);
  bad.crc ^= 1;
  tx->send(std::move(bad));
  tx->send(synthetic_frame(64, 64, 1));
  auto got = rx->recv(1s);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->seq, 1u);
  EXPECT_EQ(rx->stats().corrupt, 1u);
  tx->close();
  EXPECT_EQ(error_of([&, &rx = rx] { rx->recv(1s); }), Errc::TransportClosed);
  EXPECT_EQ(error_of([&, &tx = tx] { tx->send(synthetic_frame(8, 8, 2)); }), Errc::TransportClosed);
}

TEST(Datagram, LargeFrameUnderFlowControl) {
  auto [tx, rx] = make_datagram_loopback();
  const auto want = synthetic_frame(1920, 1080, 9);
  std::jthread producer([&, &tx = tx] { tx->send(Frame(want)); });
  auto got = rx->recv(5s);
  ASSERT_TRUE(got);
  EXPECT_EQ(got->crc, want.crc);
  EXPECT_EQ(got->payload, want.payload);
}

TEST(Datagram, RejectsBadOptions) {
  DatagramOptions o;
  o.max_datagram = 16;
  EXPECT_EQ(error_of([&] { make_datagram_loopback(o); }), Errc::InvalidArgument);
}

// ---- renderer ---------------------------------------------------------------

struct Px {
  std::uint8_t r, g, b, a;
  friend bool operator==(const Px&, const Px&) = default;
};

Px pixel(const Frame& f, std::uint32_t x, std::uint32_t y) {
  const auto* p = f.payload.data() + (std::size_t{y} * f.width + x) * 4;
  return {p[0], p[1], p[2], p[3]};
}

const AssetId kM1 = AssetId::parse("acme.bo.a1.c1.m1");
const AssetId kM2 = AssetId::parse("acme.bo.a1.c1.m2");

TEST(Renderer, EmptyOverlayIsPassthrough) {
  auto base = synthetic_frame(320, 240, 3, 17);
  auto out = render_frame(base, {}, {});
  EXPECT_EQ(out.payload, base.payload);
  EXPECT_EQ(out.crc, base.crc);
  EXPECT_EQ(out.seq, 3u);
  EXPECT_EQ(out.capture_ns, 17u);
}

TEST(Renderer, SparklineAndLatestBlockPixels) {
  auto base = synthetic_frame(200, 120, 1, 5);
  SeriesRef temp{kM1, "t", twin::Resolution::R1s}, vib{kM1, "v", twin::Resolution::R10s};
  OverlaySpec spec{{temp, vib}, {{kM1, {10, 20}}}};
  TwinView view;
  for (int i = 0; i < 100; ++i) view.series[temp].push_back(i);  // only the last 64 are drawn
  view.series[vib] = {5, 5, 5};
  view.latest[kM1]["t"] = {99.0 - 63.0 / 2, 1};  // halfway through the drawn window
  view.latest[kM1]["v"] = {5.0, 1};
  auto out = render_frame(base, spec, view);
  EXPECT_TRUE(out.intact());
  EXPECT_EQ(out.seq, 1u);
  EXPECT_EQ(out.capture_ns, 5u);

  const Px bg{24, 24, 24, 255}, col{0, 200, 255, 255};
  // Column i has height 1 + round(31 * i / 63), drawn bottom-up inside the 32 rows.
  for (std::uint32_t i = 0; i < 64; ++i) {
    const std::uint32_t h = 1 + static_cast<std::uint32_t>(std::lround(31.0 * i / 63.0));
    for (std::uint32_t k = 0; k < 32; ++k) {
      const Px want = k < h ? col : bg;
      ASSERT_EQ(pixel(out, 10 + i, 20 + 31 - k), want) << i << "," << k;
    }
  }
  // Latest block: R = round(255 * 0.5) = 128.
  EXPECT_EQ(pixel(out, 10 + 66, 20), (Px{128, 0, 0, 255}));
  EXPECT_EQ(pixel(out, 10 + 66 + 7, 20 + 7), (Px{128, 0, 0, 255}));
  EXPECT_EQ(pixel(out, 10 + 66 + 8, 20 + 8), pixel(base, 10 + 66 + 8, 20 + 8));
  // Second series stacked 34 px lower: three constant values, flat at 16, right-aligned.
  for (std::uint32_t i = 61; i < 64; ++i) {
    EXPECT_EQ(pixel(out, 10 + i, 54 + 31 - 15), col);
    EXPECT_EQ(pixel(out, 10 + i, 54 + 31 - 16), bg);
  }
  EXPECT_EQ(pixel(out, 10, 54 + 31), bg);
  EXPECT_EQ(pixel(out, 10 + 66, 54), (Px{128, 0, 0, 255}));
  // The gap row between the two blocks keeps the base image.
  EXPECT_EQ(pixel(out, 10, 52), pixel(base, 10, 52));
  EXPECT_EQ(pixel(out, 9, 20), pixel(base, 9, 20));
}

TEST(Renderer, DeterministicAndClipped) {
  auto base = synthetic_frame(100, 40, 2);
  SeriesRef s{kM2, "t", twin::Resolution::R1s};
  OverlaySpec spec{{s}, {{kM2, {90, 30}}}};
  TwinView view;
  view.series[s] = {3, 1, 4, 1, 5, 9, 2, 6};
  view.latest[kM2]["t"] = {100.0, 1};
  auto a = render_frame(base, spec, view), b = render_frame(base, spec, view);
  EXPECT_EQ(a.payload, b.payload);
  EXPECT_EQ(a.crc, b.crc);
  EXPECT_NE(a.crc, base.crc);
  EXPECT_EQ(pixel(a, 99, 39), (Px{24, 24, 24, 255}));  // clipped block still drawn where it fits
}

TEST(Renderer, Errors) {
  auto base = synthetic_frame(100, 40, 2);
  SeriesRef s{kM2, "t", twin::Resolution::R1s};
  TwinView view;
  view.series[s] = {1, 2};
  EXPECT_EQ(error_of([&] { render_frame(base, {{s}, {}}, view); }), Errc::AnchorOutOfBounds);
  EXPECT_EQ(error_of([&] { render_frame(base, {{s}, {{kM2, {100, 0}}}}, view); }), Errc::AnchorOutOfBounds);
  EXPECT_EQ(error_of([&] { render_frame(base, {{s}, {{kM2, {0, 40}}}}, view); }), Errc::AnchorOutOfBounds);
  EXPECT_EQ(error_of([&] { render_frame(base, {{s}, {{kM2, {0, 0}}}}, {}); }), Errc::MissingSeries);
  view.series[s] = {NAN};
  EXPECT_EQ(error_of([&] { render_frame(base, {{s}, {{kM2, {0, 0}}}}, view); }), Errc::MissingSeries);
}

TEST(Renderer, CapturesViewFromTwin) {
  auto meta = std::make_shared<twin::MetadataRepository>();
  meta->add_static({kM1, twin::default_topic(kM1), 1, 1});
  twin::TwinStore store(meta);
  const std::uint64_t s = 1'000'000'000;
  for (std::uint64_t i = 0; i < 30; ++i) store.ingest({kM1, 1, i * s, 0, 0, {{"t", double(i % 10)}}});
  SeriesRef r10{kM1, "t", twin::Resolution::R10s}, raw{kM1, "t", twin::Resolution::Raw};
  auto v = capture_view(store, {{r10, raw}, {{kM1, {0, 0}}}}, 0, 30 * s);
  EXPECT_EQ(v.series.at(r10), (std::vector<double>{4.5, 4.5, 4.5}));
  EXPECT_EQ(v.series.at(raw).size(), 30u);
  EXPECT_EQ(v.latest.at(kM1).at("t").value, otbus::FieldValue(9.0));
  EXPECT_EQ(error_of([&] { capture_view(store, {{{kM1, "nope", twin::Resolution::R1s}}, {}}, 0, s); }),
            Errc::MissingSeries);
}

// ---- state ------------------------------------------------------------------

TEST(State, LastWriterWins) {
  SceneState s;
  EXPECT_EQ(s.apply("k", {1}, 5, 1), ApplyResult::Applied);
  EXPECT_EQ(s.apply("k", {2}, 4, 2), ApplyResult::Stale);
  EXPECT_EQ(s.apply("k", {3}, 5, 1), ApplyResult::Stale);  // equal is stale
  EXPECT_EQ(s.apply("k", {4}, 5, 2), ApplyResult::Applied);  // actor breaks the tie
  EXPECT_EQ(s.get("k")->value, Bytes{4});
  EXPECT_EQ(s.apply("k", {5}, 5, 1), ApplyResult::Stale);
  EXPECT_FALSE(s.get("other"));
}

// Replicas fed the same updates in different orders end up equal, and equal
// to the per-key maximum by (seq, actor).
TEST(State, ShuffledDeliveryConverges) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    struct Update {
      std::string key;
      Bytes value;
      std::uint64_t seq;
      std::uint32_t actor;
    };
    std::vector<Update> ups;
    const int n = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      const std::uint32_t actor = static_cast<std::uint32_t>(rng() % 4);
      const std::uint64_t seq = rng() % 8;
      // (seq, actor) identifies an update, so its value is derived from it.
      ups.push_back({"k" + std::to_string(rng() % 5), {std::uint8_t(seq), std::uint8_t(actor)}, seq, actor});
    }
    SceneState a, b;
    auto order = ups;
    std::shuffle(order.begin(), order.end(), rng);
    for (const auto& u : order) a.apply(u.key, u.value, u.seq, u.actor);
    std::shuffle(order.begin(), order.end(), rng);
    for (const auto& u : order) b.apply(u.key, u.value, u.seq, u.actor);
    ASSERT_TRUE(a == b) << "trial " << trial;

    std::map<std::string, StateEntry> oracle;
    for (const auto& u : ups) {
      auto it = oracle.find(u.key);
      if (it == oracle.end() || std::pair(u.seq, u.actor) > std::pair(it->second.seq, it->second.actor))
        oracle[u.key] = {u.value, u.seq, u.actor};
    }
    ASSERT_EQ(a.snapshot(), oracle);
  }
}

// ---- bus ----------------------------------------------------------------------

TEST(Bus, FanOutAndClose) {
  InProcessBus bus;
  auto s1 = bus.subscribe("scene"), s2 = bus.subscribe("scene"), other = bus.subscribe("video");
  bus.publish("scene", {"", "changed", {1, 2}, 7});
  for (auto* s : {s1.get(), s2.get()}) {
    auto e = s->next(100ms);
    ASSERT_TRUE(e);
    EXPECT_EQ(e->type, "changed");
    EXPECT_EQ(e->channel, "scene");
    EXPECT_EQ(e->seq, 1u);
    EXPECT_EQ(e->payload, (Bytes{1, 2}));
  }
  EXPECT_FALSE(other->next(10ms));
  bus.publish("scene", {"", "last", {}, 7});
  bus.close("scene");
  EXPECT_EQ(s1->next(10ms)->type, "last");
  EXPECT_EQ(error_of([&] { s1->next(10ms); }), Errc::ChannelClosed);
  EXPECT_EQ(error_of([&] { bus.publish("scene", {}); }), Errc::ChannelClosed);
  EXPECT_EQ(error_of([&] { bus.subscribe("scene"); }), Errc::ChannelClosed);
}

TEST(Bus, PerPublisherFifoUnderConcurrency) {
  InProcessBus bus;
  auto sub = bus.subscribe("c");
  {
    std::vector<std::jthread> pubs;
    for (std::uint32_t p = 0; p < 4; ++p)
      pubs.emplace_back([&, p] {
        for (std::uint8_t i = 0; i < 250; ++i) bus.publish("c", {"", "n", {i}, p});
      });
  }
  std::map<std::uint32_t, int> next;
  std::uint64_t last_seq = 0;
  for (int i = 0; i < 1000; ++i) {
    auto e = sub->next(1s);
    ASSERT_TRUE(e);
    EXPECT_EQ(e->payload[0], next[e->publisher]++);
    EXPECT_EQ(e->seq, ++last_seq);
  }
  EXPECT_EQ(sub->dropped(), 0u);
}

TEST(Bus, SlowSubscriberDropsOldest) {
  InProcessBus bus(3);
  auto sub = bus.subscribe("c");
  for (std::uint8_t i = 0; i < 5; ++i) bus.publish("c", {"", "n", {i}});
  EXPECT_EQ(sub->next(10ms)->payload[0], 2);
  EXPECT_EQ(sub->dropped(), 2u);
}

TEST(Bus, RendererNotifiedOfStateChange) {
  InProcessBus bus;
  auto renderer = bus.subscribe("scene");
  StateManager mgr(&bus);
  EXPECT_EQ(mgr.apply("camera/pose", {9}, 1, 3), ApplyResult::Applied);
  EXPECT_EQ(mgr.apply("camera/pose", {8}, 0, 3), ApplyResult::Stale);
  auto e = renderer->next(100ms);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->type, "state");
  EXPECT_EQ(std::string(e->payload.begin(), e->payload.end()), "camera/pose");
  EXPECT_EQ(e->publisher, 3u);
  EXPECT_FALSE(renderer->next(20ms));  // stale updates stay silent
  EXPECT_EQ(mgr.state().get("camera/pose")->value, Bytes{9});
}

TEST(Bus, EventCodec) {
  BusEvent e{"scene", "state", {1, 2, 3}, 4, 5, 6};
  EXPECT_EQ(decode_bus_event(encode_bus_event(e)), e);
  auto buf = encode_bus_event(e);
  for (std::size_t cut = 0; cut < 20; ++cut)
    EXPECT_EQ(error_of([&] { decode_bus_event(ByteSpan(buf.data(), cut)); }), Errc::MalformedMessage);
}

TEST(Bus, LinkCarriesEventsBetweenBuses) {
  InProcessBus left, right;
  // Ports are only known after binding, so wire the second link to the first.
  auto probe = net::UdpSocket::bind({"127.0.0.1", 0});
  const auto right_port = probe.local_port();
  probe = net::UdpSocket::open();
  BusLink l(left, 1, {"127.0.0.1", 0}, {"127.0.0.1", right_port}, {"scene"});
  BusLink r(right, 2, {"127.0.0.1", right_port}, {"127.0.0.1", l.port()}, {"scene"});
  auto on_right = right.subscribe("scene");
  auto on_left = left.subscribe("scene");
  std::this_thread::sleep_for(20ms);
  for (std::uint8_t i = 0; i < 10; ++i) left.publish("scene", {"", "n", {i}, 9});
  for (std::uint8_t i = 0; i < 10; ++i) {
    auto e = on_right->next(1s);
    ASSERT_TRUE(e);
    EXPECT_EQ(e->payload[0], i);
    EXPECT_EQ(e->origin, 1u);
    EXPECT_EQ(e->publisher, 9u);
  }
  right.publish("scene", {"", "back", {}, 1});
  for (int i = 0; i < 10; ++i) on_left->next(10ms);  // the left side's own events
  auto back = on_left->next(1s);
  ASSERT_TRUE(back);
  EXPECT_EQ(back->type, "back");
  // Nothing echoes back and forth.
  std::this_thread::sleep_for(100ms);
  EXPECT_EQ(l.forwarded(), 10u);
  EXPECT_EQ(r.forwarded(), 1u);
}

// ---- fps bench -------------------------------------------------------------

TEST(FpsBench, ShortRunsDeliverIntactFrames) {
  auto zc = fps_bench(FramePreset::HD, TransportKind::LocalZeroCopy, 400ms);
  auto dg = fps_bench(FramePreset::HD, TransportKind::Datagram, 400ms);
  for (const auto& r : {zc, dg}) {
    EXPECT_GT(r.frames, 0u);
    EXPECT_EQ(r.receiver.corrupt, 0u);
    EXPECT_GT(r.latency.p50, 0u);
    EXPECT_LE(r.latency.p50, r.latency.p99);
    EXPECT_NEAR(r.fps, r.frames / r.seconds, 1e-9);
  }
  EXPECT_GT(zc.fps, dg.fps);
  EXPECT_EQ(error_of([] { fps_bench(FramePreset::HD, TransportKind::LocalZeroCopy, 0ms); }), Errc::InvalidArgument);
}

}  // namespace
}  // namespace smv::engine
