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

#include <poll.h>
#include <sys/socket.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "smv/common/error.hpp"
#include "smv/engine/transport.hpp"

namespace smv::engine {

namespace {

constexpr std::size_t kBatch = 64;

void put_header(std::uint8_t* out, std::uint64_t seq, std::uint32_t idx, std::uint32_t count) {
  Bytes b;
  ByteWriter w(b);
  w.u64(seq);
  w.u32(idx);
  w.u32(count);
  std::memcpy(out, b.data(), kChunkHeaderSize);
}

struct Header {
  std::uint64_t seq;
  std::uint32_t idx;
  std::uint32_t count;
};

Header get_header(const std::uint8_t* in) {
  ByteReader r(ByteSpan(in, kChunkHeaderSize));
  Header h;
  h.seq = r.u64();
  h.idx = r.u32();
  h.count = r.u32();
  return h;
}

void check_options(const DatagramOptions& o) {
  if (o.max_datagram < 64 || o.max_datagram > 65507)
    fail(Errc::InvalidArgument, "max_datagram must lie in [64, 65507]");
  if (o.window_chunks == 0 || o.ack_every == 0 || o.ack_every > o.window_chunks)
    fail(Errc::InvalidArgument, "need 0 < ack_every <= window_chunks");
}

class DatagramSender final : public FrameSender {
 public:
  DatagramSender(const net::Endpoint& dest, DatagramOptions opts)
      : opts_(std::move(opts)), sock_(net::UdpSocket::bind({"0.0.0.0", 0})), dest_(dest.to_sockaddr()) {
    check_options(opts_);
    sock_.set_send_buffer(opts_.socket_buffer_bytes);
  }

  ~DatagramSender() override { close(); }

  void send(Frame&& frame) override {
    std::lock_guard lk(mu_);
    if (closed_) fail(Errc::TransportClosed, "datagram sender closed");
    const std::size_t data = opts_.max_datagram - kChunkHeaderSize;
    const std::size_t stream = kFrameDescriptorSize + frame.payload.size();
    const auto count = static_cast<std::uint32_t>((stream + data - 1) / data);

    Bytes desc;
    ByteWriter w(desc);
    w.u32(frame.width);
    w.u32(frame.height);
    w.u64(frame.capture_ns);
    w.u32(frame.crc);
    w.u32(static_cast<std::uint32_t>(frame.payload.size()));

    bases_.emplace_back(frame.seq, global_sent_);
    while (bases_.size() > 256) bases_.pop_front();

    for (std::uint32_t i = 0; i < count; ++i) {
      wait_credit();
      ++global_sent_;
      if (opts_.drop && opts_.drop(frame.seq, i)) {
        ++stats_.chunks_dropped;
        continue;
      }
      const std::size_t slot = pending_;
      put_header(headers_[slot], frame.seq, i, count);
      auto& iov = iov_[slot];
      int n = 0;
      iov[n++] = {headers_[slot], kChunkHeaderSize};
      std::size_t from = std::size_t{i} * data, to = std::min(stream, from + data);
      if (i == 0) {
        iov[n++] = {desc.data(), kFrameDescriptorSize};
        from = kFrameDescriptorSize;
      }
      if (to > from) iov[n++] = {frame.payload.data() + (from - kFrameDescriptorSize), to - from};
      auto& m = msgs_[slot];
      std::memset(&m, 0, sizeof m);
      m.msg_hdr.msg_name = &dest_;
      m.msg_hdr.msg_namelen = sizeof dest_;
      m.msg_hdr.msg_iov = iov;
      m.msg_hdr.msg_iovlen = static_cast<std::size_t>(n);
      if (++pending_ == kBatch) flush();
    }
    flush();
    ++stats_.frames_sent;
    stats_.chunks_sent += count;
    done_.push_back(std::move(frame));
    while (done_.size() > 4) done_.pop_front();
  }

  std::optional<Frame> reclaim() override {
    std::lock_guard lk(mu_);
    if (done_.empty()) return std::nullopt;
    Frame f = std::move(done_.front());
    done_.pop_front();
    return f;
  }

  void close() override {
    std::lock_guard lk(mu_);
    if (closed_) return;
    closed_ = true;
    std::uint8_t end[kChunkHeaderSize];
    put_header(end, 0, 0, 0);
    for (int i = 0; i < 3; ++i) {
      try {
        sock_.send_to(dest_, ByteSpan(end, sizeof end));
      } catch (const Error&) {
      }
    }
  }

  TransportStats stats() const override {
    std::lock_guard lk(mu_);
    return stats_;
  }

 private:
  void flush() {
    std::size_t done = 0;
    while (done < pending_) {
      const int r = ::sendmmsg(sock_.fd(), msgs_ + done, static_cast<unsigned>(pending_ - done), 0);
      if (r > 0) {
        done += static_cast<std::size_t>(r);
      } else if (errno == EAGAIN || errno == ENOBUFS || errno == EINTR) {
        std::this_thread::yield();
      } else {
        pending_ = 0;
        fail(Errc::TransportClosed, std::string("sendmmsg: ") + std::strerror(errno));
      }
    }
    pending_ = 0;
  }

  void take_ack(const std::uint8_t* buf, std::size_t n) {
    if (n != kChunkHeaderSize) return;
    const Header h = get_header(buf);
    for (auto it = bases_.rbegin(); it != bases_.rend(); ++it)
      if (it->first == h.seq) {
        acked_ = std::max(acked_, it->second + h.idx + 1);
        return;
      }
  }

  void wait_credit() {
    std::uint8_t buf[64];
    if (global_sent_ - acked_ >= opts_.window_chunks / 2)
      while (auto n = sock_.try_recv(buf)) take_ack(buf, *n);
    if (global_sent_ - acked_ < opts_.window_chunks) return;
    flush();
    while (global_sent_ - acked_ >= opts_.window_chunks) {
      auto n = sock_.recv(buf, opts_.credit_timeout);
      if (!n) {
        // Acks lost or receiver gone: resynchronise rather than stall forever.
        ++stats_.credit_timeouts;
        acked_ = global_sent_;
        return;
      }
      take_ack(buf, *n);
    }
  }

  DatagramOptions opts_;
  net::UdpSocket sock_;
  sockaddr_in dest_;
  mutable std::mutex mu_;
  bool closed_ = false;
  TransportStats stats_;
  std::uint64_t global_sent_ = 0, acked_ = 0;
  std::deque<std::pair<std::uint64_t, std::uint64_t>> bases_;
  std::deque<Frame> done_;

  mmsghdr msgs_[kBatch];
  iovec iov_[kBatch][3];
  std::uint8_t headers_[kBatch][kChunkHeaderSize];
  std::size_t pending_ = 0;
};

class DatagramReceiver final : public FrameReceiver {
 public:
  DatagramReceiver(const net::Endpoint& local, DatagramOptions opts)
      : opts_(std::move(opts)), sock_(net::UdpSocket::bind(local)) {
    check_options(opts_);
    sock_.set_recv_buffer(opts_.socket_buffer_bytes);
    data_ = opts_.max_datagram - kChunkHeaderSize;
    bufs_.resize(kBatch * opts_.max_datagram);
  }

  ~DatagramReceiver() override { close(); }

  std::uint16_t port() const { return sock_.local_port(); }

  std::optional<Frame> recv(std::chrono::milliseconds timeout) override {
    std::lock_guard lk(mu_);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (pending_incomplete_ > 0) {
        --pending_incomplete_;
        fail(Errc::FrameIncomplete, "frame " + std::to_string(incomplete_seq_) + " lost chunks");
      }
      if (closed_) fail(Errc::TransportClosed, "datagram receiver closed");
      if (remote_closed_ && !active_) fail(Errc::TransportClosed, "sender closed the stream");

      while (next_ < filled_) {
        const std::size_t i = next_++;
        if (auto f = process(bufs_.data() + i * opts_.max_datagram, msgs_[i].msg_len, addrs_[i])) return f;
        if (pending_incomplete_ > 0) break;
      }
      if (next_ < filled_ || pending_incomplete_ > 0) continue;

      const auto now = std::chrono::steady_clock::now();
      if (active_ && now - last_chunk_ >= opts_.reassembly_timeout) {
        abandon();
        continue;
      }
      if (remote_closed_) {
        if (active_) abandon();
        continue;
      }
      if (now >= deadline) return std::nullopt;
      auto wait = deadline - now;
      if (active_) wait = std::min<std::chrono::steady_clock::duration>(wait, last_chunk_ + opts_.reassembly_timeout - now);
      pollfd pfd{sock_.fd(), POLLIN, 0};
      const int ms = static_cast<int>(std::chrono::ceil<std::chrono::milliseconds>(wait).count());
      if (::poll(&pfd, 1, ms) <= 0) continue;
      fill();
    }
  }

  void recycle(Frame&& frame) override {
    std::lock_guard lk(mu_);
    if (spare_.size() < 4) spare_.push_back(std::move(frame.payload));
  }

  void close() override { closed_ = true; }

  TransportStats stats() const override {
    std::lock_guard lk(stats_mu_);
    return stats_;
  }

 private:
  void bump(std::uint64_t TransportStats::*field) {
    std::lock_guard lk(stats_mu_);
    ++(stats_.*field);
  }

  void fill() {
    for (std::size_t i = 0; i < kBatch; ++i) {
      iov_[i] = {bufs_.data() + i * opts_.max_datagram, opts_.max_datagram};
      std::memset(&msgs_[i], 0, sizeof msgs_[i]);
      msgs_[i].msg_hdr.msg_iov = &iov_[i];
      msgs_[i].msg_hdr.msg_iovlen = 1;
      msgs_[i].msg_hdr.msg_name = &addrs_[i];
      msgs_[i].msg_hdr.msg_namelen = sizeof addrs_[i];
    }
    const int r = ::recvmmsg(sock_.fd(), msgs_, kBatch, MSG_DONTWAIT, nullptr);
    next_ = 0;
    filled_ = r > 0 ? static_cast<std::size_t>(r) : 0;
  }

  void abandon() {
    active_ = false;
    done_seq_ = cur_seq_;
    have_done_ = true;
    bump(&TransportStats::incomplete);
    ++pending_incomplete_;
    incomplete_seq_ = cur_seq_;
    spare_.push_back(std::move(buf_));
  }

  void ack(std::uint64_t seq, std::uint32_t idx) {
    std::uint8_t out[kChunkHeaderSize];
    put_header(out, seq, idx, 1);
    try {
      sock_.send_to(peer_, ByteSpan(out, sizeof out));
    } catch (const Error&) {
    }
    since_ack_ = 0;
  }

  std::optional<Frame> process(const std::uint8_t* d, std::size_t n, const sockaddr_in& from) {
    if (n < kChunkHeaderSize) return std::nullopt;
    const Header h = get_header(d);
    if (h.count == 0) {
      remote_closed_ = true;
      return std::nullopt;
    }
    if (have_done_ && h.seq <= done_seq_) return std::nullopt;
    if (active_ && h.seq < cur_seq_) return std::nullopt;
    if (active_ && h.seq > cur_seq_) abandon();
    if (h.idx >= h.count) return std::nullopt;
    if (!active_) {
      active_ = true;
      cur_seq_ = h.seq;
      cur_count_ = h.count;
      got_ = 0;
      seen_.assign(h.count, 0);
      if (!spare_.empty()) {
        buf_ = std::move(spare_.back());
        spare_.pop_back();
      } else {
        buf_.clear();
      }
      buf_.resize(std::size_t{h.count} * data_ - kFrameDescriptorSize);
    }
    if (h.count != cur_count_ || seen_[h.idx]) return std::nullopt;
    peer_ = from;
    last_chunk_ = std::chrono::steady_clock::now();

    const std::uint8_t* body = d + kChunkHeaderSize;
    std::size_t len = n - kChunkHeaderSize;
    if (h.idx == 0) {
      if (len < kFrameDescriptorSize) return std::nullopt;
      std::memcpy(desc_, body, kFrameDescriptorSize);
      std::memcpy(buf_.data(), body + kFrameDescriptorSize, len - kFrameDescriptorSize);
    } else {
      const std::size_t off = std::size_t{h.idx} * data_ - kFrameDescriptorSize;
      if (off + len > buf_.size()) return std::nullopt;
      std::memcpy(buf_.data() + off, body, len);
    }
    seen_[h.idx] = 1;
    ++got_;
    if (++since_ack_ >= opts_.ack_every) ack(h.seq, h.idx);
    if (got_ < cur_count_) return std::nullopt;

    ack(h.seq, h.idx);
    active_ = false;
    have_done_ = true;
    done_seq_ = cur_seq_;
    ByteReader r(ByteSpan(desc_, kFrameDescriptorSize));
    Frame f;
    f.width = r.u32();
    f.height = r.u32();
    f.capture_ns = r.u64();
    f.crc = r.u32();
    const std::uint32_t plen = r.u32();
    f.seq = cur_seq_;
    if (plen > buf_.size() || plen != Frame::payload_size(f.width, f.height)) {
      bump(&TransportStats::corrupt);
      return std::nullopt;
    }
    buf_.resize(plen);
    f.payload = std::move(buf_);
    if (!f.intact()) {
      bump(&TransportStats::corrupt);
      spare_.push_back(std::move(f.payload));
      return std::nullopt;
    }
    bump(&TransportStats::frames_received);
    return f;
  }

  DatagramOptions opts_;
  net::UdpSocket sock_;
  std::size_t data_ = 0;
  std::mutex mu_;
  mutable std::mutex stats_mu_;
  TransportStats stats_;
  std::atomic<bool> closed_{false};
  bool remote_closed_ = false;

  Bytes bufs_;
  mmsghdr msgs_[kBatch];
  iovec iov_[kBatch];
  sockaddr_in addrs_[kBatch];
  std::size_t next_ = 0, filled_ = 0;

  bool active_ = false, have_done_ = false;
  std::uint64_t cur_seq_ = 0, done_seq_ = 0, incomplete_seq_ = 0;
  std::uint32_t cur_count_ = 0, got_ = 0;
  std::vector<std::uint8_t> seen_;
  std::uint8_t desc_[kFrameDescriptorSize] = {};
  Bytes buf_;
  std::vector<Bytes> spare_;
  std::size_t pending_incomplete_ = 0, since_ack_ = 0;
  sockaddr_in peer_{};
  std::chrono::steady_clock::time_point last_chunk_;
};

}  // namespace

std::string_view to_string(TransportKind k) noexcept {
  return k == TransportKind::Datagram ? "datagram" : "zerocopy";
}

TransportKind transport_from_string(std::string_view s) {
  std::string low(s);
  std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
  if (low == "datagram" || low == "udp") return TransportKind::Datagram;
  if (low == "zerocopy" || low == "localzerocopy" || low == "zero-copy") return TransportKind::LocalZeroCopy;
  fail(Errc::InvalidArgument, "unknown transport '" + std::string(s) + "'");
}

std::unique_ptr<FrameSender> make_datagram_sender(const net::Endpoint& dest, DatagramOptions opts) {
  return std::make_unique<DatagramSender>(dest, std::move(opts));
}

std::unique_ptr<FrameReceiver> make_datagram_receiver(const net::Endpoint& local, std::uint16_t& port,
                                                      DatagramOptions opts) {
  auto r = std::make_unique<DatagramReceiver>(local, std::move(opts));
  port = r->port();
  return r;
}

TransportPair make_datagram_loopback(DatagramOptions opts) {
  std::uint16_t port = 0;
  auto rx = make_datagram_receiver({"127.0.0.1", 0}, port, opts);
  auto tx = make_datagram_sender({"127.0.0.1", port}, std::move(opts));
  return {std::move(tx), std::move(rx)};
}

TransportPair make_transport(TransportKind kind) {
  return kind == TransportKind::Datagram ? make_datagram_loopback() : make_local_zero_copy();
}

}  // namespace smv::engine
