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

#include "smv/common/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace smv::net {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

bool poll_one(int fd, short events, std::chrono::milliseconds timeout) {
  pollfd p{fd, events, 0};
  for (;;) {
    int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) fail(Errc::SocketError, errno_text("poll"));
    return rc > 0;
  }
}

}  // namespace

Endpoint Endpoint::parse(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) fail(Errc::InvalidArgument, "endpoint needs host:port: " + std::string(text));
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  if (ep.host == "localhost" || ep.host.empty()) ep.host = "127.0.0.1";
  auto port_text = text.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 65535)
    fail(Errc::InvalidArgument, "bad port in endpoint: " + std::string(text));
  ep.port = static_cast<std::uint16_t>(port);
  in_addr probe{};
  if (::inet_pton(AF_INET, ep.host.c_str(), &probe) != 1)
    fail(Errc::InvalidArgument, "host must be an IPv4 literal: " + ep.host);
  return ep;
}

sockaddr_in Endpoint::to_sockaddr() const {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  ::inet_pton(AF_INET, host.c_str(), &sa.sin_addr);
  return sa;
}

std::string Endpoint::str() const { return host + ":" + std::to_string(port); }

void Fd::reset(int fd) noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = fd;
}

void Fd::shutdown() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

UdpSocket UdpSocket::open() {
  UdpSocket s;
  s.fd_.reset(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0));
  if (!s.fd_.valid()) fail(Errc::SocketError, errno_text("socket"));
  return s;
}

UdpSocket UdpSocket::bind(const Endpoint& ep) {
  UdpSocket s;
  s.fd_.reset(::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0));
  if (!s.fd_.valid()) fail(Errc::BindError, errno_text("socket"));
  int one = 1;
  ::setsockopt(s.fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  auto sa = ep.to_sockaddr();
  if (::bind(s.fd_.get(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0)
    fail(Errc::BindError, errno_text(("bind " + ep.str()).c_str()));
  return s;
}

void UdpSocket::send_to(const Endpoint& to, ByteSpan datagram) const { send_to(to.to_sockaddr(), datagram); }

void UdpSocket::send_to(const sockaddr_in& to, ByteSpan datagram) const {
  for (;;) {
    auto n = ::sendto(fd_.get(), datagram.data(), datagram.size(), 0, reinterpret_cast<const sockaddr*>(&to),
                      sizeof to);
    if (n >= 0) return;
    if (errno == EINTR) continue;
    // Loopback reports ECONNREFUSED for an earlier datagram that found no
    // listener. Pub/sub is fire-and-forget, so that is not a send failure.
    if (errno == ECONNREFUSED) continue;
    if (errno == ENOBUFS || errno == EAGAIN) {
      poll_one(fd_.get(), POLLOUT, std::chrono::milliseconds(10));
      continue;
    }
    fail(Errc::SocketError, errno_text("sendto"));
  }
}

std::optional<std::size_t> UdpSocket::recv(std::span<std::uint8_t> buf, std::chrono::milliseconds timeout,
                                           sockaddr_in* from) const {
  if (!poll_one(fd_.get(), POLLIN, timeout)) return std::nullopt;
  return try_recv(buf, from);
}

std::optional<std::size_t> UdpSocket::try_recv(std::span<std::uint8_t> buf, sockaddr_in* from) const {
  sockaddr_in src{};
  socklen_t len = sizeof src;
  for (;;) {
    auto n = ::recvfrom(fd_.get(), buf.data(), buf.size(), MSG_DONTWAIT, reinterpret_cast<sockaddr*>(&src), &len);
    if (n >= 0) {
      if (from) *from = src;
      return static_cast<std::size_t>(n);
    }
    if (errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK || errno == ECONNREFUSED) return std::nullopt;
    fail(Errc::SocketError, errno_text("recvfrom"));
  }
}

void UdpSocket::set_recv_buffer(int bytes) const {
  ::setsockopt(fd_.get(), SOL_SOCKET, SO_RCVBUF, &bytes, sizeof bytes);
}

void UdpSocket::set_send_buffer(int bytes) const {
  ::setsockopt(fd_.get(), SOL_SOCKET, SO_SNDBUF, &bytes, sizeof bytes);
}

std::uint16_t UdpSocket::local_port() const {
  sockaddr_in sa{};
  socklen_t len = sizeof sa;
  ::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&sa), &len);
  return ntohs(sa.sin_port);
}

TcpStream TcpStream::connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
  Fd fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!fd.valid()) fail(Errc::SocketError, errno_text("socket"));
  auto sa = ep.to_sockaddr();
  int flags = ::fcntl(fd.get(), F_GETFL, 0);
  ::fcntl(fd.get(), F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(fd.get(), reinterpret_cast<sockaddr*>(&sa), sizeof sa);
  if (rc != 0 && errno != EINPROGRESS) fail(Errc::SocketError, errno_text(("connect " + ep.str()).c_str()));
  if (rc != 0) {
    if (!poll_one(fd.get(), POLLOUT, timeout)) fail(Errc::SocketError, "connect timeout " + ep.str());
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) fail(Errc::SocketError, "connect " + ep.str() + ": " + std::strerror(err));
  }
  ::fcntl(fd.get(), F_SETFL, flags);
  TcpStream s(std::move(fd));
  s.set_nodelay();
  return s;
}

void TcpStream::write_all(ByteSpan data) {
  std::size_t off = 0;
  while (off < data.size()) {
    auto n = ::send(fd_.get(), data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(Errc::SocketError, errno_text("send"));
    }
    off += static_cast<std::size_t>(n);
  }
}

bool TcpStream::read_exact(std::span<std::uint8_t> buf) {
  std::size_t off = 0;
  while (off < buf.size()) {
    auto n = ::recv(fd_.get(), buf.data() + off, buf.size() - off, 0);
    if (n == 0) {
      if (off == 0) return false;
      fail(Errc::SocketError, "connection closed mid-frame");
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(Errc::SocketError, errno_text("recv"));
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

bool TcpStream::wait_readable(std::chrono::milliseconds timeout) const { return poll_one(fd_.get(), POLLIN, timeout); }

void TcpStream::set_nodelay() {
  int one = 1;
  ::setsockopt(fd_.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpListener TcpListener::listen(const Endpoint& ep, int backlog) {
  TcpListener l;
  l.fd_.reset(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!l.fd_.valid()) fail(Errc::BindError, errno_text("socket"));
  int one = 1;
  ::setsockopt(l.fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  auto sa = ep.to_sockaddr();
  if (::bind(l.fd_.get(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0)
    fail(Errc::BindError, errno_text(("bind " + ep.str()).c_str()));
  if (::listen(l.fd_.get(), backlog) != 0) fail(Errc::BindError, errno_text("listen"));
  return l;
}

std::optional<TcpStream> TcpListener::accept(std::chrono::milliseconds timeout) {
  if (!poll_one(fd_.get(), POLLIN, timeout)) return std::nullopt;
  int c = ::accept4(fd_.get(), nullptr, nullptr, SOCK_CLOEXEC);
  if (c < 0) return std::nullopt;
  TcpStream s{Fd(c)};
  s.set_nodelay();
  return s;
}

std::uint16_t TcpListener::local_port() const {
  sockaddr_in sa{};
  socklen_t len = sizeof sa;
  ::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&sa), &len);
  return ntohs(sa.sin_port);
}

}  // namespace smv::net
