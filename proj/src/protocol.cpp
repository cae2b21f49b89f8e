// Copyright 2026 The enasfarm Authors.
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


#include "enasfarm/protocol.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

#include "enasfarm/errors.hpp"
#include "enasfarm/util.hpp"

namespace enasfarm {

Socket::~Socket() { reset(); }

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    reset();
    fd_ = std::exchange(o.fd_, -1);
  }
  return *this;
}

void Socket::reset() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

namespace {

void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw WorkerLostError(std::string("send: ") + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

/// false on EOF before the first byte.
bool read_all(int fd, char* data, std::size_t n, double timeout_s) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  std::size_t got = 0;
  while (got < n) {
    if (timeout_s > 0) {
      const auto left = std::chrono::duration<double>(deadline - std::chrono::steady_clock::now()).count();
      if (left <= 0) throw WorkerLostError("timed out waiting for worker");
      pollfd p{fd, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(left * 1000.0) + 1);
      if (r < 0 && errno == EINTR) continue;
      if (r < 0) throw WorkerLostError(std::string("poll: ") + std::strerror(errno));
      if (r == 0) continue;
    }
    const ssize_t r = ::recv(fd, data + got, n - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw WorkerLostError(std::string("recv: ") + std::strerror(errno));
    }
    if (r == 0) {
      if (got == 0) return false;
      throw WorkerLostError("connection closed mid-frame");
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

}  // namespace

void send_message(int fd, const nlohmann::json& message) {
  const std::string body = message.dump();
  if (body.size() > kMaxFrame) throw ProtocolError("frame too large");
  const std::uint32_t n = htonl(static_cast<std::uint32_t>(body.size()));
  std::string frame(reinterpret_cast<const char*>(&n), 4);
  frame += body;
  write_all(fd, frame.data(), frame.size());
}

std::optional<nlohmann::json> recv_message(int fd, double timeout_s) {
  std::uint32_t n = 0;
  if (!read_all(fd, reinterpret_cast<char*>(&n), 4, timeout_s)) return std::nullopt;
  n = ntohl(n);
  if (n > kMaxFrame) throw ProtocolError("frame of " + std::to_string(n) + " bytes exceeds limit");
  std::string body(n, '\0');
  if (n > 0 && !read_all(fd, body.data(), n, timeout_s)) throw WorkerLostError("connection closed mid-frame");
  try {
    auto j = nlohmann::json::parse(body);
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
      throw ProtocolError("message without a type");
    }
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("bad frame: ") + e.what());
  }
}

std::pair<std::string, int> parse_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0) throw ConfigError("expected host:port, got '" + address + "'");
  const auto port = parse_int(address.substr(colon + 1));
  if (!port || *port < 0 || *port > 65535) throw ConfigError("bad port in '" + address + "'");
  return {address.substr(0, colon), static_cast<int>(*port)};
}

int connect_tcp(const std::string& host, int port, double timeout_s) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || res == nullptr) {
    throw WorkerLostError("cannot resolve " + host);
  }
  Socket s(::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol));
  if (s.fd() < 0) {
    ::freeaddrinfo(res);
    throw WorkerLostError(std::string("socket: ") + std::strerror(errno));
  }
  const int flags = ::fcntl(s.fd(), F_GETFL);
  ::fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(s.fd(), res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0 && errno == EINPROGRESS) {
    pollfd p{s.fd(), POLLOUT, 0};
    rc = ::poll(&p, 1, timeout_s > 0 ? static_cast<int>(timeout_s * 1000.0) : -1);
    if (rc == 1) {
      int err = 0;
      socklen_t len = sizeof err;
      ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    } else {
      rc = -1;
      errno = ETIMEDOUT;
    }
  }
  if (rc != 0) {
    throw WorkerLostError("cannot connect to " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
  }
  ::fcntl(s.fd(), F_SETFL, flags);
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return s.release();
}

int listen_tcp(const std::string& host, int port, int* bound) {
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (s.fd() < 0) throw ConfigError(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (host.empty() || host == "0.0.0.0" || host == "*") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
  } else if (host == "localhost") {
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  } else if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw ConfigError("cannot listen on '" + host + "': expected an IPv4 address");
  }
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(s.fd(), 64) != 0) {
    throw ConfigError("cannot listen on " + host + ":" + std::to_string(port) + ": " + std::strerror(errno));
  }
  socklen_t len = sizeof addr;
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  if (bound) *bound = ntohs(addr.sin_port);
  return s.release();
}

}  // namespace enasfarm
