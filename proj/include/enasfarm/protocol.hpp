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


#pragma once

#include <optional>
#include <string>
#include <utility>

#include "json.hpp"

namespace enasfarm {

/// Frames are a 4-byte big-endian length followed by that many bytes of JSON.
inline constexpr std::size_t kMaxFrame = 64u << 20;

/// Throws WorkerLostError on a broken stream.
void send_message(int fd, const nlohmann::json& message);
/// nullopt on a clean end of stream. Throws ProtocolError on a bad frame and
/// WorkerLostError on I/O errors or when `timeout_s` (if > 0) elapses.
std::optional<nlohmann::json> recv_message(int fd, double timeout_s = 0.0);

/// "host:port" -> (host, port). Throws ConfigError.
std::pair<std::string, int> parse_address(const std::string& address);

/// Throws WorkerLostError.
int connect_tcp(const std::string& host, int port, double timeout_s);
/// Listening socket; `port` 0 picks a free port, reported through `bound`.
int listen_tcp(const std::string& host, int port, int* bound);

/// Closes on scope exit.
class Socket {
 public:
  explicit Socket(int fd = -1) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int fd() const { return fd_; }
  void reset();
  /// Gives up ownership.
  int release() { return std::exchange(fd_, -1); }

 private:
  int fd_;
};

}  // namespace enasfarm
