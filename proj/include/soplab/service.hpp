// Copyright 2026 The soplab Authors
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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "soplab/pathfind.hpp"
#include "soplab/registry.hpp"

namespace soplab {

// Answers reward requests, one NDJSON object per line:
//   request  {"id", "map_id", "start_token", "end_token", "completion"}
//   response {"id", "reward", "class", "gen_len", "shortest_len"}
// A request that cannot be answered yields {"id", "error"} with id "?" when
// the id itself is unreadable. Safe to call from many threads.
class RewardService {
 public:
  explicit RewardService(const MapRegistry& registry, bool use_cache = true,
                         std::size_t cache_capacity = 4096);

  std::string handle_line(std::string_view line);

  // Stdio mode: one response per nonblank input line, flushed per line.
  void serve_stream(std::istream& in, std::ostream& out);

  const DistanceCache* cache() const noexcept { return cache_.get(); }

 private:
  const MapRegistry* registry_;
  std::unique_ptr<DistanceCache> cache_;
};

// TCP front end. Each connection gets its own thread; responses on a
// connection come back in request order.
class RewardServer {
 public:
  RewardServer(RewardService& service, std::string host = "127.0.0.1", std::uint16_t port = 0);
  ~RewardServer();
  RewardServer(const RewardServer&) = delete;
  RewardServer& operator=(const RewardServer&) = delete;

  void start();  // binds and listens; throws Error("io") on failure
  std::uint16_t port() const noexcept { return port_; }
  void stop();   // closes the listener and every open connection
  void wait();   // blocks until stop() has been called

 private:
  void accept_loop();
  void serve_connection(int fd);

  RewardService* service_;
  std::string host_;
  std::uint16_t port_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::condition_variable stopped_;
  std::vector<int> open_fds_;
  std::vector<std::thread> workers_;
};

inline constexpr std::size_t kMaxRequestBytes = 1 << 20;

}  // namespace soplab
