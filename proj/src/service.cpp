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

#include "soplab/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "soplab/error.hpp"
#include "soplab/verifier.hpp"

namespace soplab {
namespace {

using nlohmann::ordered_json;

std::string error_line(const std::string& id, const std::string& message) {
  ordered_json j;
  j["id"] = id;
  j["error"] = message;
  return j.dump();
}

const std::string& required_string(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw FormatError(std::string("field '") + key + "' must be a string");
  return it->get_ref<const std::string&>();
}

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

RewardService::RewardService(const MapRegistry& registry, bool use_cache,
                             std::size_t cache_capacity)
    : registry_(&registry) {
  if (use_cache) cache_ = std::make_unique<DistanceCache>(cache_capacity);
}

std::string RewardService::handle_line(std::string_view line) {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    return error_line("?", std::string("invalid JSON: ") + e.what());
  }
  if (!req.is_object()) return error_line("?", "request must be a JSON object");
  const auto id_it = req.find("id");
  if (id_it == req.end() || !id_it->is_string()) {
    return error_line("?", "request id must be a string");
  }
  const std::string id = id_it->get<std::string>();
  try {
    const GridMap* map = registry_->find(required_string(req, "map_id"));
    if (map == nullptr) {
      return error_line(id, "unknown map_id '" + req["map_id"].get<std::string>() + "'");
    }
    const std::string& start_tok = required_string(req, "start_token");
    const std::string& end_tok = required_string(req, "end_token");
    const auto start = map->node_from_token(start_tok);
    const auto end = map->node_from_token(end_tok);
    if (!start) return error_line(id, "start_token '" + start_tok + "' is not a node of " + map->map_id());
    if (!end) return error_line(id, "end_token '" + end_tok + "' is not a node of " + map->map_id());
    if (*start == *end) return error_line(id, "start_token equals end_token");

    const VerificationResult r = verify_completion(
        *map, PathQuery{map->map_id(), *start, *end}, required_string(req, "completion"),
        cache_.get());
    ordered_json resp;
    resp["id"] = id;
    resp["reward"] = r.reward;
    resp["class"] = to_string(r.outcome);
    resp["gen_len"] = r.generated_length ? ordered_json(*r.generated_length) : ordered_json(nullptr);
    resp["shortest_len"] = r.shortest_length ? ordered_json(*r.shortest_length) : ordered_json(nullptr);
    return resp.dump();
  } catch (const Error& e) {
    return error_line(id, e.what());
  }
}

void RewardService::serve_stream(std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << handle_line(line) << '\n' << std::flush;
  }
}

RewardServer::RewardServer(RewardService& service, std::string host, std::uint16_t port)
    : service_(&service), host_(std::move(host)), port_(port) {}

RewardServer::~RewardServer() { stop(); }

void RewardServer::start() {
  if (running_) return;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error("io", std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port_);
  if (::inet_pton(AF_INET, host_.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw ParameterError("host must be an IPv4 address: " + host_);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
      ::listen(listen_fd_, 64) < 0) {
    const std::string msg = std::strerror(errno);
    ::close(listen_fd_);
    throw Error("io", "cannot listen on " + host_ + ":" + std::to_string(port_) + ": " + msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void RewardServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;  // listener closed
    }
    std::lock_guard lock(mu_);
    if (!running_) {
      ::close(fd);
      break;
    }
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void RewardServer::serve_connection(int fd) {
  std::string buffer;
  char chunk[16384];
  bool open = true;
  while (open) {
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t begin = 0;
    std::string replies;
    for (std::size_t nl; (nl = buffer.find('\n', begin)) != std::string::npos; begin = nl + 1) {
      std::string_view line(buffer.data() + begin, nl - begin);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
      replies += service_->handle_line(line);
      replies += '\n';
    }
    buffer.erase(0, begin);
    if (buffer.size() > kMaxRequestBytes) {
      replies += error_line("?", "request line too long") + '\n';
      open = false;
    }
    if (!replies.empty() && !send_all(fd, replies)) break;
  }
  std::lock_guard lock(mu_);
  const auto it = std::find(open_fds_.begin(), open_fds_.end(), fd);
  if (it != open_fds_.end()) {
    open_fds_.erase(it);
    ::close(fd);
  }
}

void RewardServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  stopped_.notify_all();
}

void RewardServer::wait() {
  std::unique_lock lock(mu_);
  stopped_.wait(lock, [this] { return !running_; });
}

}  // namespace soplab
