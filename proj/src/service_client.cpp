// Copyright 2026 The Geolink Authors.
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

#include "geolink/service_client.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <fcntl.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "geolink/text.hpp"

namespace geolink {

class ServiceEmbeddingProvider::Connection {
 public:
  explicit Connection(const std::string& endpoint) {
    if (endpoint.starts_with("unix:")) {
      connect_unix(endpoint.substr(5));
    } else if (endpoint.starts_with("exec:")) {
      spawn(endpoint.substr(5));
    } else {
      throw InputError("unsupported embedding endpoint '" + endpoint +
                       "' (expected unix:<path> or exec:<command>)");
    }
  }

  ~Connection() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (pid_ > 0) {
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  std::mutex& mutex() { return mutex_; }

  // False on a broken connection.
  bool write_line(const std::string& line) {
    std::string data = line + "\n";
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
      ssize_t n = ::write(write_fd_, p, left);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    return true;
  }

  bool read_line(std::string& line) {
    while (true) {
      auto pos = buffer_.find('\n');
      if (pos != std::string::npos) {
        line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        return true;
      }
      char chunk[65536];
      ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return false;
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  void connect_unix(const std::string& path) {
    sockaddr_un addr{};
    if (path.size() >= sizeof(addr.sun_path)) {
      throw InputError("socket path too long: " + path);
    }
    int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw Error("socket(): " + std::string(std::strerror(errno)));
    addr.sun_family = AF_UNIX;
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      const int err = errno;
      ::close(fd);
      throw ProviderError("embedding service unreachable at " + path + ": " +
                              std::strerror(err),
                          "", 0);
    }
    read_fd_ = write_fd_ = fd;
  }

  void spawn(const std::string& command) {
    // Close-on-exec so later children do not hold our pipe ends open.
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw Error("pipe() failed");
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw Error("pipe() failed");
    }
    pid_t pid = ::fork();
    if (pid < 0) throw Error("fork() failed");
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    pid_ = pid;
  }

  int read_fd_ = -1;
  int write_fd_ = -1;
  pid_t pid_ = -1;
  std::string buffer_;
  std::mutex mutex_;
};

ServiceEmbeddingProvider::ServiceEmbeddingProvider(ServiceClientConfig config)
    : config_(std::move(config)), dimension_(config_.dimension) {
  if (config_.endpoint.empty()) {
    throw InputError(std::string("no embedding endpoint given and $") +
                     kEndpointEnvVar + " is unset");
  }
  if (config_.pool_size < 1 || config_.max_batch < 1) {
    throw InputError("service pool size and batch size must be positive");
  }
  // A dead service must surface as an error, not kill the process.
  std::signal(SIGPIPE, SIG_IGN);
  for (int i = 0; i < config_.pool_size; ++i) {
    pool_.push_back(std::make_unique<Connection>(config_.endpoint));
  }
  if (dimension_ == 0) {
    const std::string probe = "probe";
    std::lock_guard lock(pool_.front()->mutex());
    dimension_ = static_cast<int>(
        request(*pool_.front(), std::span(&probe, 1), 0).front().size());
  }
}

ServiceEmbeddingProvider::~ServiceEmbeddingProvider() = default;

std::vector<Embedding> ServiceEmbeddingProvider::request(
    Connection& conn, std::span<const std::string> texts,
    std::size_t offset) const {
  const auto id = next_id_.fetch_add(1);
  nlohmann::json req = {{"id", id}, {"texts", texts}};
  const std::string& first = texts.front();
  if (!conn.write_line(req.dump(-1, ' ', false,
                                nlohmann::json::error_handler_t::replace))) {
    throw ProviderError("embedding service connection closed", first, offset);
  }
  std::string line;
  if (!conn.read_line(line)) {
    throw ProviderError("embedding service closed connection without reply",
                        first, offset);
  }
  nlohmann::json resp;
  try {
    resp = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed service response: ") + e.what(),
                        first, offset);
  }
  if (!resp.is_object() || !resp.contains("id") || resp["id"] != id) {
    throw ProviderError("service response id does not match request", first,
                        offset);
  }
  if (resp.contains("error")) {
    throw ProviderError("embedding service error: " +
                            resp["error"].get<std::string>(),
                        first, offset);
  }
  const auto& vectors = resp.at("vectors");
  if (!vectors.is_array() || vectors.size() != texts.size()) {
    throw ProviderError("service returned wrong number of vectors", first,
                        offset);
  }
  const int dim = resp.value("dim", 0);
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& row = vectors[i];
    if (!row.is_array() || static_cast<int>(row.size()) != dim ||
        (dimension_ != 0 && dim != dimension_)) {
      throw ProviderError("service vector has unexpected dimension", texts[i],
                          offset + i);
    }
    Embedding v(dim);
    for (int k = 0; k < dim; ++k) v[k] = row[k].get<double>();
    if (!v.allFinite() || v.isZero(0.0)) {
      throw ProviderError("service returned a zero or non-finite vector",
                          texts[i], offset + i);
    }
    normalize_in_place(v);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Embedding> ServiceEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += config_.max_batch) {
    const auto count = std::min(config_.max_batch, texts.size() - start);
    Connection& conn =
        *pool_[next_conn_.fetch_add(1) % pool_.size()];
    std::lock_guard lock(conn.mutex());
    auto chunk = request(conn, texts.subspan(start, count), start);
    for (auto& v : chunk) out.push_back(std::move(v));
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest =
      colon == std::string::npos ? std::string() : spec.substr(colon + 1);

  if (kind == "hash") {
    long long dim = 256;
    long long seed = 0;
    if (!rest.empty()) {
      for (auto kv : split(rest, ',')) {
        auto eq = kv.find('=');
        if (eq == std::string_view::npos) {
          throw InputError("bad hash provider option '" + std::string(kv) + "'");
        }
        auto key = kv.substr(0, eq);
        auto value = kv.substr(eq + 1);
        if (key == "dim") {
          dim = parse_int(value);
        } else if (key == "seed") {
          seed = parse_int(value);
        } else {
          throw InputError("unknown hash provider option '" + std::string(key) + "'");
        }
      }
    }
    if (dim < 8 || dim > 1 << 20 || seed < 0) {
      throw InputError("hash provider needs 8 <= dim and seed >= 0");
    }
    return std::make_unique<HashingEmbedder>(static_cast<int>(dim),
                                             static_cast<std::uint64_t>(seed));
  }
  if (kind == "file") {
    std::ifstream in(rest);
    if (!in) throw InputError("cannot open vector store '" + rest + "'");
    return std::make_unique<VectorFileStore>(VectorFileStore::load(in));
  }
  if (kind == "service") {
    ServiceClientConfig config;
    config.endpoint = rest;
    if (config.endpoint.empty()) {
      if (const char* env = std::getenv(kEndpointEnvVar)) config.endpoint = env;
    }
    return std::make_unique<ServiceEmbeddingProvider>(std::move(config));
  }
  throw InputError("unknown provider spec '" + spec + "'");
}

}  // namespace geolink
