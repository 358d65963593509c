#include "sledge/scorer.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <unordered_map>

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sledge/error.hpp"

namespace sledge {
namespace protocol {

std::string handshake() { return R"({"protocol":1})"; }

std::string encode_request(const ScoreRequest& request) {
  nlohmann::ordered_json j;
  j["id"] = request.id;
  j["query"] = request.query;
  j["passage"] = request.passage;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string encode_response(const ScoreResponse& response) {
  nlohmann::ordered_json j;
  j["id"] = response.id;
  j["score"] = response.score;
  return j.dump();
}

std::string encode_error(std::int64_t id, std::string_view message) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["error"] = message;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void check_handshake(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("protocol")) {
    throw ProtocolViolation("scorer did not send a handshake record, got: " + std::string(line.substr(0, 120)));
  }
  if (!j["protocol"].is_number_integer() || j["protocol"].get<int>() != kVersion) {
    throw ProtocolViolation("scorer speaks protocol " + j["protocol"].dump() + ", expected 1");
  }
}

ScoreResponse decode_response(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw MalformedResponse("scorer response is not a JSON object: " + std::string(line.substr(0, 120)));
  }
  if (!j.contains("id") || !j["id"].is_number_integer()) {
    throw MalformedResponse("scorer response without integer id: " + std::string(line.substr(0, 120)));
  }
  const auto id = j["id"].get<std::int64_t>();
  if (j.contains("error")) {
    throw ProtocolViolation(fmt::format("scorer reported an error for request {}: {}", id, j["error"].dump()));
  }
  if (!j.contains("score") || !j["score"].is_number()) {
    // nlohmann writes NaN/inf as null
    if (j.contains("score") && j["score"].is_null()) {
      throw ProtocolViolation(fmt::format("scorer returned a non-finite score for request {}", id));
    }
    throw MalformedResponse(fmt::format("scorer response for request {} has no numeric score", id));
  }
  return {id, j["score"].get<double>()};
}

ScoreRequest decode_request(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_number_integer() ||
      !j.contains("query") || !j["query"].is_string() || !j.contains("passage") || !j["passage"].is_string()) {
    throw FormatError("malformed score request: " + std::string(line.substr(0, 120)));
  }
  return {j["id"].get<std::int64_t>(), j["query"].get<std::string>(), j["passage"].get<std::string>()};
}

}  // namespace protocol

std::vector<double> score_batch(ScorerClient& client, std::span<const ScoreRequest> requests) {
  if (requests.empty()) return {};
  std::unordered_map<std::int64_t, std::size_t> slot;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!slot.emplace(requests[i].id, i).second) {
      throw ArgumentError(fmt::format("duplicate request id {} in batch", requests[i].id));
    }
  }
  auto responses = client.exchange(requests);
  std::vector<double> scores(requests.size(), 0.0);
  std::vector<char> answered(requests.size(), 0);
  for (const auto& r : responses) {
    auto it = slot.find(r.id);
    if (it == slot.end()) throw IdMismatch(fmt::format("scorer answered unknown request id {}", r.id));
    if (answered[it->second]) throw IdMismatch(fmt::format("scorer answered request id {} twice", r.id));
    if (!std::isfinite(r.score)) throw ProtocolViolation(fmt::format("scorer returned a non-finite score for request {}", r.id));
    answered[it->second] = 1;
    scores[it->second] = r.score;
  }
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!answered[i]) throw IdMismatch(fmt::format("scorer response is missing request id {}", requests[i].id));
  }
  return scores;
}

std::vector<ScoreResponse> EchoScorer::exchange(std::span<const ScoreRequest> requests) {
  std::vector<ScoreResponse> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back({r.id, kScore});
  return out;
}

std::vector<ScoreResponse> FunctionScorer::exchange(std::span<const ScoreRequest> requests) {
  std::vector<ScoreResponse> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back({r.id, fn_(r)});
  return out;
}

namespace {

// Full-duplex line channel over a pair of file descriptors.
class LineChannel {
 public:
  LineChannel() = default;
  LineChannel(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;
  ~LineChannel() { close(); }

  void close() {
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    read_fd_ = write_fd_ = -1;
    buffer_.clear();
  }

  void reset(int read_fd, int write_fd) {
    close();
    read_fd_ = read_fd;
    write_fd_ = write_fd;
  }

  // Writes `out` while collecting `want` complete lines. Gives up when no
  // progress happens for `timeout`.
  std::vector<std::string> transact(std::string_view out, std::size_t want, std::chrono::milliseconds timeout) {
    std::vector<std::string> lines;
    take_lines(lines, want);
    std::size_t written = 0;
    while (lines.size() < want || written < out.size()) {
      pollfd fds[2];
      nfds_t n = 0;
      fds[n++] = {read_fd_, POLLIN, 0};
      const bool writing = written < out.size();
      if (writing) fds[n++] = {write_fd_, POLLOUT, 0};
      int ready = ::poll(fds, n, static_cast<int>(timeout.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw ScorerTransportError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) {
        throw ScorerTimeout(fmt::format("scorer sent no data for {} ms ({} of {} responses received)",
                                        timeout.count(), lines.size(), want));
      }
      if (writing && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        ssize_t w = ::write(write_fd_, out.data() + written, out.size() - written);
        if (w < 0) {
          if (errno != EAGAIN && errno != EINTR) {
            throw ScorerTransportError(std::string("write to scorer failed: ") + std::strerror(errno));
          }
        } else {
          written += static_cast<std::size_t>(w);
        }
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        char chunk[65536];
        ssize_t r = ::read(read_fd_, chunk, sizeof chunk);
        if (r < 0) {
          if (errno != EAGAIN && errno != EINTR) {
            throw ScorerTransportError(std::string("read from scorer failed: ") + std::strerror(errno));
          }
        } else if (r == 0) {
          throw ScorerTransportError(
              fmt::format("scorer closed the connection ({} of {} responses received)", lines.size(), want));
        } else {
          buffer_.append(chunk, static_cast<std::size_t>(r));
          take_lines(lines, want);
        }
      }
    }
    return lines;
  }

 private:
  void take_lines(std::vector<std::string>& lines, std::size_t want) {
    std::size_t start = 0;
    while (lines.size() < want) {
      auto nl = buffer_.find('\n', start);
      if (nl == std::string::npos) break;
      std::string line = buffer_.substr(start, nl - start);
      start = nl + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      lines.push_back(std::move(line));
    }
    buffer_.erase(0, start);
  }

  int read_fd_ = -1;
  int write_fd_ = -1;
  std::string buffer_;
};

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

class StreamScorerClient : public ScorerClient {
 public:
  explicit StreamScorerClient(std::chrono::milliseconds timeout) : timeout_(timeout) {}

  std::vector<ScoreResponse> exchange(std::span<const ScoreRequest> requests) override {
    if (requests.empty()) return {};
    std::string out;
    for (const auto& r : requests) {
      out += protocol::encode_request(r);
      out += '\n';
    }
    auto lines = channel_.transact(out, requests.size(), timeout_);
    std::vector<ScoreResponse> responses;
    responses.reserve(lines.size());
    for (const auto& line : lines) responses.push_back(protocol::decode_response(line));
    return responses;
  }

  void reconnect() override {
    disconnect();
    connect();
    auto lines = channel_.transact({}, 1, timeout_);
    protocol::check_handshake(lines.front());
  }

 protected:
  virtual void connect() = 0;
  virtual void disconnect() { channel_.close(); }

  LineChannel channel_;
  std::chrono::milliseconds timeout_;
};

class ProcessScorerClient final : public StreamScorerClient {
 public:
  ProcessScorerClient(std::string command, std::chrono::milliseconds timeout)
      : StreamScorerClient(timeout), command_(std::move(command)) {}
  ~ProcessScorerClient() override { disconnect(); }

 protected:
  void connect() override {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw ScorerTransportError("pipe failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw ScorerTransportError("pipe failed");
    }
    pid_t pid = ::fork();
    if (pid < 0) throw ScorerTransportError("fork failed");
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    set_nonblocking(to_child[1]);
    set_nonblocking(from_child[0]);
    channel_.reset(from_child[0], to_child[1]);
    pid_ = pid;
  }

  void disconnect() override {
    channel_.close();
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) {
          pid_ = -1;
          return;
        }
        ::usleep(10000);
      }
      ::kill(pid_, SIGTERM);
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

 private:
  std::string command_;
  pid_t pid_ = -1;
};

class UnixSocketScorerClient final : public StreamScorerClient {
 public:
  UnixSocketScorerClient(std::string path, std::chrono::milliseconds timeout)
      : StreamScorerClient(timeout), path_(std::move(path)) {}

 protected:
  void connect() override {
    sockaddr_un addr{};
    if (path_.size() >= sizeof addr.sun_path) throw ArgumentError("unix socket path too long: " + path_);
    int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd < 0) throw ScorerTransportError("socket failed");
    addr.sun_family = AF_UNIX;
    std::memcpy(addr.sun_path, path_.c_str(), path_.size() + 1);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      int err = errno;
      ::close(fd);
      throw ScorerTransportError("cannot connect to scorer at " + path_ + ": " + std::strerror(err));
    }
    set_nonblocking(fd);
    channel_.reset(fd, fd);
  }

 private:
  std::string path_;
};

}  // namespace

std::unique_ptr<ScorerClient> connect_scorer(std::string_view endpoint, std::chrono::milliseconds timeout) {
  // Broken pipes surface as EPIPE write errors instead of killing the process.
  std::signal(SIGPIPE, SIG_IGN);
  std::unique_ptr<ScorerClient> client;
  if (endpoint == "echo") return std::make_unique<EchoScorer>();
  if (endpoint.starts_with("exec:")) {
    client = std::make_unique<ProcessScorerClient>(std::string(endpoint.substr(5)), timeout);
  } else if (endpoint.starts_with("unix:")) {
    client = std::make_unique<UnixSocketScorerClient>(std::string(endpoint.substr(5)), timeout);
  } else {
    throw ArgumentError("unknown scorer endpoint '" + std::string(endpoint) + "' (expected echo, exec:<cmd> or unix:<path>)");
  }
  client->reconnect();
  return client;
}

}  // namespace sledge
