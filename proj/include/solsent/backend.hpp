#pragma once

// Line-delimited JSON bridge to out-of-process classifiers.
//
//   backend -> {"protocol":"solsent-clf/1","backend_id":"<name>"}   (once)
//   client  -> {"id":"<post_id>","text":"<normalized text>"}        (per item)
//   client  -> {"end_batch":true}
//   backend -> {"id":"<post_id>","p_positive":<float>}             (per item, any order)
//   backend -> {"end_batch":true}
//
// Any non-conforming line or a timeout fails the whole batch.

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "solsent/classify.hpp"
#include "solsent/error.hpp"

namespace solsent::classify {

inline constexpr std::string_view kProtocolTag = "solsent-clf/1";

/// A bidirectional byte stream read and written one line at a time.
class LineChannel {
 public:
  LineChannel(int read_fd, int write_fd) : rfd_(read_fd), wfd_(write_fd) {}
  LineChannel(const LineChannel&) = delete;
  LineChannel& operator=(const LineChannel&) = delete;
  virtual ~LineChannel() { close_fds(); }

  void write_line(const std::string& line) {
    std::string buf = line + "\n";
    std::size_t off = 0;
    while (off < buf.size()) {
      ssize_t n = do_write(buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("backend write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// Next line without its terminator, or nullopt on EOF. Throws on
  /// timeout.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      if (eof_) {
        if (buf_.empty()) return std::nullopt;
        std::string line = std::move(buf_);
        buf_.clear();
        return line;
      }
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw ProtocolError("backend timed out");
      pollfd p{rfd_, POLLIN, 0};
      int rc = ::poll(&p, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (rc == 0) throw ProtocolError("backend timed out");
      char chunk[4096];
      ssize_t n = ::read(rfd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw ProtocolError(std::string("backend read failed: ") + std::strerror(errno));
      }
      if (n == 0) eof_ = true;
      else buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  virtual ssize_t do_write(const char* p, std::size_t n) { return ::write(wfd_, p, n); }

  void close_fds() {
    if (rfd_ >= 0) ::close(rfd_);
    if (wfd_ >= 0 && wfd_ != rfd_) ::close(wfd_);
    rfd_ = wfd_ = -1;
  }

  int rfd_;
  int wfd_;

 private:
  std::string buf_;
  bool eof_ = false;
};

/// Child process speaking the protocol on its stdin/stdout. The command
/// runs under `/bin/sh -c`.
class ProcessChannel final : public LineChannel {
 public:
  static std::unique_ptr<ProcessChannel> spawn(const std::string& command) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0) throw ProtocolError("pipe() failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw ProtocolError("pipe() failed");
    }
    pid_t pid = ::fork();
    if (pid < 0) throw ProtocolError("fork() failed");
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
    ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
    return std::unique_ptr<ProcessChannel>(new ProcessChannel(from_child[0], to_child[1], pid));
  }

  ~ProcessChannel() override {
    close_fds();  // child sees EOF on stdin
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) return;
        ::usleep(10'000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }

 private:
  ProcessChannel(int r, int w, pid_t pid) : LineChannel(r, w), pid_(pid) {}
  pid_t pid_;
};

/// TCP connection to `host:port`.
class TcpChannel final : public LineChannel {
 public:
  static std::unique_ptr<TcpChannel> connect(const std::string& address) {
    auto colon = address.rfind(':');
    if (colon == std::string::npos) throw InputError("backend address must be host:port, got '" + address + "'");
    std::string host = address.substr(0, colon);
    std::string port = address.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0) {
      throw ProtocolError("cannot resolve backend address " + address);
    }
    int fd = -1;
    for (auto* ai = res; ai; ai = ai->ai_next) {
      fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw ProtocolError("cannot connect to backend at " + address);
    return std::unique_ptr<TcpChannel>(new TcpChannel(fd));
  }

 protected:
  ssize_t do_write(const char* p, std::size_t n) override { return ::send(wfd_, p, n, MSG_NOSIGNAL); }

 private:
  explicit TcpChannel(int fd) : LineChannel(fd, fd) {}
};

/// Classifier reached over the wire protocol. One batch in flight.
class ExternalBackend final : public Backend {
 public:
  explicit ExternalBackend(std::unique_ptr<LineChannel> channel,
                           std::chrono::milliseconds timeout = std::chrono::seconds(60))
      : channel_(std::move(channel)), timeout_(timeout) {
    auto line = channel_->read_line(timeout_);
    if (!line) throw ProtocolError("backend closed the stream before the handshake");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(*line);
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError("handshake is not JSON: " + *line);
    }
    if (!j.is_object() || !j.contains("protocol") || j["protocol"] != kProtocolTag) {
      throw ProtocolError("unexpected handshake: " + *line);
    }
    if (!j.contains("backend_id") || !j["backend_id"].is_string()) {
      throw ProtocolError("handshake lacks backend_id");
    }
    id_ = j["backend_id"].get<std::string>();
  }

  static std::unique_ptr<ExternalBackend> spawn(const std::string& command,
                                                std::chrono::milliseconds timeout = std::chrono::seconds(60)) {
    return std::make_unique<ExternalBackend>(ProcessChannel::spawn(command), timeout);
  }

  static std::unique_ptr<ExternalBackend> connect(const std::string& address,
                                                  std::chrono::milliseconds timeout = std::chrono::seconds(60)) {
    return std::make_unique<ExternalBackend>(TcpChannel::connect(address), timeout);
  }

  const std::string& id() const override { return id_; }

  /// Large inputs go out as several protocol batches so neither side's
  /// pipe buffer can fill while the other is blocked writing.
  std::vector<double> score(std::span<const textprep::NormalizedText> texts) override {
    std::vector<double> out;
    out.reserve(texts.size());
    for (std::size_t off = 0; off < texts.size(); off += kMaxBatch) {
      auto part = score_one_batch(texts.subspan(off, std::min(kMaxBatch, texts.size() - off)));
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }

  static constexpr std::size_t kMaxBatch = 256;

 private:
  std::vector<double> score_one_batch(std::span<const textprep::NormalizedText> texts) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (!pos.emplace(texts[i].source_id, i).second) {
        throw InputError("duplicate id in batch: " + texts[i].source_id);
      }
    }
    for (const auto& t : texts) {
      channel_->write_line(nlohmann::json{{"id", t.source_id}, {"text", t.value}}.dump());
    }
    channel_->write_line(R"({"end_batch":true})");

    std::vector<double> out(texts.size(), -1.0);
    std::vector<bool> seen(texts.size(), false);
    auto first_pending = [&]() -> std::string {
      for (std::size_t i = 0; i < texts.size(); ++i) {
        if (!seen[i]) return texts[i].source_id;
      }
      return {};
    };
    for (;;) {
      std::optional<std::string> line;
      try {
        line = channel_->read_line(timeout_);
      } catch (const ProtocolError& e) {
        throw ProtocolError(e.what(), first_pending());
      }
      if (!line) throw ProtocolError("backend closed the stream mid-batch", first_pending());
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(*line);
      } catch (const nlohmann::json::exception&) {
        throw ProtocolError("non-JSON response line: " + *line, first_pending());
      }
      if (!j.is_object()) throw ProtocolError("response is not an object: " + *line, first_pending());
      if (j.contains("end_batch")) {
        if (j["end_batch"] != true) throw ProtocolError("bad end_batch line: " + *line, first_pending());
        break;
      }
      if (!j.contains("id") || !j["id"].is_string() || !j.contains("p_positive") || !j["p_positive"].is_number()) {
        throw ProtocolError("malformed response line: " + *line, first_pending());
      }
      auto id = j["id"].get<std::string>();
      auto it = pos.find(id);
      if (it == pos.end()) throw ProtocolError("response for unknown id", id);
      if (seen[it->second]) throw ProtocolError("duplicate response", id);
      double p = j["p_positive"].get<double>();
      if (!(p >= 0.0 && p <= 1.0)) throw ProtocolError("p_positive outside [0,1]", id);
      seen[it->second] = true;
      out[it->second] = p;
    }
    auto missing = first_pending();
    if (!missing.empty()) throw ProtocolError("batch ended without a response", missing);
    return out;
  }

  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  std::string id_;
};

}  // namespace solsent::classify
