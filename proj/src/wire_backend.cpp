#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <deque>
#include <optional>
#include <thread>
#include <unordered_map>

#include "gapprobe/scoring.hpp"
#include "gapprobe/wire.hpp"

namespace gapprobe::scoring {

namespace {

Error unavailable(const std::string& what) { return Error(ErrorKind::BackendUnavailable, what); }

void ignore_sigpipe() {
  static const bool once = [] {
    struct sigaction sa {};
    sa.sa_handler = SIG_IGN;
    sigaction(SIGPIPE, &sa, nullptr);
    return true;
  }();
  (void)once;
}

void set_nonblocking(int fd) {
  const int flags = fcntl(fd, F_GETFL, 0);
  if (flags >= 0) fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

}  // namespace

WireBackend::WireBackend(int read_fd, int write_fd, int pid, std::string label,
                         WireOptions options)
    : read_fd_(read_fd),
      write_fd_(write_fd),
      pid_(pid),
      label_(std::move(label)),
      options_(options) {
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  set_nonblocking(read_fd_);
  if (write_fd_ != read_fd_) set_nonblocking(write_fd_);
}

std::unique_ptr<WireBackend> WireBackend::spawn(const std::string& command, WireOptions options) {
  ignore_sigpipe();
  int to_child[2];
  int from_child[2];
  if (pipe2(to_child, O_CLOEXEC) != 0) throw unavailable(std::strerror(errno));
  if (pipe2(from_child, O_CLOEXEC) != 0) {
    close(to_child[0]);
    close(to_child[1]);
    throw unavailable(std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) close(fd);
    throw unavailable(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);
  return std::unique_ptr<WireBackend>(
      new WireBackend(from_child[0], to_child[1], pid, "wire:" + command, options));
}

std::unique_ptr<WireBackend> WireBackend::connect(const std::string& host, int port,
                                                  WireOptions options) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw unavailable(host + ": " + gai_strerror(rc));
  }
  int fd = -1;
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    last_error = std::strerror(errno);
    close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) throw unavailable(host + ":" + service + ": " + last_error);
  return std::unique_ptr<WireBackend>(
      new WireBackend(fd, fd, -1, "wire:" + host + ":" + service, options));
}

WireBackend::~WireBackend() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) close(write_fd_);
  if (read_fd_ >= 0) close(read_fd_);
  if (pid_ > 0) {
    // The child sees EOF on stdin; give it a moment to exit on its own.
    for (int i = 0; i < 200; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    kill(pid_, SIGTERM);
    waitpid(pid_, nullptr, 0);
  }
}

std::vector<double> WireBackend::log_probs(std::span<const TokenId> ids) {
  return log_probs_batch({std::vector<TokenId>(ids.begin(), ids.end())}).front();
}

std::vector<std::vector<double>> WireBackend::log_probs_batch(
    const std::vector<std::vector<TokenId>>& batch) {
  if (broken_) throw unavailable(label_ + ": connection previously failed");
  std::vector<std::optional<std::vector<double>>> results(batch.size());
  std::unordered_map<std::string, std::size_t> in_flight;
  std::size_t next_to_send = 0;
  std::size_t done = 0;
  std::string outbox;
  const int timeout_ms = options_.timeout.count() > 0 ? static_cast<int>(options_.timeout.count()) : -1;

  auto fail = [this](Error e) {
    broken_ = true;
    return e;
  };

  while (done < batch.size()) {
    while (next_to_send < batch.size() && in_flight.size() < options_.max_in_flight) {
      const std::string id = "q" + std::to_string(next_id_++);
      outbox += wire::encode_request({id, batch[next_to_send]});
      outbox.push_back('\n');
      in_flight.emplace(id, next_to_send);
      ++next_to_send;
    }

    pollfd fds[2];
    nfds_t nfds = 0;
    fds[nfds++] = {read_fd_, POLLIN, 0};
    const bool want_write = !outbox.empty();
    int write_slot = -1;
    if (want_write) {
      if (write_fd_ == read_fd_) {
        fds[0].events |= POLLOUT;
        write_slot = 0;
      } else {
        write_slot = static_cast<int>(nfds);
        fds[nfds++] = {write_fd_, POLLOUT, 0};
      }
    }
    const int rc = poll(fds, nfds, timeout_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw fail(unavailable(std::string("poll: ") + std::strerror(errno)));
    }
    if (rc == 0) {
      throw fail(unavailable(label_ + ": timed out with " + std::to_string(in_flight.size()) +
                             " requests outstanding"));
    }

    if (write_slot >= 0 && (fds[write_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = write(write_fd_, outbox.data(), outbox.size());
      if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
        throw fail(unavailable(label_ + ": write failed: " + std::strerror(errno)));
      }
      if (n > 0) outbox.erase(0, static_cast<std::size_t>(n));
    }

    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      const ssize_t n = read(read_fd_, buf, sizeof buf);
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
        throw fail(unavailable(label_ + ": read failed: " + std::strerror(errno)));
      }
      if (n == 0) {
        throw fail(unavailable(label_ + ": stream closed with " +
                               std::to_string(batch.size() - done) + " requests unanswered"));
      }
      inbox_.append(buf, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = inbox_.find('\n')) != std::string::npos) {
        std::string line = inbox_.substr(0, nl);
        inbox_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        wire::ScoreResponse resp;
        try {
          resp = wire::decode_response(line);
        } catch (const Error& e) {
          throw fail(e);
        }
        auto it = in_flight.find(resp.request_id);
        if (it == in_flight.end()) {
          throw fail(Error(ErrorKind::ProtocolViolation,
                           "response for unknown request_id '" + resp.request_id + "'"));
        }
        const std::size_t index = it->second;
        in_flight.erase(it);
        if (resp.error) {
          throw fail(Error(ErrorKind::RemoteError, "request " + std::to_string(index) + ": " + *resp.error));
        }
        if (resp.log_probs.size() != batch[index].size()) {
          throw fail(Error(ErrorKind::ProtocolViolation,
                           "request " + std::to_string(index) + ": expected " +
                               std::to_string(batch[index].size()) + " log probs, got " +
                               std::to_string(resp.log_probs.size())));
        }
        results[index] = std::move(resp.log_probs);
        ++done;
      }
    }
  }

  std::vector<std::vector<double>> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace gapprobe::scoring
