#include "healsim/planner.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <map>

#include <nlohmann/json.hpp>

#include "healsim/analyzer.hpp"
#include "healsim/error.hpp"

namespace healsim {

namespace {

constexpr std::size_t kMaxFrameBytes = 1 << 20;

struct AddrInfoDeleter {
  void operator()(addrinfo* ai) const noexcept { freeaddrinfo(ai); }
};
using AddrInfoPtr = std::unique_ptr<addrinfo, AddrInfoDeleter>;

AddrInfoPtr resolve(const Endpoint& ep, bool passive, Errc on_error) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  auto port = std::to_string(ep.port);
  int rc = getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) {
    throw Error(on_error, "cannot resolve " + ep.host + ": " + gai_strerror(rc));
  }
  return AddrInfoPtr(res);
}

bool send_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    auto n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::string errno_text() { return std::strerror(errno); }

// Best effort: the id of a frame that parsed as JSON but failed validation.
std::uint64_t salvage_request_id(std::string_view frame) {
  auto j = nlohmann::json::parse(frame, nullptr, false);
  if (j.is_object()) {
    auto it = j.find("request_id");
    if (it != j.end() && it->is_number_unsigned()) return it->get<std::uint64_t>();
  }
  return 0;
}

}  // namespace

std::optional<Endpoint> parse_endpoint(std::string_view text) {
  constexpr std::string_view kScheme = "tcp://";
  if (text.starts_with(kScheme)) text.remove_prefix(kScheme.size());
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    return std::nullopt;
  }
  auto host = text.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  auto port_text = text.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port > 65535) {
    return std::nullopt;
  }
  return Endpoint{std::string(host), static_cast<std::uint16_t>(port)};
}

std::string handle_frame(const RuleSet& rules, std::string_view frame) {
  PlanRequest request;
  try {
    request = decode_request(frame);
  } catch (const Error& e) {
    return encode(PlanResponse{salvage_request_id(frame), RemoteFailure{"malformed", e.what()}});
  }
  PlanResponse response{request.request_id, NoMatch{}};
  if (auto plan = select_plan(rules, request.fact)) response.outcome = std::move(*plan);
  return encode(response);
}

PlanServer::PlanServer(RuleSet rules, const Endpoint& bind) : rules_(std::move(rules)) {
  auto addrs = resolve(bind, true, Errc::kIo);
  std::string last_error = "no usable address";
  for (auto* ai = addrs.get(); ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) {
      last_error = errno_text();
      continue;
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      listen_fd_ = fd;
      break;
    }
    last_error = errno_text();
    ::close(fd);
  }
  if (listen_fd_ < 0) {
    throw Error(Errc::kIo, "cannot bind " + bind.host + ":" + std::to_string(bind.port) + ": " +
                               last_error);
  }
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET) {
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  } else {
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
}

PlanServer::~PlanServer() { stop(); }

void PlanServer::start() {
  acceptor_ = std::thread([this] { run(); });
}

void PlanServer::run() {
  while (!stopping_) {
    int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;  // listener shut down
    }
    std::lock_guard lock(mu_);
    reap_finished_locked();
    if (stopping_) {
      ::close(fd);
      break;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    client_fds_.push_back(fd);
    auto id = next_worker_id_++;
    workers_.emplace(id, std::thread([this, fd, id] { serve_connection(fd, id); }));
  }
}

void PlanServer::reap_finished_locked() {
  for (auto id : finished_) {
    auto it = workers_.find(id);
    if (it != workers_.end()) {
      it->second.join();
      workers_.erase(it);
    }
  }
  finished_.clear();
}

void PlanServer::stop() {
  if (stopped_) return;
  stopped_ = true;
  stopping_ = true;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  std::map<std::uint64_t, std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& [id, w] : workers) w.join();
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

void PlanServer::interrupt() noexcept {
  stopping_.store(true);
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
}

void PlanServer::release_connection(int fd, std::uint64_t worker_id) {
  std::lock_guard lock(mu_);
  std::erase(client_fds_, fd);
  ::close(fd);
  finished_.push_back(worker_id);
}

void PlanServer::serve_connection(int fd, std::uint64_t worker_id) {
  struct Release {
    PlanServer* self;
    int fd;
    std::uint64_t id;
    ~Release() { self->release_connection(fd, id); }
  } release{this, fd, worker_id};

  std::string pending;
  char buf[4096];
  while (true) {
    auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    pending.append(buf, static_cast<std::size_t>(n));
    std::size_t start = 0;
    for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n', start)) {
      auto reply = handle_frame(rules_, std::string_view(pending).substr(start, nl - start + 1));
      if (!send_all(fd, reply)) return;
      start = nl + 1;
    }
    pending.erase(0, start);
    if (pending.size() > kMaxFrameBytes) {
      send_all(fd, encode(PlanResponse{0, RemoteFailure{"malformed", "frame too long"}}));
      return;
    }
  }
}

RemotePlanner::RemotePlanner(Endpoint endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

RemotePlanner::~RemotePlanner() { close(); }

RemotePlanner::RemotePlanner(RemotePlanner&& other) noexcept
    : endpoint_(std::move(other.endpoint_)),
      timeout_(other.timeout_),
      fd_(std::exchange(other.fd_, -1)),
      next_request_id_(other.next_request_id_),
      buffer_(std::move(other.buffer_)) {}

RemotePlanner& RemotePlanner::operator=(RemotePlanner&& other) noexcept {
  if (this != &other) {
    close();
    endpoint_ = std::move(other.endpoint_);
    timeout_ = other.timeout_;
    fd_ = std::exchange(other.fd_, -1);
    next_request_id_ = other.next_request_id_;
    buffer_ = std::move(other.buffer_);
  }
  return *this;
}

void RemotePlanner::close() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  buffer_.clear();
}

void RemotePlanner::connect() {
  auto addrs = resolve(endpoint_, false, Errc::kConnectionFailed);
  std::string last_error = "no usable address";
  for (auto* ai = addrs.get(); ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) {
      last_error = errno_text();
      continue;
    }
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      fd_ = fd;
      return;
    }
    last_error = errno_text();
    ::close(fd);
  }
  throw Error(Errc::kConnectionFailed, "cannot connect to planner at " + endpoint_.host + ":" +
                                           std::to_string(endpoint_.port) + ": " + last_error);
}

std::string RemotePlanner::read_line() {
  auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (true) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      auto line = buffer_.substr(0, nl + 1);
      buffer_.erase(0, nl + 1);
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      close();
      throw Error(Errc::kTimeout, "planner did not answer within " +
                                      std::to_string(timeout_.count()) + " ms");
    }
    pollfd pfd{fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) continue;
    char buf[4096];
    auto n = rc > 0 ? ::recv(fd_, buf, sizeof buf, 0) : -1;
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      close();
      throw Error(Errc::kConnectionFailed, "planner closed the connection");
    }
    buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

std::optional<RepairPlan> RemotePlanner::request(const Fact& fact) {
  if (fd_ < 0) connect();
  auto id = next_request_id_++;
  if (!send_all(fd_, encode(PlanRequest{id, fact}))) {
    close();
    throw Error(Errc::kConnectionFailed, "cannot send to planner: " + errno_text());
  }
  auto response = decode_response(read_line());
  if (response.request_id != id) {
    close();
    throw Error(Errc::kMalformedFrame, "planner answered request " +
                                           std::to_string(response.request_id) +
                                           ", expected " + std::to_string(id));
  }
  return std::visit(
      [](auto&& v) -> std::optional<RepairPlan> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RepairPlan>) {
          return std::move(v);
        } else if constexpr (std::is_same_v<T, NoMatch>) {
          return std::nullopt;
        } else {
          throw Error(Errc::kRemoteError, "planner error " + v.code + ": " + v.message);
        }
      },
      std::move(response.outcome));
}

PlannerHandle::PlannerHandle(std::variant<RuleSet, RemotePlanner> impl)
    : impl_(std::move(impl)) {}

PlannerHandle PlannerHandle::in_process(RuleSet rules) {
  return PlannerHandle(std::move(rules));
}

PlannerHandle PlannerHandle::remote(Endpoint endpoint, std::chrono::milliseconds timeout) {
  return PlannerHandle(RemotePlanner(std::move(endpoint), timeout));
}

std::string PlannerHandle::describe() const {
  if (const auto* r = std::get_if<RemotePlanner>(&impl_)) {
    return "tcp://" + r->endpoint().host + ":" + std::to_string(r->endpoint().port);
  }
  return "inproc";
}

std::optional<RepairPlan> PlannerHandle::request_plan(const Fact& fact) {
  if (auto* rules = std::get_if<RuleSet>(&impl_)) return select_plan(*rules, fact);
  return std::get<RemotePlanner>(impl_).request(fact);
}

std::optional<RepairPlan> request_plan(PlannerHandle& handle, const FailureReport& report,
                                       std::int64_t prior_failures_of_subject) {
  return handle.request_plan(make_fact(report, prior_failures_of_subject));
}

}  // namespace healsim
