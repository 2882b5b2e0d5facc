#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "healsim/protocol.hpp"
#include "healsim/rules.hpp"

namespace healsim {

struct FailureReport;

inline constexpr std::uint16_t kDefaultPlannerPort = 7464;
inline constexpr std::chrono::milliseconds kDefaultPlannerTimeout{1000};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPlannerPort;

  bool operator==(const Endpoint&) const = default;
};

/// "host:port" or "tcp://host:port"; nullopt when either part is missing or
/// the port is not in [0, 65535].
std::optional<Endpoint> parse_endpoint(std::string_view text);

/// Runs one frame through the rules. Malformed input yields an ERROR frame
/// with code "malformed" (request_id 0 if the id could not be read).
std::string handle_frame(const RuleSet& rules, std::string_view frame);

/// TCP planning service: one LF-terminated request per line, answered in
/// arrival order. Connections are independent and share the read-only rules.
class PlanServer {
 public:
  /// Binds and listens immediately; port 0 picks an ephemeral port. Throws
  /// Error(kIo) if the address cannot be bound.
  PlanServer(RuleSet rules, const Endpoint& bind);
  ~PlanServer();

  PlanServer(const PlanServer&) = delete;
  PlanServer& operator=(const PlanServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }

  /// Accept loop on a background thread.
  void start();
  /// Accept loop on the calling thread; returns after stop().
  void run();
  /// Closes the listener and every client connection, then joins workers.
  void stop();
  /// Makes run() return. Async-signal-safe; follow with stop().
  void interrupt() noexcept;

 private:
  void serve_connection(int fd, std::uint64_t worker_id);
  void release_connection(int fd, std::uint64_t worker_id);
  void reap_finished_locked();

  const RuleSet rules_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  bool stopped_ = false;
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<int> client_fds_;
  std::map<std::uint64_t, std::thread> workers_;
  std::vector<std::uint64_t> finished_;
  std::uint64_t next_worker_id_ = 0;
};

/// Client half of the protocol. Connects lazily and keeps the connection for
/// subsequent requests; one request in flight at a time.
class RemotePlanner {
 public:
  explicit RemotePlanner(Endpoint endpoint,
                         std::chrono::milliseconds timeout = kDefaultPlannerTimeout);
  ~RemotePlanner();

  RemotePlanner(RemotePlanner&& other) noexcept;
  RemotePlanner& operator=(RemotePlanner&& other) noexcept;
  RemotePlanner(const RemotePlanner&) = delete;
  RemotePlanner& operator=(const RemotePlanner&) = delete;

  /// nullopt means the service found no matching rule. Throws
  /// ConnectionFailed, Timeout, RemoteError or MalformedFrame.
  std::optional<RepairPlan> request(const Fact& fact);

  const Endpoint& endpoint() const noexcept { return endpoint_; }

 private:
  void connect();
  void close() noexcept;
  std::string read_line();

  Endpoint endpoint_;
  std::chrono::milliseconds timeout_;
  int fd_ = -1;
  std::uint64_t next_request_id_ = 1;
  std::string buffer_;
};

/// Either evaluates rules in process or forwards to a planning service. Both
/// modes give identical outcomes for identical rules and facts.
class PlannerHandle {
 public:
  static PlannerHandle in_process(RuleSet rules);
  static PlannerHandle remote(Endpoint endpoint,
                              std::chrono::milliseconds timeout = kDefaultPlannerTimeout);

  bool is_remote() const noexcept { return std::holds_alternative<RemotePlanner>(impl_); }
  /// "inproc" or "tcp://host:port".
  std::string describe() const;

  std::optional<RepairPlan> request_plan(const Fact& fact);

 private:
  explicit PlannerHandle(std::variant<RuleSet, RemotePlanner> impl);

  std::variant<RuleSet, RemotePlanner> impl_;
};

std::optional<RepairPlan> request_plan(PlannerHandle& handle, const FailureReport& report,
                                       std::int64_t prior_failures_of_subject);

}  // namespace healsim
