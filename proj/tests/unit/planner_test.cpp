#include <gtest/gtest.h>

#include <future>
#include <thread>

#include "healsim/analyzer.hpp"
#include "healsim/error.hpp"
#include "healsim/planner.hpp"
#include "line_client.hpp"
#include "rule_oracle.hpp"
#include "test_support.hpp"

namespace healsim {
namespace {

using namespace testing;

const Endpoint kLoopback{"127.0.0.1", 0};

Fact make(FaultKind kind, std::string subject) {
  Fact f;
  f.kind = kind;
  f.subject = std::move(subject);
  return f;
}

Fact cf4_fact() { return make(FaultKind::kCF4, "Query Service->Reputation Service"); }

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kIo;
}

TEST(ParseEndpoint, Forms) {
  EXPECT_EQ(parse_endpoint("127.0.0.1:7464"), (Endpoint{"127.0.0.1", 7464}));
  EXPECT_EQ(parse_endpoint("tcp://localhost:0"), (Endpoint{"localhost", 0}));
  EXPECT_EQ(parse_endpoint("[::1]:80"), (Endpoint{"::1", 80}));
  EXPECT_FALSE(parse_endpoint("localhost"));
  EXPECT_FALSE(parse_endpoint(":80"));
  EXPECT_FALSE(parse_endpoint("host:"));
  EXPECT_FALSE(parse_endpoint("host:65536"));
  EXPECT_FALSE(parse_endpoint("host:8o"));
  EXPECT_FALSE(parse_endpoint("host:-1"));
}

TEST(HandleFrame, PlansAndErrors) {
  auto reply = decode_response(handle_frame(default_rules(), encode(PlanRequest{9, cf4_fact()})));
  EXPECT_EQ(reply, (PlanResponse{9, RepairPlan{Strategy::kAS3, cf4_fact().subject,
                                               "reconnect-on-cf4"}}));

  reply = decode_response(handle_frame(RuleSet{}, encode(PlanRequest{4, cf4_fact()})));
  EXPECT_EQ(reply, (PlanResponse{4, NoMatch{}}));

  reply = decode_response(handle_frame(default_rules(), "garbage\n"));
  EXPECT_EQ(reply.request_id, 0u);
  ASSERT_TRUE(std::holds_alternative<RemoteFailure>(reply.outcome));
  EXPECT_EQ(std::get<RemoteFailure>(reply.outcome).code, "malformed");

  // A frame whose id is readable keeps it in the error reply.
  reply = decode_response(handle_frame(
      default_rules(), "{\"request_id\":5,\"type\":\"plan_request\",\"version\":2}\n"));
  EXPECT_EQ(reply.request_id, 5u);
  EXPECT_TRUE(std::holds_alternative<RemoteFailure>(reply.outcome));
}

TEST(PlanServer, AnswersCf4WithAs3) {
  PlanServer server(default_rules(), kLoopback);
  ASSERT_NE(server.port(), 0);
  server.start();
  LineClient client(server.port());
  client.send(encode(PlanRequest{1, cf4_fact()}));
  auto reply = decode_response(client.read_line());
  EXPECT_EQ(reply.request_id, 1u);
  ASSERT_TRUE(std::holds_alternative<RepairPlan>(reply.outcome));
  EXPECT_EQ(std::get<RepairPlan>(reply.outcome).strategy, Strategy::kAS3);
  server.stop();
}

TEST(PlanServer, SurvivesGarbage) {
  PlanServer server(default_rules(), kLoopback);
  server.start();
  LineClient client(server.port());
  client.send("garbage\n");
  auto error = decode_response(client.read_line());
  EXPECT_EQ(error.request_id, 0u);
  ASSERT_TRUE(std::holds_alternative<RemoteFailure>(error.outcome));
  EXPECT_EQ(std::get<RemoteFailure>(error.outcome).code, "malformed");

  client.send("\xff\xfe\n");
  EXPECT_TRUE(std::holds_alternative<RemoteFailure>(decode_response(client.read_line()).outcome));

  client.send(encode(PlanRequest{2, cf4_fact()}));
  auto ok = decode_response(client.read_line());
  EXPECT_EQ(ok.request_id, 2u);
  EXPECT_TRUE(std::holds_alternative<RepairPlan>(ok.outcome));
}

TEST(PlanServer, PipelinedAndSplitFrames) {
  PlanServer server(default_rules(), kLoopback);
  server.start();
  LineClient client(server.port());
  auto a = encode(PlanRequest{1, make(FaultKind::kCF1, kQuery)});
  auto b = encode(PlanRequest{2, make(FaultKind::kCF3, kBid)});
  client.send(a + b.substr(0, 10));
  EXPECT_EQ(decode_response(client.read_line()).request_id, 1u);
  client.send(b.substr(10));
  auto reply = decode_response(client.read_line());
  EXPECT_EQ(reply.request_id, 2u);
  EXPECT_EQ(std::get<RepairPlan>(reply.outcome).strategy, Strategy::kAS2);
}

TEST(PlanServer, ConcurrentConnections) {
  PlanServer server(default_rules(), kLoopback);
  server.start();
  // Open both first so neither connection is served only after the other ends.
  LineClient first(server.port());
  LineClient second(server.port());
  second.send(encode(PlanRequest{1, make(FaultKind::kCF2, kBid)}));
  first.send(encode(PlanRequest{1, make(FaultKind::kCF1, kQuery)}));
  EXPECT_EQ(std::get<RepairPlan>(decode_response(first.read_line()).outcome).strategy,
            Strategy::kAS1);
  EXPECT_EQ(std::get<RepairPlan>(decode_response(second.read_line()).outcome).strategy,
            Strategy::kAS4);

  std::vector<std::future<bool>> clients;
  for (int c = 0; c < 8; ++c) {
    clients.push_back(std::async(std::launch::async, [&, c] {
      auto handle = PlannerHandle::remote(Endpoint{"127.0.0.1", server.port()});
      for (int i = 0; i < 50; ++i) {
        auto kind = kAllFaultKinds[(c + i) % 4];
        auto fact = make(kind, kind == FaultKind::kCF4 ? cf4_fact().subject : kBid);
        if (handle.request_plan(fact) != select_plan(default_rules(), fact)) return false;
      }
      return true;
    }));
  }
  for (auto& f : clients) EXPECT_TRUE(f.get());
}

TEST(PlanServer, StopClosesClientsAndRunReturns) {
  PlanServer server(default_rules(), kLoopback);
  auto runner = std::async(std::launch::async, [&] { server.run(); });
  LineClient client(server.port());
  client.send(encode(PlanRequest{1, cf4_fact()}));
  EXPECT_FALSE(client.read_line().empty());
  server.interrupt();
  server.stop();
  EXPECT_EQ(runner.wait_for(std::chrono::seconds(5)), std::future_status::ready);
  EXPECT_TRUE(client.read_line(500).empty());
  server.stop();
}

TEST(PlanServer, BindFailure) {
  PlanServer first(default_rules(), kLoopback);
  EXPECT_EQ(code_of([&] { PlanServer(default_rules(), Endpoint{"127.0.0.1", first.port()}); }),
            Errc::kIo);
}

TEST(RemotePlanner, MatchesInProcess) {
  PlanServer server(default_rules(), kLoopback);
  server.start();
  auto remote = PlannerHandle::remote(Endpoint{"127.0.0.1", server.port()});
  auto local = PlannerHandle::in_process(default_rules());
  EXPECT_EQ(remote.describe(), "tcp://127.0.0.1:" + std::to_string(server.port()));
  EXPECT_EQ(local.describe(), "inproc");
  EXPECT_TRUE(remote.is_remote());
  EXPECT_FALSE(local.is_remote());
  RuleGenerator gen(3);
  for (int i = 0; i < 200; ++i) {
    auto fact = gen.fact();
    EXPECT_EQ(remote.request_plan(fact), local.request_plan(fact));
  }
}

TEST(RemotePlanner, RandomRuleSetsMatchInProcess) {
  RuleGenerator gen(11);
  for (int s = 0; s < 10; ++s) {
    auto rules = parse_rules(render(gen.rules(5)));
    PlanServer server(rules, kLoopback);
    server.start();
    RemotePlanner remote(Endpoint{"127.0.0.1", server.port()});
    for (int i = 0; i < 30; ++i) {
      auto fact = gen.fact();
      EXPECT_EQ(remote.request(fact), select_plan(rules, fact));
    }
  }
}

TEST(RemotePlanner, NoMatchPropagates) {
  PlanServer server(RuleSet{}, kLoopback);
  server.start();
  RemotePlanner remote(Endpoint{"127.0.0.1", server.port()});
  EXPECT_EQ(remote.request(cf4_fact()), std::nullopt);
}

TEST(RemotePlanner, ConnectionFailed) {
  std::uint16_t port;
  {
    PlanServer server(default_rules(), kLoopback);
    port = server.port();
  }
  RemotePlanner remote(Endpoint{"127.0.0.1", port});
  EXPECT_EQ(code_of([&] { remote.request(cf4_fact()); }), Errc::kConnectionFailed);
  RemotePlanner bad_host(Endpoint{"host.invalid", 1});
  EXPECT_EQ(code_of([&] { bad_host.request(cf4_fact()); }), Errc::kConnectionFailed);
}

TEST(RemotePlanner, ServerGoneMidRun) {
  auto server = std::make_unique<PlanServer>(default_rules(), kLoopback);
  server->start();
  RemotePlanner remote(Endpoint{"127.0.0.1", server->port()});
  EXPECT_TRUE(remote.request(cf4_fact()));
  server.reset();
  EXPECT_EQ(code_of([&] { remote.request(cf4_fact()); }), Errc::kConnectionFailed);
}

// A listener that accepts but never answers.
TEST(RemotePlanner, Timeout) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  ASSERT_EQ(::listen(fd, 4), 0);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);

  RemotePlanner remote(Endpoint{"127.0.0.1", ntohs(addr.sin_port)},
                       std::chrono::milliseconds(100));
  auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { remote.request(cf4_fact()); }), Errc::kTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(2));
  ::close(fd);
}

TEST(RequestPlan, BuildsFactFromReport) {
  FailureReport report;
  report.report_id = 1;
  report.kind = FaultKind::kCF2;
  report.subject = SlotName(kBid);
  report.exception_count = 7;
  report.dependent_slots = {kPersistence};
  auto fact = make_fact(report, 2);
  EXPECT_EQ(fact.subject, kBid);
  EXPECT_EQ(fact.exception_count, 7);
  EXPECT_EQ(fact.dependent_count, 1);
  EXPECT_EQ(fact.prior_failures_of_subject, 2);

  auto handle = PlannerHandle::in_process(
      parse_rules("rule \"again\" when prior_failures_of_subject == 2 then AS2"));
  EXPECT_EQ(request_plan(handle, report, 2),
            (RepairPlan{Strategy::kAS2, kBid, "again"}));
  EXPECT_EQ(request_plan(handle, report, 1), std::nullopt);
}

}  // namespace
}  // namespace healsim
