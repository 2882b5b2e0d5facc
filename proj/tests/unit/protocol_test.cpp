#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "healsim/error.hpp"
#include "healsim/protocol.hpp"
#include "message_gen.hpp"

namespace healsim {
namespace {

using namespace testing;

Fact cf4_fact() {
  Fact f;
  f.kind = FaultKind::kCF4;
  f.subject = "Query Service->Reputation Service";
  return f;
}

void expect_malformed(std::string_view frame) {
  try {
    decode(frame);
    ADD_FAILURE() << "decoded: " << frame;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMalformedFrame) << frame;
  }
}

TEST(Encode, RequestIsCanonical) {
  auto frame = encode(PlanRequest{1, cf4_fact()});
  EXPECT_EQ(frame,
            "{\"fact\":{\"dependent_count\":0,\"exception_count\":0,\"kind\":\"CF4\","
            "\"prior_failures_of_subject\":0,\"subject\":\"Query Service->Reputation "
            "Service\"},\"request_id\":1,\"type\":\"plan_request\",\"version\":1}\n");
  EXPECT_EQ(frame.rfind("{\"fact\":", 0), 0u);
  EXPECT_EQ(std::count(frame.begin(), frame.end(), '\n'), 1);
}

TEST(Encode, ResponseVariants) {
  EXPECT_EQ(encode(PlanResponse{7, RepairPlan{Strategy::kAS3, "A->B", "r"}}),
            "{\"outcome\":{\"plan\":{\"fired_rule\":\"r\",\"strategy\":\"AS3\",\"subject\":"
            "\"A->B\"}},\"request_id\":7,\"type\":\"plan_response\",\"version\":1}\n");
  EXPECT_EQ(encode(PlanResponse{2, NoMatch{}}),
            "{\"outcome\":{\"no_match\":true},\"request_id\":2,\"type\":\"plan_response\","
            "\"version\":1}\n");
  EXPECT_EQ(encode(PlanResponse{0, RemoteFailure{"malformed", "x"}}),
            "{\"outcome\":{\"error\":{\"code\":\"malformed\",\"message\":\"x\"}},\"request_id\":0,"
            "\"type\":\"plan_response\",\"version\":1}\n");
}

TEST(Encode, InvalidUtf8IsReplacedNotThrown) {
  auto frame = encode(PlanResponse{0, RemoteFailure{"malformed", "bad byte \xff"}});
  auto back = decode_response(frame);
  EXPECT_EQ(std::get<RemoteFailure>(back.outcome).message, "bad byte \xEF\xBF\xBD");
}

TEST(Decode, AcceptsWithAndWithoutNewline) {
  PlanRequest r{3, cf4_fact()};
  auto frame = encode(r);
  EXPECT_EQ(decode_request(frame), r);
  EXPECT_EQ(decode_request(frame.substr(0, frame.size() - 1)), r);
}

TEST(Decode, AcceptsReorderedKeysAndWhitespace) {
  auto frame =
      "{ \"version\": 1, \"type\": \"plan_response\", \"request_id\": 4,\n"
      "  \"outcome\": {\"no_match\": true} }";
  EXPECT_EQ(decode_response(frame), (PlanResponse{4, NoMatch{}}));
}

TEST(Decode, RejectsMalformed) {
  auto good = nlohmann::json::parse(encode(PlanRequest{1, cf4_fact()}));
  expect_malformed("not json\n");
  expect_malformed("");
  expect_malformed("\n");
  expect_malformed("[1,2]");
  expect_malformed("{\"subject\":\"\xff\"}");
  expect_malformed(encode(PlanRequest{1, cf4_fact()}) + "{}");

  auto mutate = [&](auto&& fn) {
    auto j = good;
    fn(j);
    expect_malformed(j.dump());
  };
  mutate([](auto& j) { j["version"] = 2; });
  mutate([](auto& j) { j["version"] = "1"; });
  mutate([](auto& j) { j.erase("version"); });
  mutate([](auto& j) { j["type"] = "plan"; });
  mutate([](auto& j) { j.erase("request_id"); });
  mutate([](auto& j) { j["request_id"] = -1; });
  mutate([](auto& j) { j["request_id"] = 1.5; });
  mutate([](auto& j) { j.erase("fact"); });
  mutate([](auto& j) { j["fact"]["kind"] = "CF9"; });
  mutate([](auto& j) { j["fact"]["exception_count"] = "3"; });
  mutate([](auto& j) { j["fact"].erase("subject"); });
  mutate([](auto& j) { j["fact"]["dependent_count"] = 18446744073709551615ull; });

  expect_malformed(
      "{\"outcome\":{},\"request_id\":1,\"type\":\"plan_response\",\"version\":1}");
  expect_malformed(
      "{\"outcome\":{\"no_match\":false},\"request_id\":1,\"type\":\"plan_response\","
      "\"version\":1}");
  expect_malformed(
      "{\"outcome\":{\"plan\":{\"fired_rule\":\"r\",\"strategy\":\"AS5\",\"subject\":\"s\"}},"
      "\"request_id\":1,\"type\":\"plan_response\",\"version\":1}");
}

TEST(Decode, TypedDecodersCheckDirection) {
  EXPECT_THROW(decode_response(encode(PlanRequest{1, cf4_fact()})), Error);
  EXPECT_THROW(decode_request(encode(PlanResponse{1, NoMatch{}})), Error);
}

TEST(RoundTrip, RandomMessages) {
  MessageGenerator gen(7);
  for (int i = 0; i < 1000; ++i) {
    auto m = gen.message();
    auto frame = encode(m);
    ASSERT_EQ(frame.back(), '\n');
    ASSERT_EQ(std::count(frame.begin(), frame.end(), '\n'), 1) << frame;
    ASSERT_EQ(decode(frame), m) << frame;
    // Re-encoding a decoded frame reproduces the same bytes.
    ASSERT_EQ(encode(decode(frame)), frame);
  }
}

}  // namespace
}  // namespace healsim
