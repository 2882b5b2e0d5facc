#include "healsim/protocol.hpp"

#include <nlohmann/json.hpp>

#include "healsim/error.hpp"

namespace healsim {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& detail) {
  throw Error(Errc::kMalformedFrame, "malformed frame: " + detail);
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object()) malformed("expected an object around \"" + std::string(key) + "\"");
  auto it = obj.find(key);
  if (it == obj.end()) malformed("missing field \"" + std::string(key) + "\"");
  return *it;
}

std::string string_field(const json& obj, const char* key) {
  const auto& v = field(obj, key);
  if (!v.is_string()) malformed("field \"" + std::string(key) + "\" must be a string");
  return v.get<std::string>();
}

std::int64_t int_field(const json& obj, const char* key) {
  const auto& v = field(obj, key);
  if (!v.is_number_integer()) malformed("field \"" + std::string(key) + "\" must be an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > INT64_MAX) {
    malformed("field \"" + std::string(key) + "\" out of range");
  }
  return v.get<std::int64_t>();
}

std::uint64_t id_field(const json& obj) {
  const auto& v = field(obj, "request_id");
  if (!v.is_number_unsigned()) malformed("request_id must be a non-negative integer");
  return v.get<std::uint64_t>();
}

json fact_to_json(const Fact& f) {
  return {{"dependent_count", f.dependent_count},
          {"exception_count", f.exception_count},
          {"kind", std::string(to_string(f.kind))},
          {"prior_failures_of_subject", f.prior_failures_of_subject},
          {"subject", f.subject}};
}

Fact fact_from_json(const json& j) {
  Fact f;
  auto kind = parse_fault_kind(string_field(j, "kind"));
  if (!kind) malformed("unknown failure kind");
  f.kind = *kind;
  f.subject = string_field(j, "subject");
  f.exception_count = int_field(j, "exception_count");
  f.dependent_count = int_field(j, "dependent_count");
  f.prior_failures_of_subject = int_field(j, "prior_failures_of_subject");
  return f;
}

json outcome_to_json(const PlanOutcome& o) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RepairPlan>) {
          return {{"plan",
                   {{"fired_rule", v.fired_rule},
                    {"strategy", std::string(to_string(v.strategy))},
                    {"subject", v.subject}}}};
        } else if constexpr (std::is_same_v<T, NoMatch>) {
          return {{"no_match", true}};
        } else {
          return {{"error", {{"code", v.code}, {"message", v.message}}}};
        }
      },
      o);
}

PlanOutcome outcome_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1) malformed("outcome must hold exactly one variant");
  if (j.contains("plan")) {
    const auto& p = j.at("plan");
    auto strategy = parse_strategy(string_field(p, "strategy"));
    if (!strategy) malformed("unknown strategy");
    return RepairPlan{*strategy, string_field(p, "subject"), string_field(p, "fired_rule")};
  }
  if (j.contains("no_match")) {
    if (j.at("no_match") != true) malformed("no_match must be true");
    return NoMatch{};
  }
  if (j.contains("error")) {
    const auto& e = j.at("error");
    return RemoteFailure{string_field(e, "code"), string_field(e, "message")};
  }
  malformed("unknown outcome variant");
}

std::string frame(const json& j) {
  // dump() sorts keys (std::map-backed objects) and emits no whitespace.
  // Invalid UTF-8 (e.g. echoed from a bad frame) is replaced, not thrown.
  return j.dump(-1, ' ', false, json::error_handler_t::replace) + '\n';
}

}  // namespace

std::string encode(const PlanRequest& m) {
  return frame({{"fact", fact_to_json(m.fact)},
                {"request_id", m.request_id},
                {"type", "plan_request"},
                {"version", kProtocolVersion}});
}

std::string encode(const PlanResponse& m) {
  return frame({{"outcome", outcome_to_json(m.outcome)},
                {"request_id", m.request_id},
                {"type", "plan_response"},
                {"version", kProtocolVersion}});
}

std::string encode(const Message& m) {
  return std::visit([](const auto& v) { return encode(v); }, m);
}

Message decode(std::string_view bytes) {
  if (!bytes.empty() && bytes.back() == '\n') bytes.remove_suffix(1);
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  if (!j.is_object()) malformed("frame is not a JSON object");
  if (int_field(j, "version") != kProtocolVersion) malformed("unsupported protocol version");
  auto type = string_field(j, "type");
  if (type == "plan_request") {
    return PlanRequest{id_field(j), fact_from_json(field(j, "fact"))};
  }
  if (type == "plan_response") {
    return PlanResponse{id_field(j), outcome_from_json(field(j, "outcome"))};
  }
  malformed("unknown message type \"" + type + "\"");
}

PlanRequest decode_request(std::string_view frame_bytes) {
  auto m = decode(frame_bytes);
  if (auto* r = std::get_if<PlanRequest>(&m)) return std::move(*r);
  malformed("expected plan_request");
}

PlanResponse decode_response(std::string_view frame_bytes) {
  auto m = decode(frame_bytes);
  if (auto* r = std::get_if<PlanResponse>(&m)) return std::move(*r);
  malformed("expected plan_response");
}

}  // namespace healsim
