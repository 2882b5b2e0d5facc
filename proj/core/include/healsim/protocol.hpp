#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "healsim/rules.hpp"
#include "healsim/types.hpp"

namespace healsim {

inline constexpr int kProtocolVersion = 1;

struct PlanRequest {
  std::uint64_t request_id = 0;
  Fact fact;

  bool operator==(const PlanRequest&) const = default;
};

struct NoMatch {
  bool operator==(const NoMatch&) const = default;
};

struct RemoteFailure {
  std::string code;
  std::string message;

  bool operator==(const RemoteFailure&) const = default;
};

using PlanOutcome = std::variant<RepairPlan, NoMatch, RemoteFailure>;

struct PlanResponse {
  std::uint64_t request_id = 0;
  PlanOutcome outcome;

  bool operator==(const PlanResponse&) const = default;
};

using Message = std::variant<PlanRequest, PlanResponse>;

/// One frame: canonical JSON (sorted keys, no insignificant whitespace)
/// followed by a single LF.
std::string encode(const PlanRequest& m);
std::string encode(const PlanResponse& m);
std::string encode(const Message& m);

/// Accepts a frame with or without its trailing LF. Throws MalformedFrame on
/// bad UTF-8, bad JSON, a missing or mistyped field, or the wrong version.
Message decode(std::string_view frame);
PlanRequest decode_request(std::string_view frame);
PlanResponse decode_response(std::string_view frame);

}  // namespace healsim
