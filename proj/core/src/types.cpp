#include "healsim/types.hpp"

#include "healsim/error.hpp"

namespace healsim {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::kUnknownSlot: return "UnknownSlot";
    case Errc::kTargetAbsent: return "TargetAbsent";
    case Errc::kInterfaceMismatch: return "InterfaceMismatch";
    case Errc::kInvalidBlueprint: return "InvalidBlueprint";
    case Errc::kNoEligibleTarget: return "NoEligibleTarget";
    case Errc::kClockRegression: return "ClockRegression";
    case Errc::kSyntaxError: return "SyntaxError";
    case Errc::kDuplicateRuleName: return "DuplicateRuleName";
    case Errc::kUnknownStrategy: return "UnknownStrategy";
    case Errc::kUnknownField: return "UnknownField";
    case Errc::kNoMatchingRule: return "NoMatchingRule";
    case Errc::kMalformedFrame: return "MalformedFrame";
    case Errc::kConnectionFailed: return "ConnectionFailed";
    case Errc::kTimeout: return "Timeout";
    case Errc::kRemoteError: return "RemoteError";
    case Errc::kSubjectUnknown: return "SubjectUnknown";
    case Errc::kRestartAbsent: return "RestartAbsent";
    case Errc::kEndpointAbsent: return "EndpointAbsent";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kIo: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(ComponentState s) noexcept {
  switch (s) {
    case ComponentState::kStarted: return "STARTED";
    case ComponentState::kStopped: return "STOPPED";
    case ComponentState::kUndeployed: return "UNDEPLOYED";
    case ComponentState::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::string_view to_string(FaultKind k) noexcept {
  switch (k) {
    case FaultKind::kCF1: return "CF1";
    case FaultKind::kCF2: return "CF2";
    case FaultKind::kCF3: return "CF3";
    case FaultKind::kCF4: return "CF4";
  }
  return "CF1";
}

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::kAS1: return "AS1";
    case Strategy::kAS2: return "AS2";
    case Strategy::kAS3: return "AS3";
    case Strategy::kAS4: return "AS4";
  }
  return "AS1";
}

std::optional<ComponentState> parse_component_state(std::string_view text) noexcept {
  for (auto s : {ComponentState::kStarted, ComponentState::kStopped,
                 ComponentState::kUndeployed, ComponentState::kUnknown}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::optional<FaultKind> parse_fault_kind(std::string_view text) noexcept {
  for (auto k : kAllFaultKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<Strategy> parse_strategy(std::string_view text) noexcept {
  for (auto s : kAllStrategies) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string format_connector(const ConnectorRef& c) { return c.from + "->" + c.to; }

std::optional<std::pair<SlotName, SlotName>> split_connector(std::string_view text) {
  auto pos = text.find("->");
  if (pos == std::string_view::npos || pos == 0 || pos + 2 >= text.size()) {
    return std::nullopt;
  }
  return std::pair{SlotName(text.substr(0, pos)), SlotName(text.substr(pos + 2))};
}

}  // namespace healsim
