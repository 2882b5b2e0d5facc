#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace healsim {

/// Logical milliseconds. The simulator never reads a wall clock.
using LogicalMs = std::int64_t;

using SlotName = std::string;

enum class ComponentState { kStarted, kStopped, kUndeployed, kUnknown };

/// Architectural failure classes.
enum class FaultKind {
  kCF1,  ///< component entered the unknown state
  kCF2,  ///< exception count above threshold
  kCF3,  ///< component removed from the architecture
  kCF4,  ///< connector between two components removed
};

/// Adaptation strategies.
enum class Strategy {
  kAS1,  ///< restart
  kAS2,  ///< redeploy
  kAS3,  ///< reconnect
  kAS4,  ///< replace with a fresh instance of the same type
};

inline constexpr FaultKind kAllFaultKinds[] = {FaultKind::kCF1, FaultKind::kCF2,
                                               FaultKind::kCF3, FaultKind::kCF4};
inline constexpr Strategy kAllStrategies[] = {Strategy::kAS1, Strategy::kAS2,
                                              Strategy::kAS3, Strategy::kAS4};

std::string_view to_string(ComponentState s) noexcept;
std::string_view to_string(FaultKind k) noexcept;
std::string_view to_string(Strategy s) noexcept;

std::optional<ComponentState> parse_component_state(std::string_view text) noexcept;
std::optional<FaultKind> parse_fault_kind(std::string_view text) noexcept;
std::optional<Strategy> parse_strategy(std::string_view text) noexcept;

/// A directed connector identified by slot names. Slots keep their identity
/// across instance replacement, so connectors are keyed on slots rather than
/// on instance ids.
struct ConnectorRef {
  SlotName from;
  SlotName to;
  std::string interface;

  auto operator<=>(const ConnectorRef&) const = default;
};

/// "From->To". The interface is implied by the target's provided interface.
std::string format_connector(const ConnectorRef& c);

/// Splits "From->To"; nullopt if the separator is missing or a side is empty.
std::optional<std::pair<SlotName, SlotName>> split_connector(std::string_view text);

/// What the planner decided for one failure.
struct RepairPlan {
  Strategy strategy = Strategy::kAS1;
  /// Slot name, or "From->To" for AS3.
  std::string subject;
  std::string fired_rule;

  bool operator==(const RepairPlan&) const = default;
};

}  // namespace healsim
