#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "healsim/architecture.hpp"

namespace healsim {

struct SlotObservation {
  bool present = false;
  ComponentState state = ComponentState::kStarted;
  std::int64_t exception_count = 0;

  bool operator==(const SlotObservation&) const = default;
};

/// Read-only capture of what the monitor can see: per-slot presence, state and
/// exception count, plus the live connector set.
struct Snapshot {
  std::shared_ptr<const Blueprint> blueprint;
  std::vector<SlotObservation> slots;  ///< blueprint slot order
  std::vector<ConnectorRef> connectors;  ///< ArchitectureModel::ordered_connectors order
  LogicalMs clock = 0;

  /// Equal ignoring the clock.
  bool same_content(const Snapshot& other) const;
  bool operator==(const Snapshot& other) const {
    return clock == other.clock && same_content(other);
  }
};

Snapshot take_snapshot(const ArchitectureModel& model);

enum class ChangeKind {
  kStateChanged,
  kExceptionsChanged,
  kComponentRemoved,
  kConnectorRemoved,
  kComponentAdded,
  kConnectorAdded,
};

std::string_view to_string(ChangeKind k) noexcept;

struct ChangeEvent {
  ChangeKind kind;
  std::variant<SlotName, ConnectorRef> subject;
  // Before/after values. STATE_CHANGED fills the states, EXCEPTIONS_CHANGED the
  // counts; COMPONENT_REMOVED carries only old values, COMPONENT_ADDED only new.
  std::optional<ComponentState> old_state;
  std::optional<ComponentState> new_state;
  std::optional<std::int64_t> old_count;
  std::optional<std::int64_t> new_count;
  LogicalMs at = 0;

  const SlotName& slot() const { return std::get<SlotName>(subject); }
  const ConnectorRef& connector() const { return std::get<ConnectorRef>(subject); }
  bool operator==(const ChangeEvent&) const = default;
};

/// Minimal diff from prev to cur: slots in blueprint order, then connectors
/// (intended in blueprint order, then others). Within a slot a state change
/// precedes an exception change. Throws ClockRegression.
std::vector<ChangeEvent> observe(const Snapshot& prev, const Snapshot& cur);

/// Applies events to a snapshot's content; the result's clock is the last
/// event's timestamp (or prev.clock when there are none).
Snapshot replay(Snapshot prev, const std::vector<ChangeEvent>& events);

}  // namespace healsim
