#include "healsim/monitor.hpp"

#include <algorithm>
#include <set>

#include "healsim/error.hpp"

namespace healsim {

bool Snapshot::same_content(const Snapshot& other) const {
  return slots == other.slots && connectors == other.connectors;
}

Snapshot take_snapshot(const ArchitectureModel& model) {
  Snapshot snap;
  snap.blueprint = model.blueprint_ptr();
  snap.slots.reserve(model.components().size());
  for (const auto& c : model.components()) {
    if (c) {
      snap.slots.push_back({true, c->state, c->exception_count});
    } else {
      snap.slots.push_back({});
    }
  }
  snap.connectors = model.ordered_connectors();
  snap.clock = model.clock();
  return snap;
}

std::string_view to_string(ChangeKind k) noexcept {
  switch (k) {
    case ChangeKind::kStateChanged: return "STATE_CHANGED";
    case ChangeKind::kExceptionsChanged: return "EXCEPTIONS_CHANGED";
    case ChangeKind::kComponentRemoved: return "COMPONENT_REMOVED";
    case ChangeKind::kConnectorRemoved: return "CONNECTOR_REMOVED";
    case ChangeKind::kComponentAdded: return "COMPONENT_ADDED";
    case ChangeKind::kConnectorAdded: return "CONNECTOR_ADDED";
  }
  return "STATE_CHANGED";
}

namespace {

// Intended connectors first in blueprint order, the rest lexicographically.
std::vector<ConnectorRef> connector_union(const Blueprint& bp, const Snapshot& a,
                                          const Snapshot& b) {
  std::set<ConnectorRef> all(a.connectors.begin(), a.connectors.end());
  all.insert(b.connectors.begin(), b.connectors.end());
  std::vector<ConnectorRef> out;
  for (const auto& c : bp.intended_connectors()) {
    if (all.erase(c)) out.push_back(c);
  }
  out.insert(out.end(), all.begin(), all.end());
  return out;
}

bool contains(const std::vector<ConnectorRef>& v, const ConnectorRef& c) {
  return std::find(v.begin(), v.end(), c) != v.end();
}

}  // namespace

std::vector<ChangeEvent> observe(const Snapshot& prev, const Snapshot& cur) {
  if (cur.clock < prev.clock) {
    throw Error(Errc::kClockRegression, "snapshot clock went from " +
                                            std::to_string(prev.clock) + " to " +
                                            std::to_string(cur.clock));
  }
  const auto& bp = *cur.blueprint;
  std::vector<ChangeEvent> events;
  const auto at = cur.clock;

  for (std::size_t i = 0; i < bp.slots().size(); ++i) {
    const auto& slot = bp.slots()[i].slot;
    const auto& before = prev.slots[i];
    const auto& after = cur.slots[i];
    if (before.present && !after.present) {
      events.push_back({ChangeKind::kComponentRemoved, slot, before.state, std::nullopt,
                        before.exception_count, std::nullopt, at});
    } else if (!before.present && after.present) {
      events.push_back({ChangeKind::kComponentAdded, slot, std::nullopt, after.state,
                        std::nullopt, after.exception_count, at});
    } else if (before.present) {
      if (before.state != after.state) {
        events.push_back({ChangeKind::kStateChanged, slot, before.state, after.state,
                          std::nullopt, std::nullopt, at});
      }
      if (before.exception_count != after.exception_count) {
        events.push_back({ChangeKind::kExceptionsChanged, slot, std::nullopt, std::nullopt,
                          before.exception_count, after.exception_count, at});
      }
    }
  }

  for (const auto& c : connector_union(bp, prev, cur)) {
    bool was = contains(prev.connectors, c);
    bool is = contains(cur.connectors, c);
    if (was && !is) {
      events.push_back({ChangeKind::kConnectorRemoved, c, {}, {}, {}, {}, at});
    } else if (!was && is) {
      events.push_back({ChangeKind::kConnectorAdded, c, {}, {}, {}, {}, at});
    }
  }
  return events;
}

Snapshot replay(Snapshot prev, const std::vector<ChangeEvent>& events) {
  const auto& bp = *prev.blueprint;
  for (const auto& e : events) {
    prev.clock = std::max(prev.clock, e.at);
    switch (e.kind) {
      case ChangeKind::kStateChanged:
        prev.slots[bp.slot_index(e.slot())].state = *e.new_state;
        break;
      case ChangeKind::kExceptionsChanged:
        prev.slots[bp.slot_index(e.slot())].exception_count = *e.new_count;
        break;
      case ChangeKind::kComponentRemoved:
        prev.slots[bp.slot_index(e.slot())] = SlotObservation{};
        break;
      case ChangeKind::kComponentAdded:
        prev.slots[bp.slot_index(e.slot())] = {true, *e.new_state, *e.new_count};
        break;
      case ChangeKind::kConnectorRemoved:
        std::erase(prev.connectors, e.connector());
        break;
      case ChangeKind::kConnectorAdded:
        prev.connectors.push_back(e.connector());
        break;
    }
  }
  // Restore the canonical connector order.
  Snapshot empty{prev.blueprint, {}, {}, 0};
  prev.connectors = connector_union(bp, prev, empty);
  return prev;
}

}  // namespace healsim
