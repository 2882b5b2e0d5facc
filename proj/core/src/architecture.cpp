#include "healsim/architecture.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "healsim/error.hpp"

namespace healsim {

namespace {

[[noreturn]] void invalid_blueprint(const std::string& what) {
  throw Error(Errc::kInvalidBlueprint, "invalid blueprint: " + what);
}

[[noreturn]] void unknown_slot(std::string_view slot) {
  throw Error(Errc::kUnknownSlot, "unknown slot '" + std::string(slot) + "'");
}

[[noreturn]] void target_absent(std::string_view what) {
  throw Error(Errc::kTargetAbsent, std::string(what) + " is absent");
}

}  // namespace

Blueprint Blueprint::create(std::vector<ComponentType> types, std::vector<SlotSpec> slots,
                            std::vector<ConnectorRef> intended_connectors) {
  Blueprint bp;
  bp.types_ = std::move(types);
  bp.slots_ = std::move(slots);
  bp.connectors_ = std::move(intended_connectors);

  std::unordered_set<std::string> names;
  for (const auto& t : bp.types_) {
    if (t.name.empty()) invalid_blueprint("component type with empty name");
    if (!names.insert(t.name).second) invalid_blueprint("duplicate type '" + t.name + "'");
    std::unordered_set<std::string> req(t.required_interfaces.begin(),
                                        t.required_interfaces.end());
    if (req.size() != t.required_interfaces.size()) {
      invalid_blueprint("type '" + t.name + "' lists a required interface twice");
    }
  }

  std::unordered_set<std::string> slot_names;
  for (const auto& s : bp.slots_) {
    if (s.slot.empty()) invalid_blueprint("slot with empty name");
    if (s.slot.find("->") != std::string::npos) {
      invalid_blueprint("slot name '" + s.slot + "' contains '->'");
    }
    if (!slot_names.insert(s.slot).second) {
      invalid_blueprint("duplicate slot '" + s.slot + "'");
    }
    if (!bp.find_type(s.type_name)) {
      invalid_blueprint("slot '" + s.slot + "' has unknown type '" + s.type_name + "'");
    }
  }

  std::set<ConnectorRef> seen;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& c : bp.connectors_) {
    auto label = format_connector(c);
    if (!bp.has_slot(c.from) || !bp.has_slot(c.to)) {
      invalid_blueprint("connector " + label + " names an unknown slot");
    }
    if (c.from == c.to) invalid_blueprint("connector " + label + " is a self loop");
    const auto& src = bp.type_of(c.from);
    const auto& dst = bp.type_of(c.to);
    if (std::find(src.required_interfaces.begin(), src.required_interfaces.end(),
                  c.interface) == src.required_interfaces.end()) {
      invalid_blueprint("connector " + label + ": '" + c.interface +
                        "' is not required by " + src.name);
    }
    if (dst.provided_interface != c.interface) {
      invalid_blueprint("connector " + label + ": '" + c.interface +
                        "' is not provided by " + dst.name);
    }
    if (!seen.insert(c).second || !pairs.emplace(c.from, c.to).second) {
      invalid_blueprint("duplicate connector " + label);
    }
  }

  // Kahn's algorithm over the slot dependency graph.
  std::unordered_map<std::string, int> indegree;
  for (const auto& s : bp.slots_) indegree[s.slot] = 0;
  for (const auto& c : bp.connectors_) ++indegree[c.to];
  std::vector<std::string> ready;
  for (const auto& s : bp.slots_) {
    if (indegree[s.slot] == 0) ready.push_back(s.slot);
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    auto slot = std::move(ready.back());
    ready.pop_back();
    ++visited;
    for (const auto& c : bp.connectors_) {
      if (c.from == slot && --indegree[c.to] == 0) ready.push_back(c.to);
    }
  }
  if (visited != bp.slots_.size()) invalid_blueprint("slot dependency graph has a cycle");

  return bp;
}

bool Blueprint::has_slot(std::string_view slot) const noexcept {
  return std::any_of(slots_.begin(), slots_.end(),
                     [&](const SlotSpec& s) { return s.slot == slot; });
}

std::size_t Blueprint::slot_index(std::string_view slot) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].slot == slot) return i;
  }
  unknown_slot(slot);
}

const ComponentType& Blueprint::type_of(std::string_view slot) const {
  const auto* t = find_type(slots_[slot_index(slot)].type_name);
  return *t;
}

const ComponentType* Blueprint::find_type(std::string_view name) const noexcept {
  for (const auto& t : types_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::optional<std::size_t> Blueprint::intended_index(const ConnectorRef& c) const noexcept {
  for (std::size_t i = 0; i < connectors_.size(); ++i) {
    if (connectors_[i] == c) return i;
  }
  return std::nullopt;
}

const ConnectorRef* Blueprint::find_intended(std::string_view from,
                                             std::string_view to) const noexcept {
  for (const auto& c : connectors_) {
    if (c.from == from && c.to == to) return &c;
  }
  return nullptr;
}

std::vector<SlotName> Blueprint::dependencies_of(std::string_view slot) const {
  slot_index(slot);
  std::vector<SlotName> deps;
  for (const auto& c : connectors_) {
    if (c.from == slot) deps.push_back(c.to);
  }
  return deps;
}

std::vector<ConnectorRef> Blueprint::incident_connectors(std::string_view slot) const {
  slot_index(slot);
  std::vector<ConnectorRef> out;
  for (const auto& c : connectors_) {
    if (c.from == slot || c.to == slot) out.push_back(c);
  }
  return out;
}

ArchitectureModel::ArchitectureModel(std::shared_ptr<const Blueprint> blueprint)
    : blueprint_(std::move(blueprint)), components_(blueprint_->slots().size()) {}

ArchitectureModel ArchitectureModel::instantiate(std::shared_ptr<const Blueprint> blueprint) {
  ArchitectureModel model(std::move(blueprint));
  for (const auto& s : model.blueprint().slots()) model.instantiate_slot(s.slot);
  for (const auto& c : model.blueprint().intended_connectors()) model.connectors_.insert(c);
  return model;
}

const std::optional<Component>& ArchitectureModel::component(std::string_view slot) const {
  return components_[blueprint_->slot_index(slot)];
}

std::optional<Component>& ArchitectureModel::mutable_component(std::string_view slot) {
  return components_[blueprint_->slot_index(slot)];
}

Component& ArchitectureModel::present_component(std::string_view slot) {
  auto& c = mutable_component(slot);
  if (!c) target_absent("component '" + std::string(slot) + "'");
  return *c;
}

std::size_t ArchitectureModel::present_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(components_.begin(), components_.end(),
                    [](const auto& c) { return c.has_value(); }));
}

std::vector<ConnectorRef> ArchitectureModel::ordered_connectors() const {
  std::vector<ConnectorRef> out;
  out.reserve(connectors_.size());
  for (const auto& c : blueprint_->intended_connectors()) {
    if (connectors_.contains(c)) out.push_back(c);
  }
  for (const auto& c : connectors_) {
    if (!blueprint_->intended_index(c)) out.push_back(c);
  }
  return out;
}

void ArchitectureModel::set_state(std::string_view slot, ComponentState state) {
  present_component(slot).state = state;
}

void ArchitectureModel::add_exceptions(std::string_view slot, std::int64_t n) {
  if (n < 0) {
    throw Error(Errc::kInvalidConfig, "add_exceptions needs a non-negative count");
  }
  present_component(slot).exception_count += n;
}

void ArchitectureModel::reset_exceptions(std::string_view slot) {
  present_component(slot).exception_count = 0;
}

std::vector<ConnectorRef> ArchitectureModel::remove_component(std::string_view slot) {
  auto& c = mutable_component(slot);
  if (!c) target_absent("component '" + std::string(slot) + "'");
  std::vector<ConnectorRef> removed;
  for (const auto& conn : ordered_connectors()) {
    if (conn.from == slot || conn.to == slot) removed.push_back(conn);
  }
  for (const auto& conn : removed) connectors_.erase(conn);
  c.reset();
  return removed;
}

void ArchitectureModel::remove_connector(const ConnectorRef& c) {
  if (connectors_.erase(c) == 0) target_absent("connector " + format_connector(c));
}

void ArchitectureModel::add_connector(const ConnectorRef& c) {
  const auto& src_type = blueprint_->type_of(c.from);
  const auto& dst_type = blueprint_->type_of(c.to);
  if (!component(c.from) || !component(c.to)) {
    target_absent("endpoint of connector " + format_connector(c));
  }
  const auto& req = src_type.required_interfaces;
  if (c.from == c.to || std::find(req.begin(), req.end(), c.interface) == req.end() ||
      dst_type.provided_interface != c.interface) {
    throw Error(Errc::kInterfaceMismatch, "connector " + format_connector(c) +
                                              " does not match interface '" +
                                              c.interface + "'");
  }
  connectors_.insert(c);
}

const Component& ArchitectureModel::instantiate_slot(std::string_view slot) {
  auto& c = mutable_component(slot);
  if (c) {
    throw Error(Errc::kInvalidConfig,
                "slot '" + std::string(slot) + "' is already occupied");
  }
  const auto& type = blueprint_->type_of(slot);
  c = Component{type.name + "#" + std::to_string(next_instance_seq_++), type.name,
                ComponentState::kStarted, 0};
  return *c;
}

void ArchitectureModel::advance_clock(LogicalMs ms) {
  if (ms < 0) throw Error(Errc::kClockRegression, "clock cannot move backwards");
  clock_ += ms;
}

bool ArchitectureModel::operator==(const ArchitectureModel& other) const {
  return *blueprint_ == *other.blueprint_ && components_ == other.components_ &&
         connectors_ == other.connectors_ && clock_ == other.clock_;
}

ArchitectureModel build_default_model() {
  return ArchitectureModel::instantiate(default_blueprint());
}

std::vector<SlotName> dependencies_of(const ArchitectureModel& model, std::string_view slot) {
  return model.blueprint().dependencies_of(slot);
}

void apply_mutation(ArchitectureModel& model, const Mutation& m) {
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, mutation::SetState>) {
          model.set_state(op.slot, op.state);
        } else if constexpr (std::is_same_v<T, mutation::AddExceptions>) {
          model.add_exceptions(op.slot, op.n);
        } else if constexpr (std::is_same_v<T, mutation::ResetExceptions>) {
          model.reset_exceptions(op.slot);
        } else if constexpr (std::is_same_v<T, mutation::RemoveComponent>) {
          model.remove_component(op.slot);
        } else if constexpr (std::is_same_v<T, mutation::RemoveConnector>) {
          model.remove_connector(op.connector);
        } else if constexpr (std::is_same_v<T, mutation::AddConnector>) {
          model.add_connector(op.connector);
        } else if constexpr (std::is_same_v<T, mutation::Instantiate>) {
          model.instantiate_slot(op.slot);
        } else {
          model.advance_clock(op.ms);
        }
      },
      m);
}

std::string describe(const Mutation& m) {
  return std::visit(
      [](const auto& op) -> std::string {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, mutation::SetState>) {
          return "set_state(" + op.slot + "," + std::string(to_string(op.state)) + ")";
        } else if constexpr (std::is_same_v<T, mutation::AddExceptions>) {
          return "add_exceptions(" + op.slot + "," + std::to_string(op.n) + ")";
        } else if constexpr (std::is_same_v<T, mutation::ResetExceptions>) {
          return "reset_exceptions(" + op.slot + ")";
        } else if constexpr (std::is_same_v<T, mutation::RemoveComponent>) {
          return "remove_component(" + op.slot + ")";
        } else if constexpr (std::is_same_v<T, mutation::RemoveConnector>) {
          return "remove_connector(" + format_connector(op.connector) + ")";
        } else if constexpr (std::is_same_v<T, mutation::AddConnector>) {
          return "add_connector(" + format_connector(op.connector) + ")";
        } else if constexpr (std::is_same_v<T, mutation::Instantiate>) {
          return "instantiate(" + op.slot + ")";
        } else {
          return "advance_clock(" + std::to_string(op.ms) + ")";
        }
      },
      m);
}

std::string_view to_string(ViolationKind k) noexcept {
  switch (k) {
    case ViolationKind::kUnknownState: return "UNKNOWN_STATE";
    case ViolationKind::kMissingComponent: return "MISSING_COMPONENT";
    case ViolationKind::kMissingConnector: return "MISSING_CONNECTOR";
    case ViolationKind::kNotStarted: return "NOT_STARTED";
  }
  return "UNKNOWN_STATE";
}

std::string Violation::subject_text() const {
  if (const auto* slot = std::get_if<SlotName>(&subject)) return *slot;
  return format_connector(std::get<ConnectorRef>(subject));
}

std::vector<Violation> validate(const ArchitectureModel& model) {
  std::vector<Violation> out;
  const auto& slots = model.blueprint().slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& c = model.components()[i];
    if (!c) {
      out.push_back({ViolationKind::kMissingComponent, slots[i].slot});
    } else if (c->state == ComponentState::kUnknown) {
      out.push_back({ViolationKind::kUnknownState, slots[i].slot});
    } else if (c->state != ComponentState::kStarted) {
      out.push_back({ViolationKind::kNotStarted, slots[i].slot});
    }
  }
  for (const auto& conn : model.blueprint().intended_connectors()) {
    if (model.component(conn.from) && model.component(conn.to) &&
        !model.has_connector(conn)) {
      out.push_back({ViolationKind::kMissingConnector, conn});
    }
  }
  return out;
}

}  // namespace healsim
