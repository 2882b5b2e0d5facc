#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "healsim/types.hpp"

namespace healsim {

/// Template for component instances. AS4 replacements are fresh instances of
/// the slot's type.
struct ComponentType {
  std::string name;
  std::vector<std::string> required_interfaces;
  std::string provided_interface;

  bool operator==(const ComponentType&) const = default;
};

struct SlotSpec {
  SlotName slot;
  std::string type_name;

  bool operator==(const SlotSpec&) const = default;
};

/// The intended architecture. Immutable once created; create() rejects
/// blueprints that break the type-level connector rules or contain a
/// dependency cycle.
class Blueprint {
 public:
  static Blueprint create(std::vector<ComponentType> types, std::vector<SlotSpec> slots,
                          std::vector<ConnectorRef> intended_connectors);

  const std::vector<ComponentType>& component_types() const noexcept { return types_; }
  const std::vector<SlotSpec>& slots() const noexcept { return slots_; }
  const std::vector<ConnectorRef>& intended_connectors() const noexcept {
    return connectors_;
  }

  bool has_slot(std::string_view slot) const noexcept;
  /// Position of the slot in declaration order. Throws UnknownSlot.
  std::size_t slot_index(std::string_view slot) const;
  /// Throws UnknownSlot.
  const ComponentType& type_of(std::string_view slot) const;
  const ComponentType* find_type(std::string_view name) const noexcept;

  /// Position in intended_connectors(), if the connector is intended.
  std::optional<std::size_t> intended_index(const ConnectorRef& c) const noexcept;
  /// The intended connector between two slots, if any.
  const ConnectorRef* find_intended(std::string_view from,
                                    std::string_view to) const noexcept;

  /// Slots this slot requires, per intended connectors, in declaration order.
  /// Throws UnknownSlot.
  std::vector<SlotName> dependencies_of(std::string_view slot) const;

  /// Intended connectors with the slot at either end, in declaration order.
  std::vector<ConnectorRef> incident_connectors(std::string_view slot) const;

  bool operator==(const Blueprint&) const = default;

 private:
  Blueprint() = default;

  std::vector<ComponentType> types_;
  std::vector<SlotSpec> slots_;
  std::vector<ConnectorRef> connectors_;
};

/// Blueprint file: {"types":[{name,provides,requires}], "slots":[{slot,type}],
/// "connectors":[{from,to,interface}]}. Throws InvalidBlueprint.
Blueprint parse_blueprint(const nlohmann::json& doc);
Blueprint parse_blueprint(std::string_view json_text);
Blueprint load_blueprint_file(const std::filesystem::path& path);
nlohmann::json blueprint_to_json(const Blueprint& bp);

/// The bundled single-shop blueprint (same content as data/default_blueprint.json).
std::string_view default_blueprint_json() noexcept;
std::shared_ptr<const Blueprint> default_blueprint();

struct Component {
  std::string instance_id;
  std::string type_name;
  ComponentState state = ComponentState::kStarted;
  std::int64_t exception_count = 0;

  bool operator==(const Component&) const = default;
};

/// The live architecture. Copyable value; copies share the immutable blueprint.
///
/// Invariants: a present component's type matches its slot's type, and every
/// live connector joins two present components.
class ArchitectureModel {
 public:
  /// Every slot instantiated, STARTED, zero exceptions, all intended
  /// connectors present, clock 0.
  static ArchitectureModel instantiate(std::shared_ptr<const Blueprint> blueprint);

  const Blueprint& blueprint() const noexcept { return *blueprint_; }
  const std::shared_ptr<const Blueprint>& blueprint_ptr() const noexcept {
    return blueprint_;
  }

  /// Empty optional means the slot is ABSENT. Throws UnknownSlot.
  const std::optional<Component>& component(std::string_view slot) const;
  /// Indexed like blueprint().slots().
  const std::vector<std::optional<Component>>& components() const noexcept {
    return components_;
  }
  std::size_t present_count() const noexcept;

  const std::set<ConnectorRef>& connectors() const noexcept { return connectors_; }
  bool has_connector(const ConnectorRef& c) const noexcept {
    return connectors_.contains(c);
  }
  /// Live connectors, intended ones first in blueprint order, then any others
  /// in lexicographic order.
  std::vector<ConnectorRef> ordered_connectors() const;

  LogicalMs clock() const noexcept { return clock_; }

  // Primitive mutations. Each applies exactly the named change or throws
  // without modifying the model.
  void set_state(std::string_view slot, ComponentState state);
  void add_exceptions(std::string_view slot, std::int64_t n);
  void reset_exceptions(std::string_view slot);
  /// Removes the instance and every live connector touching it; returns them.
  std::vector<ConnectorRef> remove_component(std::string_view slot);
  void remove_connector(const ConnectorRef& c);
  /// No-op when already present.
  void add_connector(const ConnectorRef& c);
  /// Fresh instance in an ABSENT slot; the id is never reused within this
  /// model's lineage.
  const Component& instantiate_slot(std::string_view slot);
  void advance_clock(LogicalMs ms);

  bool operator==(const ArchitectureModel& other) const;

 private:
  explicit ArchitectureModel(std::shared_ptr<const Blueprint> blueprint);

  std::optional<Component>& mutable_component(std::string_view slot);
  Component& present_component(std::string_view slot);

  std::shared_ptr<const Blueprint> blueprint_;
  std::vector<std::optional<Component>> components_;
  std::set<ConnectorRef> connectors_;
  LogicalMs clock_ = 0;
  std::uint64_t next_instance_seq_ = 1;
};

ArchitectureModel build_default_model();

std::vector<SlotName> dependencies_of(const ArchitectureModel& model, std::string_view slot);

// Mutation values: the shared surface the injector and executor use to
// change a model, and what execution results list.
namespace mutation {
struct SetState { SlotName slot; ComponentState state; };
struct AddExceptions { SlotName slot; std::int64_t n; };
struct ResetExceptions { SlotName slot; };
struct RemoveComponent { SlotName slot; };
struct RemoveConnector { ConnectorRef connector; };
struct AddConnector { ConnectorRef connector; };
struct Instantiate { SlotName slot; };
struct AdvanceClock { LogicalMs ms; };
}  // namespace mutation

using Mutation =
    std::variant<mutation::SetState, mutation::AddExceptions, mutation::ResetExceptions,
                 mutation::RemoveComponent, mutation::RemoveConnector,
                 mutation::AddConnector, mutation::Instantiate, mutation::AdvanceClock>;

void apply_mutation(ArchitectureModel& model, const Mutation& m);
std::string describe(const Mutation& m);

enum class ViolationKind { kUnknownState, kMissingComponent, kMissingConnector, kNotStarted };

std::string_view to_string(ViolationKind k) noexcept;

struct Violation {
  ViolationKind kind;
  /// Slot name, or the connector for MISSING_CONNECTOR.
  std::variant<SlotName, ConnectorRef> subject;

  std::string subject_text() const;
  bool operator==(const Violation&) const = default;
};

/// Differences between the live model and its blueprint, in slot order then
/// intended-connector order. Empty means the architecture is healthy.
std::vector<Violation> validate(const ArchitectureModel& model);

}  // namespace healsim
