#include "healsim/fault_injector.hpp"

#include "healsim/error.hpp"

namespace healsim {

std::string FaultInstance::target_text() const {
  if (const auto* slot = std::get_if<SlotName>(&target)) return *slot;
  return format_connector(std::get<ConnectorRef>(target));
}

LogicalMs draw_interval(SplitMix64& rng) { return interval_from_draw(rng.next()); }

FaultInstance draw_fault(SplitMix64& rng, const ArchitectureModel& model,
                         std::int64_t exception_threshold) {
  FaultInstance fault;
  fault.kind = kAllFaultKinds[rng.next() % 4];
  fault.injected_at = model.clock();

  if (fault.kind == FaultKind::kCF4) {
    auto live = model.ordered_connectors();
    if (live.empty()) throw Error(Errc::kNoEligibleTarget, "no live connector to remove");
    fault.target = live[rng.next() % live.size()];
    return fault;
  }

  std::vector<SlotName> present;
  const auto& slots = model.blueprint().slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (model.components()[i]) present.push_back(slots[i].slot);
  }
  if (present.empty()) {
    throw Error(Errc::kNoEligibleTarget,
                "no present component for " + std::string(to_string(fault.kind)));
  }
  fault.target = present[rng.next() % present.size()];
  if (fault.kind == FaultKind::kCF2) {
    fault.magnitude = exception_threshold + 1 + static_cast<std::int64_t>(rng.next() % 5);
  }
  return fault;
}

void inject(ArchitectureModel& model, const FaultInstance& fault) {
  const auto* slot = std::get_if<SlotName>(&fault.target);
  const auto* conn = std::get_if<ConnectorRef>(&fault.target);
  if ((fault.kind == FaultKind::kCF4) != (conn != nullptr)) {
    throw Error(Errc::kInvalidConfig, std::string(to_string(fault.kind)) +
                                          " fault has a target of the wrong shape");
  }
  switch (fault.kind) {
    case FaultKind::kCF1:
      model.set_state(*slot, ComponentState::kUnknown);
      break;
    case FaultKind::kCF2:
      if (!fault.magnitude || *fault.magnitude <= 0) {
        throw Error(Errc::kInvalidConfig, "CF2 fault needs a positive magnitude");
      }
      model.add_exceptions(*slot, *fault.magnitude);
      break;
    case FaultKind::kCF3:
      model.remove_component(*slot);
      break;
    case FaultKind::kCF4:
      model.remove_connector(*conn);
      break;
  }
}

}  // namespace healsim
