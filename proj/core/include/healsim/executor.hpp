#pragma once

#include <optional>
#include <string>
#include <vector>

#include "healsim/architecture.hpp"
#include "healsim/types.hpp"

namespace healsim {

struct ExecutionResult {
  RepairPlan plan;
  std::vector<std::string> applied_mutations;
  /// Set when AS2 had to instantiate the slot, and always for AS4.
  std::optional<std::string> new_instance_id;
  LogicalMs completed_at = 0;

  bool operator==(const ExecutionResult&) const = default;
};

/// Applies one adaptation strategy. Every applied mutation advances the
/// logical clock by 1 ms.
///
///   AS1  subject present: STARTED, exceptions reset; connectors untouched.
///   AS2  subject absent: fresh instance plus its intended connectors;
///        present: STARTED, exceptions reset, missing intended connectors back.
///   AS3  add the "From->To" connector; no-op if already live.
///   AS4  drop the instance, instantiate a fresh one, restore its intended
///        connectors.
///
/// Throws SubjectUnknown, RestartAbsent or EndpointAbsent; the model is left
/// unchanged when it throws.
ExecutionResult execute(ArchitectureModel& model, const RepairPlan& plan);

}  // namespace healsim
