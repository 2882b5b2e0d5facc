#pragma once

#include <string>
#include <vector>

#include "healsim/analyzer.hpp"
#include "healsim/executor.hpp"
#include "healsim/fault_injector.hpp"
#include "healsim/monitor.hpp"
#include "healsim/rules.hpp"

namespace healsim::testing {

/// Every fault kind against every eligible target of a healthy model, in
/// blueprint order. CF2 uses magnitude threshold + 1.
inline std::vector<FaultInstance> all_single_faults(const ArchitectureModel& model,
                                                    std::int64_t threshold) {
  std::vector<FaultInstance> out;
  for (auto kind : {FaultKind::kCF1, FaultKind::kCF2, FaultKind::kCF3}) {
    for (const auto& s : model.blueprint().slots()) {
      FaultInstance f{kind, s.slot, std::nullopt, 0};
      if (kind == FaultKind::kCF2) f.magnitude = threshold + 1;
      out.push_back(f);
    }
  }
  for (const auto& c : model.ordered_connectors()) {
    out.push_back(FaultInstance{FaultKind::kCF4, c, std::nullopt, 0});
  }
  return out;
}

struct CycleOutcome {
  std::vector<FailureReport> reports;
  std::vector<ExecutionResult> executions;
  std::vector<Violation> violations;
};

/// Inject, monitor, analyze, plan with the given rules and execute on model.
inline CycleOutcome run_single_cycle(ArchitectureModel& model, const FaultInstance& fault,
                                     const RuleSet& rules, std::int64_t threshold) {
  CycleOutcome out;
  auto before = take_snapshot(model);
  inject(model, fault);
  out.reports = classify(observe(before, take_snapshot(model)), model, threshold);
  for (const auto& r : out.reports) {
    out.executions.push_back(execute(model, evaluate(rules, make_fact(r, 0))));
  }
  out.violations = validate(model);
  return out;
}

}  // namespace healsim::testing
