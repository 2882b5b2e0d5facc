#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "healsim/analyzer.hpp"
#include "healsim/architecture.hpp"
#include "healsim/executor.hpp"
#include "healsim/fault_injector.hpp"
#include "healsim/planner.hpp"
#include "healsim/rng.hpp"
#include "healsim/rules.hpp"

namespace healsim {

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::int64_t rounds = 0;
  std::int64_t exception_threshold = kDefaultExceptionThreshold;
  std::int64_t rootcause_threshold = kDefaultRootCauseThreshold;
  /// "inproc" or "tcp://host:port".
  std::string planner = "inproc";
  std::chrono::milliseconds planner_timeout = kDefaultPlannerTimeout;
  std::optional<std::filesystem::path> rules_path;      ///< unset: bundled rules
  std::optional<std::filesystem::path> blueprint_path;  ///< unset: bundled blueprint
  std::optional<std::filesystem::path> script_path;     ///< echoed only
  /// Round i injects script[i] instead of a random draw while i < size().
  /// CF4 targets may leave the interface empty; it is resolved from the
  /// blueprint.
  std::vector<FaultInstance> script;
  /// Empty: run_scenario writes nothing.
  std::filesystem::path out_dir;

  /// Throws InvalidConfig.
  void check() const;
};

/// Script file: JSON list of {"kind":"CF1","target":"Query Service"}, CF4
/// targets as {"from":..,"to":..}, CF2 optionally with "magnitude". Throws
/// InvalidConfig.
std::vector<FaultInstance> parse_script(std::string_view json_text);
std::vector<FaultInstance> load_script_file(const std::filesystem::path& path);

/// What happened to one failure report.
struct Decision {
  std::optional<RepairPlan> plan;  ///< nullopt: no rule matched
  std::optional<ExecutionResult> execution;
  std::string execution_error;  ///< set when the plan could not be applied

  bool handled() const noexcept { return plan && execution; }
  bool operator==(const Decision&) const = default;
};

struct RoundRecord {
  std::int64_t index = 0;  ///< 1-based
  LogicalMs clock_start = 0;
  LogicalMs clock_end = 0;
  std::vector<Violation> pre_violations;
  FaultInstance fault;
  std::vector<FailureReport> reports;
  std::vector<Decision> decisions;  ///< parallel to reports
  std::vector<Violation> post_violations;
  std::int64_t unhandled = 0;

  bool verified_clean() const noexcept { return post_violations.empty(); }
  bool operator==(const RoundRecord&) const = default;
};

/// Everything threaded from one round to the next.
struct RunState {
  ArchitectureModel model;
  SplitMix64 rng;
  RootCauseLedger ledger;
  std::uint64_t next_report_id = 1;
  std::map<std::string, std::int64_t> failures_by_subject;
  std::int64_t unhandled = 0;

  RunState(ArchitectureModel m, std::uint64_t seed, std::int64_t rootcause_threshold);
};

/// One inject / monitor / analyze / plan / execute / verify cycle. Planner
/// transport errors propagate; unmatched or inapplicable plans are recorded.
RoundRecord run_round(RunState& state, PlannerHandle& planner, const ScenarioConfig& config,
                      std::int64_t index, const std::optional<FaultInstance>& scripted);

struct ScenarioReport {
  nlohmann::json config;
  std::vector<RoundRecord> rounds;
  RootCauseLedger ledger;
  std::vector<RootCauseSuspect> suspects;
  std::int64_t unhandled = 0;
};

/// Loads rules and blueprint (errors surface before round 1), runs every round,
/// and writes the report files when out_dir is set.
ScenarioReport run_scenario(const ScenarioConfig& config);
/// Same, with a caller-supplied planner and already-loaded inputs.
ScenarioReport run_scenario(const ScenarioConfig& config, PlannerHandle& planner,
                            std::shared_ptr<const Blueprint> blueprint);

nlohmann::json to_json(const ScenarioReport& report);
/// Canonical: sorted keys, no whitespace, trailing LF.
std::string format_scenario_json(const ScenarioReport& report);
/// Header round,clock,fault_kind,fault_target,reports,plans,strategies,
/// post_violations,unhandled.
std::string format_rounds_csv(const ScenarioReport& report);

/// Writes scenario.json, rounds.csv and suspects.csv; creates out_dir.
void emit_reports(const ScenarioReport& report, const std::filesystem::path& out_dir);

}  // namespace healsim
