#include "healsim/scenario.hpp"

#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "healsim/error.hpp"
#include "healsim/monitor.hpp"

namespace healsim {

namespace {

using nlohmann::json;

[[noreturn]] void invalid_config(const std::string& what) {
  throw Error(Errc::kInvalidConfig, what);
}

std::string read_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, std::string("cannot read ") + what + " " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json subject_json(const std::variant<SlotName, ConnectorRef>& subject) {
  if (const auto* slot = std::get_if<SlotName>(&subject)) return *slot;
  const auto& c = std::get<ConnectorRef>(subject);
  return {{"from", c.from}, {"to", c.to}, {"interface", c.interface}};
}

json fault_json(const FaultInstance& f) {
  json j = {{"kind", std::string(to_string(f.kind))},
            {"target", subject_json(f.target)},
            {"injected_at", f.injected_at}};
  if (f.magnitude) j["magnitude"] = *f.magnitude;
  return j;
}

json report_json(const FailureReport& r) {
  json j = {{"report_id", r.report_id},
            {"kind", std::string(to_string(r.kind))},
            {"subject", subject_json(r.subject)},
            {"detected_at", r.detected_at},
            {"dependent_slots", r.dependent_slots}};
  if (r.exception_count) j["exception_count"] = *r.exception_count;
  return j;
}

json plan_json(const RepairPlan& p) {
  return {{"strategy", std::string(to_string(p.strategy))},
          {"subject", p.subject},
          {"fired_rule", p.fired_rule}};
}

json decision_json(const Decision& d) {
  json j = json::object();
  if (d.plan) {
    j["plan"] = plan_json(*d.plan);
  } else {
    j["no_match"] = true;
  }
  if (d.execution) {
    json e = {{"applied_mutations", d.execution->applied_mutations},
              {"completed_at", d.execution->completed_at}};
    if (d.execution->new_instance_id) e["new_instance_id"] = *d.execution->new_instance_id;
    j["execution"] = std::move(e);
  }
  if (!d.execution_error.empty()) j["execution_error"] = d.execution_error;
  return j;
}

json violations_json(const std::vector<Violation>& vs) {
  json out = json::array();
  for (const auto& v : vs) {
    out.push_back({{"kind", std::string(to_string(v.kind))}, {"subject", v.subject_text()}});
  }
  return out;
}

json round_json(const RoundRecord& r) {
  json reports = json::array();
  for (const auto& rep : r.reports) reports.push_back(report_json(rep));
  json decisions = json::array();
  for (const auto& d : r.decisions) decisions.push_back(decision_json(d));
  return {{"round", r.index},
          {"clock_start", r.clock_start},
          {"clock_end", r.clock_end},
          {"pre_violations", violations_json(r.pre_violations)},
          {"fault", fault_json(r.fault)},
          {"reports", reports},
          {"decisions", decisions},
          {"post_violations", violations_json(r.post_violations)},
          {"unhandled", r.unhandled}};
}

json config_json(const ScenarioConfig& c) {
  auto path_or = [](const std::optional<std::filesystem::path>& p, json fallback) -> json {
    return p ? json(p->generic_string()) : fallback;
  };
  return {{"seed", c.seed},
          {"rounds", c.rounds},
          {"exception_threshold", c.exception_threshold},
          {"rootcause_threshold", c.rootcause_threshold},
          {"planner", c.planner},
          {"rules", path_or(c.rules_path, "<bundled>")},
          {"blueprint", path_or(c.blueprint_path, "<bundled>")},
          {"script", path_or(c.script_path, nullptr)},
          {"scripted_rounds", c.script.size()}};
}

// Fills in CF4 interfaces and checks every target against the blueprint.
std::vector<FaultInstance> resolve_script(const std::vector<FaultInstance>& script,
                                          const Blueprint& bp) {
  auto out = script;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& f = out[i];
    auto where = "script entry " + std::to_string(i + 1) + ": ";
    if (auto* c = std::get_if<ConnectorRef>(&f.target)) {
      const auto* intended = bp.find_intended(c->from, c->to);
      if (!intended || (!c->interface.empty() && c->interface != intended->interface)) {
        invalid_config(where + format_connector(*c) + " is not an intended connector");
      }
      *c = *intended;
    } else if (!bp.has_slot(std::get<SlotName>(f.target))) {
      invalid_config(where + "unknown slot '" + std::get<SlotName>(f.target) + "'");
    }
  }
  return out;
}

}  // namespace

void ScenarioConfig::check() const {
  if (rounds < 0) invalid_config("rounds must be non-negative");
  if (exception_threshold < 1) invalid_config("exception threshold must be at least 1");
  if (rootcause_threshold < 1) invalid_config("root-cause threshold must be at least 1");
  if (planner != "inproc" && !parse_endpoint(planner)) {
    invalid_config("planner must be 'inproc' or tcp://HOST:PORT, got '" + planner + "'");
  }
}

std::vector<FaultInstance> parse_script(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    invalid_config(std::string("script is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) invalid_config("script must be a JSON list");

  std::vector<FaultInstance> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    auto where = "script entry " + std::to_string(i + 1) + ": ";
    if (!e.is_object() || !e.contains("kind") || !e.contains("target")) {
      invalid_config(where + "needs \"kind\" and \"target\"");
    }
    auto kind = e["kind"].is_string() ? parse_fault_kind(e["kind"].get<std::string>())
                                      : std::nullopt;
    if (!kind) invalid_config(where + "unknown kind");

    FaultInstance f;
    f.kind = *kind;
    const auto& target = e["target"];
    if (f.kind == FaultKind::kCF4) {
      if (!target.is_object() || !target.contains("from") || !target.contains("to") ||
          !target["from"].is_string() || !target["to"].is_string()) {
        invalid_config(where + "CF4 target must be {\"from\":..,\"to\":..}");
      }
      ConnectorRef c{target["from"].get<std::string>(), target["to"].get<std::string>(), ""};
      if (target.contains("interface") && target["interface"].is_string()) {
        c.interface = target["interface"].get<std::string>();
      }
      f.target = std::move(c);
    } else {
      if (!target.is_string()) invalid_config(where + "target must be a slot name");
      f.target = target.get<std::string>();
    }
    if (e.contains("magnitude")) {
      if (f.kind != FaultKind::kCF2) invalid_config(where + "magnitude is only valid for CF2");
      if (!e["magnitude"].is_number_integer() || e["magnitude"].get<std::int64_t>() < 1) {
        invalid_config(where + "magnitude must be a positive integer");
      }
      f.magnitude = e["magnitude"].get<std::int64_t>();
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FaultInstance> load_script_file(const std::filesystem::path& path) {
  return parse_script(read_text(path, "script"));
}

RunState::RunState(ArchitectureModel m, std::uint64_t seed, std::int64_t rootcause_threshold)
    : model(std::move(m)), rng(seed), ledger(rootcause_threshold) {}

RoundRecord run_round(RunState& state, PlannerHandle& planner, const ScenarioConfig& config,
                      std::int64_t index, const std::optional<FaultInstance>& scripted) {
  RoundRecord record;
  record.index = index;
  record.clock_start = state.model.clock();
  record.pre_violations = validate(state.model);

  state.model.advance_clock(draw_interval(state.rng));
  if (scripted) {
    record.fault = *scripted;
    record.fault.injected_at = state.model.clock();
    if (record.fault.kind == FaultKind::kCF2 && !record.fault.magnitude) {
      record.fault.magnitude = config.exception_threshold + 1;
    }
  } else {
    record.fault = draw_fault(state.rng, state.model, config.exception_threshold);
  }

  auto before = take_snapshot(state.model);
  inject(state.model, record.fault);
  auto after = take_snapshot(state.model);

  record.reports = classify(observe(before, after), state.model, config.exception_threshold,
                            state.next_report_id);
  state.next_report_id += record.reports.size();

  for (const auto& report : record.reports) {
    state.ledger.record_failure(report);
    auto subject = report.subject_text();
    auto& prior = state.failures_by_subject[subject];

    Decision decision;
    decision.plan = request_plan(planner, report, prior);
    ++prior;
    if (decision.plan) {
      try {
        decision.execution = execute(state.model, *decision.plan);
      } catch (const Error& e) {
        decision.execution_error = e.what();
      }
    }
    if (!decision.handled()) ++record.unhandled;
    record.decisions.push_back(std::move(decision));
  }

  record.post_violations = validate(state.model);
  record.clock_end = state.model.clock();
  state.unhandled += record.unhandled;
  return record;
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  config.check();
  auto blueprint = config.blueprint_path
                       ? std::make_shared<const Blueprint>(load_blueprint_file(*config.blueprint_path))
                       : default_blueprint();
  if (config.planner == "inproc") {
    auto rules = config.rules_path ? parse_rules(read_text(*config.rules_path, "rules"))
                                   : default_rules();
    auto planner = PlannerHandle::in_process(std::move(rules));
    return run_scenario(config, planner, std::move(blueprint));
  }
  auto planner = PlannerHandle::remote(*parse_endpoint(config.planner), config.planner_timeout);
  return run_scenario(config, planner, std::move(blueprint));
}

ScenarioReport run_scenario(const ScenarioConfig& config, PlannerHandle& planner,
                            std::shared_ptr<const Blueprint> blueprint) {
  config.check();
  auto script = resolve_script(config.script, *blueprint);

  RunState state(ArchitectureModel::instantiate(std::move(blueprint)), config.seed,
                 config.rootcause_threshold);
  ScenarioReport report{config_json(config), {}, RootCauseLedger(config.rootcause_threshold),
                        {}, 0};
  report.rounds.reserve(static_cast<std::size_t>(config.rounds));
  for (std::int64_t i = 0; i < config.rounds; ++i) {
    std::optional<FaultInstance> scripted;
    if (static_cast<std::size_t>(i) < script.size()) scripted = script[static_cast<std::size_t>(i)];
    report.rounds.push_back(run_round(state, planner, config, i + 1, scripted));
  }
  report.ledger = state.ledger;
  report.suspects = state.ledger.suspects();
  report.unhandled = state.unhandled;

  if (!config.out_dir.empty()) emit_reports(report, config.out_dir);
  return report;
}

json to_json(const ScenarioReport& report) {
  json rounds = json::array();
  for (const auto& r : report.rounds) rounds.push_back(round_json(r));

  json counters = json::object();
  for (const auto& [slot, n] : report.ledger.counters()) counters[slot] = n;
  json implications = json::object();
  for (const auto& [slot, imps] : report.ledger.implications()) {
    json list = json::array();
    for (const auto& imp : imps) {
      list.push_back({{"report_id", imp.report_id}, {"failed_slot", imp.failed_slot}, {"at", imp.at}});
    }
    implications[slot] = std::move(list);
  }

  json suspects = json::array();
  for (const auto& s : report.suspects) {
    suspects.push_back({{"component", s.slot},
                        {"count", s.count},
                        {"implicated_by", s.implicated_by},
                        {"first_at", s.first_at},
                        {"last_at", s.last_at}});
  }

  return {{"config", report.config},
          {"rounds", rounds},
          {"ledger",
           {{"threshold", report.ledger.threshold()},
            {"counters", counters},
            {"implications", implications}}},
          {"suspects", suspects},
          {"unhandled", report.unhandled}};
}

std::string format_scenario_json(const ScenarioReport& report) {
  return to_json(report).dump() + '\n';
}

std::string format_rounds_csv(const ScenarioReport& report) {
  std::string out =
      "round,clock,fault_kind,fault_target,reports,plans,strategies,post_violations,unhandled\n";
  for (const auto& r : report.rounds) {
    std::size_t plans = 0;
    std::string strategies;
    for (const auto& d : r.decisions) {
      if (!strategies.empty()) strategies += ';';
      if (d.plan) {
        ++plans;
        strategies += to_string(d.plan->strategy);
      } else {
        strategies += "NO_MATCH";
      }
    }
    out += std::to_string(r.index) + ',' + std::to_string(r.clock_end) + ',' +
           std::string(to_string(r.fault.kind)) + ',' +
           detail::csv_field(r.fault.target_text()) + ',' + std::to_string(r.reports.size()) +
           ',' + std::to_string(plans) + ',' + detail::csv_field(strategies) + ',' +
           std::to_string(r.post_violations.size()) + ',' + std::to_string(r.unhandled) + '\n';
  }
  return out;
}

void emit_reports(const ScenarioReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::kIo, "cannot create " + out_dir.string() + ": " + ec.message());
  detail::write_file(out_dir / "scenario.json", format_scenario_json(report));
  detail::write_file(out_dir / "rounds.csv", format_rounds_csv(report));
  write_suspect_report(report.suspects, out_dir / "suspects.csv");
}

}  // namespace healsim
