// healsim: run self-healing scenarios, serve the planner, check rule files.
//
// Exit codes: 0 success, 1 config or parse error, 2 planner unreachable.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "healsim/error.hpp"
#include "healsim/planner.hpp"
#include "healsim/rules.hpp"
#include "healsim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPlannerUnreachable = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw healsim::Error(healsim::Errc::kIo, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_planner_failure(healsim::Errc code) {
  using healsim::Errc;
  return code == Errc::kConnectionFailed || code == Errc::kTimeout ||
         code == Errc::kRemoteError || code == Errc::kMalformedFrame;
}

int cmd_validate_rules(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
    auto rules = healsim::parse_rules(text);
    std::cout << path << ": ok, " << rules.rules.size() << " rule(s)\n";
    return kExitOk;
  } catch (const healsim::RuleSyntaxError& e) {
    std::cerr << path << ":" << e.what() << " [" << healsim::to_string(e.code()) << "]\n";
  } catch (const healsim::Error& e) {
    std::cerr << "healsim: " << e.what() << "\n";
  }
  return kExitConfig;
}

healsim::PlanServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->interrupt();
}

int cmd_serve(const std::string& rules_path, const std::string& bind) {
  healsim::RuleSet rules;
  try {
    rules = healsim::parse_rules(read_file(rules_path));
  } catch (const healsim::RuleSyntaxError& e) {
    std::cerr << rules_path << ":" << e.what() << "\n";
    return kExitConfig;
  } catch (const healsim::Error& e) {
    std::cerr << "healsim: " << e.what() << "\n";
    return kExitConfig;
  }
  auto endpoint = healsim::parse_endpoint(bind);
  if (!endpoint) {
    std::cerr << "healsim: --bind expects HOST:PORT, got '" << bind << "'\n";
    return kExitConfig;
  }
  try {
    healsim::PlanServer server(std::move(rules), *endpoint);
    std::cout << "listening on " << endpoint->host << ":" << server.port() << std::endl;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run();
    g_server = nullptr;
  } catch (const healsim::Error& e) {
    std::cerr << "healsim: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_run(healsim::ScenarioConfig config) {
  try {
    auto report = healsim::run_scenario(config);
    std::int64_t clean = 0;
    for (const auto& r : report.rounds) clean += r.verified_clean() ? 1 : 0;
    std::cout << "rounds: " << report.rounds.size() << ", verified clean: " << clean
              << ", unhandled: " << report.unhandled
              << ", root-cause suspects: " << report.suspects.size() << "\n";
    for (const auto& s : report.suspects) {
      std::cout << "  suspect " << s.slot << " (count " << s.count << ")\n";
    }
    if (!config.out_dir.empty()) std::cout << "reports written to " << config.out_dir.string() << "\n";
    return kExitOk;
  } catch (const healsim::RuleSyntaxError& e) {
    std::cerr << "healsim: rules:" << e.what() << "\n";
    return kExitConfig;
  } catch (const healsim::Error& e) {
    std::cerr << "healsim: " << e.what() << "\n";
    return is_planner_failure(e.code()) ? kExitPlannerUnreachable : kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-healing architecture simulator"};
  app.require_subcommand(1);

  healsim::ScenarioConfig config;
  std::string rules_path, blueprint_path, script_path, out_dir;
  long long timeout_ms = healsim::kDefaultPlannerTimeout.count();
  auto* run = app.add_subcommand("run", "Run an inject/heal/verify scenario");
  run->add_option("--seed", config.seed, "PRNG seed")->required();
  run->add_option("--rounds", config.rounds, "Number of rounds")->required()->check(
      CLI::NonNegativeNumber);
  run->add_option("--rules", rules_path, "Rule file (default: bundled rules)");
  run->add_option("--blueprint", blueprint_path, "Blueprint JSON (default: bundled)");
  run->add_option("--planner", config.planner, "inproc or tcp://HOST:PORT")
      ->capture_default_str();
  run->add_option("--planner-timeout-ms", timeout_ms, "Remote planner timeout")
      ->capture_default_str();
  run->add_option("--exception-threshold", config.exception_threshold)->capture_default_str();
  run->add_option("--rootcause-threshold", config.rootcause_threshold)->capture_default_str();
  run->add_option("--script", script_path, "JSON list of scripted faults");
  run->add_option("--out", out_dir, "Directory for scenario.json, rounds.csv, suspects.csv");

  std::string serve_rules, bind = "127.0.0.1:" + std::to_string(healsim::kDefaultPlannerPort);
  auto* serve = app.add_subcommand("serve-planner", "Serve the rule engine over TCP");
  serve->add_option("--rules", serve_rules, "Rule file")->required();
  serve->add_option("--bind", bind, "HOST:PORT to listen on")->capture_default_str();

  std::string check_path;
  auto* check = app.add_subcommand("validate-rules", "Parse a rule file and report errors");
  check->add_option("path", check_path, "Rule file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*check) return cmd_validate_rules(check_path);
  if (*serve) return cmd_serve(serve_rules, bind);

  if (!rules_path.empty()) config.rules_path = rules_path;
  if (!blueprint_path.empty()) config.blueprint_path = blueprint_path;
  config.planner_timeout = std::chrono::milliseconds(timeout_ms);
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (!script_path.empty()) {
    try {
      config.script = healsim::load_script_file(script_path);
      config.script_path = script_path;
    } catch (const healsim::Error& e) {
      std::cerr << "healsim: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  return cmd_run(std::move(config));
}
