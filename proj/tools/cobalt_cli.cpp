#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "cobalt/harness/analyze.hpp"
#include "cobalt/harness/config.hpp"
#include "cobalt/harness/oracle.hpp"
#include "cobalt/harness/runners.hpp"
#include "cobalt/harness/sweep.hpp"

namespace {

using namespace cobalt;
using namespace cobalt::harness;

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoull(s);
      return {v, v};
    }
    return {std::stoull(s.substr(0, dots)), std::stoull(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ConfigError("seed range must look like A..B, got '" + s + "'");
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cobalt protocol simulator and analysis harness"};
  app.require_subcommand(1);
  std::string format = "text";
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "records"}));

  std::string path;
  std::uint64_t seed = 1;
  std::string seeds = "1..100";
  unsigned workers = 0;

  auto* analyze_cmd = app.add_subcommand("analyze", "Validate a trust configuration and report linkage");
  analyze_cmd->add_option("config", path, "Configuration file")->required();
  auto* run_cmd = app.add_subcommand("run", "Execute one seeded run and check its invariants");
  run_cmd->add_option("scenario", path, "Scenario file")->required();
  run_cmd->add_option("--seed", seed, "Run seed");
  auto* sweep_cmd = app.add_subcommand("sweep", "Execute a seed range and aggregate statistics");
  sweep_cmd->add_option("scenario", path, "Scenario file")->required();
  sweep_cmd->add_option("--seeds", seeds, "Inclusive seed range A..B");
  sweep_cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");
  auto* oracle_cmd = app.add_subcommand("oracle", "Run an exhaustive check on a small instance");
  oracle_cmd->add_option("instance", path, "Instance file")->required();

  for (auto* sub : {analyze_cmd, run_cmd, sweep_cmd, oracle_cmd}) {
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "records"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }
  const bool records = format == "records";

  try {
    if (*analyze_cmd) {
      const auto report = analyze(load_scenario(path));
      std::cout << format_analysis(report, records);
      return report.ok() ? kPass : kViolation;
    }
    if (*run_cmd) {
      const auto result = run_scenario(load_scenario(path), seed);
      if (records) {
        std::cout << result.record.str();
      } else {
        std::cout << "scenario " << result.scenario << "  seed " << result.seed << '\n';
        std::cout << "terminated " << (result.terminated ? "yes" : "no") << "  ticks " << result.stats.ticks
                  << "  steps " << result.stats.steps << "  messages " << result.stats.sent << '\n';
        for (const auto& [k, v] : result.metrics) std::cout << "  " << k << " = " << v << '\n';
        for (const auto& v : result.violations) std::cout << "VIOLATION " << v << '\n';
        std::cout << "digest " << result.record.digest() << '\n';
        std::cout << (result.passed() ? "PASS" : "FAIL") << '\n';
      }
      return result.passed() ? kPass : kViolation;
    }
    if (*sweep_cmd) {
      const auto [first, last] = parse_range(seeds);
      const auto report = sweep(load_scenario(path), first, last, workers);
      std::cout << format_sweep(report, records);
      return report.passed() ? kPass : kViolation;
    }
    if (*oracle_cmd) {
      const auto verdict = run_oracle_instance(slurp(path), path);
      std::cout << format_verdict(verdict, records);
      return verdict.ok() ? kPass : kViolation;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
