#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cobalt/harness/config.hpp"
#include "cobalt/harness/record.hpp"
#include "cobalt/simnet.hpp"

namespace cobalt::harness {

struct RunResult {
  std::string scenario;
  std::uint64_t seed = 0;
  bool terminated = false;
  SimStats stats;
  RunRecord record;
  std::vector<std::string> violations;
  std::map<std::string, double> metrics;

  bool passed() const { return violations.empty(); }
};

// Executes one seeded run of the scenario's protocol and evaluates every invariant
// that applies to it. The record is a pure function of (scenario, seed).
RunResult run_scenario(const Scenario& scenario, std::uint64_t seed);

}  // namespace cobalt::harness
