#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cobalt/harness/config.hpp"

namespace cobalt::harness {

struct RunSummary {
  std::uint64_t seed = 0;
  bool terminated = false;
  std::string digest;
  std::map<std::string, double> metrics;
  std::vector<std::string> violations;
};

struct MetricStats {
  double mean = 0;
  double min = 0;
  double max = 0;
  double p50 = 0;
  double p90 = 0;
};

struct SweepReport {
  std::string scenario;
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  std::vector<RunSummary> runs;  // sorted by seed
  std::map<std::string, MetricStats> metrics;
  double termination_rate = 0;
  std::uint64_t messages = 0;
  // "seed S: <violation>" for every failing run.
  std::vector<std::string> violations;

  bool passed() const { return violations.empty() && termination_rate == 1.0; }
  // Hex SHA-256 over the per-seed digests, stable across worker counts.
  std::string digest() const;
};

// Runs seeds [first, last] across `workers` threads (0 picks the hardware count).
SweepReport sweep(const Scenario& scenario, std::uint64_t first, std::uint64_t last, unsigned workers = 0);

std::string format_sweep(const SweepReport& report, bool records);

}  // namespace cobalt::harness
