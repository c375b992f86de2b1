#pragma once

#include <string>
#include <vector>

#include "cobalt/harness/config.hpp"

namespace cobalt::harness {

struct AnalysisReport {
  std::vector<std::string> names;
  // "<owner> subset <k> (n,t,q): <inequality>" for each broken law.
  std::vector<std::string> subset_violations;
  std::vector<std::vector<Linkage>> linkage;  // honest-pair matrix, Unlinked off the honest set
  bool classified = false;  // false when a subset breaks the laws
  std::vector<std::string> healthy;
  std::vector<std::string> unblocked;
  std::vector<Connectivity> connectivity;
  struct Model {
    std::string name;
    bool linked = false;
  };
  std::vector<Model> quorum_models;
  std::vector<std::string> mismatches;  // failed [expect] entries

  bool ok() const { return subset_violations.empty() && mismatches.empty(); }
};

AnalysisReport analyze(const Scenario& scenario);

std::string format_analysis(const AnalysisReport& report, bool records);

}  // namespace cobalt::harness
