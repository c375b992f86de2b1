#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cobalt/harness/analyze.hpp"
#include "cobalt/harness/config.hpp"
#include "cobalt/harness/oracle.hpp"
#include "cobalt/harness/runners.hpp"
#include "cobalt/harness/sweep.hpp"

using namespace cobalt;
using namespace cobalt::harness;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string parse_error(const std::string& text) {
  try {
    parse_scenario(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ErrorsCarryLine) {
  EXPECT_EQ(parse_error("[nodes]\nn0 n1\n[bogus]\n").rfind("t.cfg:3:", 0), 0U);
  EXPECT_NE(parse_error("[nodes]\nn0\n[subsets]\nn0 = {n9} t=0 q=1\n").find("t.cfg:4:"), std::string::npos);
  EXPECT_NE(parse_error("[protocol]\nkind = warp\n"), "");
  EXPECT_NE(parse_error("[nodes]\nn0 n0\n"), "");
}

TEST(Config, ValidateCatchesBrokenLaws) {
  auto s = parse_scenario("[nodes]\nn0 n1 n2\n[subsets]\n* = {n0 n1 n2} t=1 q=2\n");
  EXPECT_THROW(s.trust.validate(), ConfigError);
}

TEST(Config, FormatRoundTripsEveryScenario) {
  for (const auto& entry : std::filesystem::directory_iterator(COBALT_SCENARIO_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    const Scenario s = load_scenario(entry.path().string());
    const std::string once = format_scenario(s);
    EXPECT_EQ(format_scenario(parse_scenario(once)), once) << entry.path();
  }
}

TEST(Config, CompleteNetworkShorthand) {
  const Scenario s = complete_network(7, 2, 5, ProtocolKind::Rbc);
  EXPECT_EQ(s.trust.size(), 7U);
  EXPECT_EQ(s.trust.name(NodeId{6}), "n6");
  EXPECT_NO_THROW(s.trust.validate());
}

TEST(Runs, RecordIsPureFunctionOfSeed) {
  const Scenario s = load_scenario(COBALT_SCENARIO_DIR "/abba_split.cfg");
  const auto a = run_scenario(s, 7);
  const auto b = run_scenario(s, 7);
  EXPECT_EQ(a.record.str(), b.record.str());
  EXPECT_NE(a.record.digest(), run_scenario(s, 8).record.digest());
}

TEST(Runs, MatchesGoldenRecord) {
  const Scenario s = load_scenario(COBALT_SCENARIO_DIR "/abba_split.cfg");
  EXPECT_EQ(run_scenario(s, 7).record.str(), slurp(COBALT_GOLDEN_DIR "/abba_split.seed7.jsonl"));
}

TEST(Runs, EveryProtocolPassesOnShippedScenarios) {
  for (const char* name : {"rbc_equivocate", "abba_split", "mvba27", "crs"}) {
    const Scenario s = load_scenario(std::string(COBALT_SCENARIO_DIR "/") + name + ".cfg");
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto r = run_scenario(s, seed);
      EXPECT_TRUE(r.passed()) << name << " " << seed;
      EXPECT_TRUE(r.terminated) << name << " " << seed;
    }
  }
}

TEST(Sweep, DigestIndependentOfWorkers) {
  const Scenario s = load_scenario(COBALT_SCENARIO_DIR "/rbc_equivocate.cfg");
  const auto one = sweep(s, 1, 12, 1);
  const auto three = sweep(s, 1, 12, 3);
  EXPECT_EQ(one.digest(), three.digest());
  EXPECT_TRUE(one.passed());
  EXPECT_EQ(one.runs.size(), 12U);
  EXPECT_EQ(one.termination_rate, 1.0);
}

TEST(Sweep, StatsOverMetrics) {
  const Scenario s = load_scenario(COBALT_SCENARIO_DIR "/abba_split.cfg");
  const auto rep = sweep(s, 1, 20, 1);
  const auto& r = rep.metrics.at("rounds");
  EXPECT_LE(r.min, r.p50);
  EXPECT_LE(r.p50, r.p90);
  EXPECT_LE(r.p90, r.max);
  EXPECT_GE(r.mean, r.min);
  EXPECT_NE(format_sweep(rep, false).find("rounds"), std::string::npos);
}

TEST(Analyze, MatchesGolden) {
  const Scenario s = load_scenario(COBALT_SCENARIO_DIR "/bridge.cfg");
  const auto rep = analyze(s);
  EXPECT_TRUE(rep.ok());
  EXPECT_EQ(format_analysis(rep, false), slurp(COBALT_GOLDEN_DIR "/bridge.analyze.txt"));
  EXPECT_EQ(format_analysis(rep, true), slurp(COBALT_GOLDEN_DIR "/bridge.analyze.jsonl"));
}

TEST(Analyze, ReportsMismatchedExpectation) {
  Scenario s = load_scenario(COBALT_SCENARIO_DIR "/bridge.cfg");
  s.expect.links.push_back({"a1", "b2", Linkage::FullyLinked});
  const auto rep = analyze(s);
  EXPECT_FALSE(rep.ok());
  ASSERT_EQ(rep.mismatches.size(), 1U);
}

TEST(Analyze, ReportsBrokenSubset) {
  const auto s = parse_scenario("[nodes]\nn0 n1 n2\n[subsets]\n* = {n0 n1 n2} t=1 q=2\n");
  const auto rep = analyze(s);
  // Three owners, each breaking consistency and progress.
  EXPECT_EQ(rep.subset_violations.size(), 6U);
  EXPECT_FALSE(rep.classified);
  EXPECT_FALSE(rep.ok());
}

TEST(Oracle, ParameterLaws) {
  const auto v = oracle_parameter_laws(10);
  EXPECT_TRUE(v.ok());
  EXPECT_GT(v.cases, 0U);
}

TEST(Oracle, TransferAndBlockingHoldForValidTriples) {
  EXPECT_TRUE(oracle_transfer(6).ok());
  EXPECT_TRUE(oracle_blocking(5).ok());
}

TEST(Oracle, ControlsFindCounterexamples) {
  EXPECT_GT(oracle_transfer(6, true).counterexamples, 0U);
  EXPECT_GT(oracle_blocking(5, true).counterexamples, 0U);
}

TEST(Oracle, QuorumModel) {
  EXPECT_TRUE(oracle_quorum_model(10, 8, 10, 8, 7, true).ok());
  EXPECT_TRUE(oracle_quorum_model(10, 8, 10, 8, 6, false).ok());
  EXPECT_FALSE(oracle_quorum_model(10, 8, 10, 8, 6, true).ok());
}

TEST(Oracle, InstanceFiles) {
  EXPECT_TRUE(run_oracle_instance("check = laws\nmax_n = 6\n", "i").ok());
  EXPECT_TRUE(run_oracle_instance("check = quorum\nn_i = 10\nq_i = 10\nn_j = 10\nq_j = 10\noverlap = 1\nexpect = linked\n", "i").ok());
  EXPECT_THROW(run_oracle_instance("check = nope\n", "i"), ConfigError);
  EXPECT_TRUE(run_oracle_instance("check = laws\nmax_n = 99\n", "i").refused);
}

TEST(Oracle, RbcRefusesOtherSizes) {
  const auto v = oracle_rbc(5, 1000);
  EXPECT_TRUE(v.refused);
  EXPECT_FALSE(v.notes.empty());
}
