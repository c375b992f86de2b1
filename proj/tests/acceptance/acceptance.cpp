// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cobalt/harness/config.hpp"
#include "cobalt/harness/oracle.hpp"
#include "cobalt/harness/runners.hpp"
#include "cobalt/harness/sweep.hpp"

using namespace cobalt;
using namespace cobalt::harness;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      detail << " [" << why << "]";
    }
  }
};

std::string scenario_path(const std::string& name) { return std::string(COBALT_SCENARIO_DIR "/") + name; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void set_fault(Scenario& s, const std::string& name, FaultStatus st, Behaviour b = Behaviour::Equivocate,
               Tick crash_at = 0) {
  const auto id = s.trust.find(name);
  if (!id) throw ConfigError("unknown node " + name);
  s.faults[id->value] = NodeFault{st, crash_at, b};
}

// Summarises the first violation of a failing sweep.
std::string first_violation(const SweepReport& r) {
  if (!r.violations.empty()) return r.violations.front();
  for (const auto& run : r.runs) {
    if (!run.terminated) return "seed " + std::to_string(run.seed) + " did not terminate";
  }
  return "";
}

// ---- 1 -------------------------------------------------------------------------------

void parameter_laws(Outcome& o) {
  const auto v = oracle_parameter_laws(12);
  o.detail << "triples=" << v.cases << " counterexamples=" << v.counterexamples;
  o.require(v.ok(), v.notes.empty() ? "oracle disagreed" : v.notes.front());
}

// ---- 2 -------------------------------------------------------------------------------

void support_oracles(Outcome& o) {
  const auto transfer = oracle_transfer(7);
  const auto blocking = oracle_blocking(7);
  const auto transfer_ctl = oracle_transfer(7, true);
  const auto blocking_ctl = oracle_blocking(7, true);
  o.detail << "transfer cases=" << transfer.cases << " cex=" << transfer.counterexamples
           << "; blocking cases=" << blocking.cases << " cex=" << blocking.counterexamples
           << "; controls cex=" << transfer_ctl.counterexamples << "/" << blocking_ctl.counterexamples;
  o.require(transfer.ok(), "transfer counterexample");
  o.require(blocking.ok(), "dual strong support found");
  o.require(transfer_ctl.counterexamples > 0 && blocking_ctl.counterexamples > 0, "controls found nothing");
}

// ---- 3 -------------------------------------------------------------------------------

void apply_strategy(Scenario& s, int k) {
  switch (k % 5) {
    case 0: s.adversary.strategy = Strategy::Random; break;
    case 1: s.adversary.strategy = Strategy::Fifo; break;
    case 2:
      s.adversary.strategy = Strategy::TargetDelay;
      s.adversary.targets = {"n1"};
      break;
    case 3:
      s.adversary.strategy = Strategy::Partition;
      s.adversary.targets = {"n1", "n2"};
      break;
    default:
      s.adversary.strategy = Strategy::Rush;
      s.adversary.targets = {"n0"};
      break;
  }
}

// Complete network with the broadcaster plus t - 1 further nodes Byzantine.
Scenario rbc_in_bounds(std::size_t n, int strategy) {
  const auto t = static_cast<std::uint32_t>((n - 1) / 3);
  Scenario s = complete_network(n, t, static_cast<std::uint32_t>(n) - t, ProtocolKind::Rbc);
  s.name = "rbc-n" + std::to_string(n) + "-s" + std::to_string(strategy);
  set_fault(s, "n0", FaultStatus::ActivelyByzantine, Behaviour::Equivocate);
  const Behaviour extra[] = {Behaviour::TwoFaced, Behaviour::Noise};
  for (std::uint32_t k = 1; k < t; ++k) {
    set_fault(s, "n" + std::to_string(n - k), FaultStatus::ActivelyByzantine, extra[k % 2]);
  }
  apply_strategy(s, strategy);
  s.run.events = false;
  return s;
}

// Focal clique n0..n3 within bounds; every honest node outside it trusts a subset that
// holds more Byzantine members than its threshold.
Scenario rbc_misconfigured(std::size_t n, int strategy) {
  Scenario s;
  s.name = "rbc-misconfigured-n" + std::to_string(n) + "-s" + std::to_string(strategy);
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(s.trust.add_node("n" + std::to_string(i)));
  const std::vector<NodeId> focal(ids.begin(), ids.begin() + 4);
  for (NodeId id : focal) s.trust.add_subset(id, EssentialSubset(focal, 1, 3));
  s.faults.assign(n, NodeFault{});
  s.protocol.kind = ProtocolKind::Rbc;
  s.protocol.broadcaster = "n0";
  set_fault(s, "n0", FaultStatus::ActivelyByzantine, Behaviour::Equivocate);
  if (n == 5) {
    s.trust.add_subset(ids[4], EssentialSubset({ids[0], ids[4]}, 0, 2));
  } else {
    set_fault(s, "n4", FaultStatus::ActivelyByzantine, strategy % 2 ? Behaviour::Noise : Behaviour::Equivocate);
    s.trust.add_subset(ids[4], EssentialSubset({ids[0], ids[1], ids[4], ids[5]}, 1, 3));
    std::vector<NodeId> outer{ids[0], ids[4]};
    for (std::size_t i = 5; i < n; ++i) outer.push_back(ids[i]);
    if (outer.size() < 4) outer.insert(outer.begin() + 1, ids[1]);
    for (std::size_t i = 5; i < n; ++i) s.trust.add_subset(ids[i], EssentialSubset(outer, 1, 3));
  }
  apply_strategy(s, strategy);
  s.run.events = false;
  return s;
}

void rbc_suite(Outcome& o) {
  std::vector<Scenario> configs;
  for (std::size_t n = 4; n <= 7; ++n) {
    for (int k = 0; k < 5; ++k) configs.push_back(rbc_in_bounds(n, k));
  }
  std::size_t misconfigured = 0;
  for (std::size_t n = 5; n <= 7; ++n) {
    for (int k = 0; k < 5; ++k) {
      configs.push_back(rbc_misconfigured(n, k));
      ++misconfigured;
    }
  }
  constexpr std::uint64_t kRuns = 1000;
  std::uint64_t done = 0;
  std::uint64_t violations = 0;
  std::uint64_t unterminated = 0;
  std::uint64_t misconfigured_runs = 0;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    configs[c].validate();
    configs[c].trust.validate();
    const std::uint64_t share = kRuns / configs.size() + (c < kRuns % configs.size() ? 1 : 0);
    const auto rep = sweep(configs[c], done + 1, done + share);
    done += share;
    if (c >= configs.size() - misconfigured) misconfigured_runs += share;
    violations += rep.violations.size();
    for (const auto& r : rep.runs) unterminated += r.terminated ? 0 : 1;
    if (!rep.violations.empty()) o.require(false, configs[c].name + ": " + rep.violations.front());
  }
  o.detail << "runs=" << done << " (misconfigured " << misconfigured_runs << ") violations=" << violations
           << " drained=" << done - unterminated;
  o.require(done == kRuns, "run count");
  o.require(unterminated == 0, "budget exhausted before quiescence");
}

// ---- 4 -------------------------------------------------------------------------------

struct AbbaStrategy {
  std::string name;
  std::function<void(Scenario&)> apply;
};

std::vector<AbbaStrategy> abba_strategies() {
  std::vector<AbbaStrategy> out;
  out.push_back({"crash-at-start", [](Scenario& s) { set_fault(s, "n3", FaultStatus::Crashed, {}, 0); }});
  out.push_back({"crash-mid-run", [](Scenario& s) { set_fault(s, "n3", FaultStatus::Crashed, {}, 3); }});
  const std::pair<const char*, Behaviour> behaviours[] = {{"equivocate", Behaviour::Equivocate},
                                                          {"two-faced", Behaviour::TwoFaced},
                                                          {"noise", Behaviour::Noise},
                                                          {"silent", Behaviour::Silent}};
  struct Sched {
    const char* name;
    Strategy strategy;
    std::vector<std::string> targets;
  };
  const Sched scheds[] = {{"random", Strategy::Random, {}},
                          {"delay-n0", Strategy::TargetDelay, {"n0"}},
                          {"partition", Strategy::Partition, {"n0", "n1"}},
                          {"byz-first", Strategy::Rush, {"n3"}}};
  for (const auto& [bname, b] : behaviours) {
    for (const auto& sc : scheds) {
      out.push_back({std::string("byzantine-") + bname + "/" + sc.name, [b = b, sc](Scenario& s) {
                       set_fault(s, "n3", FaultStatus::ActivelyByzantine, b);
                       s.adversary.strategy = sc.strategy;
                       s.adversary.targets = sc.targets;
                     }});
    }
  }
  return out;
}

void abba_suite(Outcome& o) {
  constexpr std::uint64_t kSeeds = 500;
  constexpr double kRoundCap = 30;
  std::uint64_t runs = 0;
  std::uint64_t over_cap = 0;
  double split_sum = 0;
  std::uint64_t split_runs = 0;
  double worst = 0;
  for (const auto& strat : abba_strategies()) {
    for (bool split : {false, true}) {
      Scenario s = complete_network(4, 1, 3, ProtocolKind::Abba);
      s.name = "abba-" + strat.name + (split ? "-split" : "-random");
      s.protocol.inputs = split ? std::vector<int>{0, 0, 1, 1} : std::vector<int>{-1, -1, -1, -1};
      s.run.events = false;
      strat.apply(s);
      const auto rep = sweep(s, 1, kSeeds);
      runs += rep.runs.size();
      for (const auto& r : rep.runs) {
        const double rounds = r.metrics.count("rounds") ? r.metrics.at("rounds") : kRoundCap + 1;
        if (!r.terminated || rounds > kRoundCap) ++over_cap;
        worst = std::max(worst, rounds);
        if (split) {
          split_sum += rounds;
          ++split_runs;
        }
      }
      if (!rep.violations.empty()) o.require(false, s.name + ": " + rep.violations.front());
      if (rep.termination_rate < 1.0) o.require(false, s.name + ": " + first_violation(rep));
    }
  }
  const double split_mean = split_sum / static_cast<double>(split_runs);
  o.detail << "runs=" << runs << " within-cap=" << runs - over_cap << " max-rounds=" << worst
           << " split-mean-rounds=" << fmt(split_mean);
  o.require(over_cap == 0, "run exceeded the 30-round cap");
  o.require(split_mean <= 4.0, "split mean above 4");
}

// ---- 5 -------------------------------------------------------------------------------

void mvba_suite(Outcome& o) {
  std::vector<double> means;
  for (std::uint32_t n : {3U, 9U, 27U}) {
    Scenario s = complete_network(4, 1, 3, ProtocolKind::Mvba);
    s.name = "mvba-" + std::to_string(n);
    s.protocol.valid_inputs = n;
    s.run.events = false;
    const auto rep = sweep(s, 1, 200);
    const double mean = rep.metrics.at("rounds").mean;
    means.push_back(mean);
    o.detail << "N=" << n << " mean=" << fmt(mean) << " bound=" << fmt(std::log(n) / std::log(3.0) + 1.5) << "; ";
    o.require(rep.passed(), s.name + ": " + first_violation(rep));
    o.require(mean <= std::log(n) / std::log(3.0) + 1.5, s.name + " mean above bound");
  }
  for (std::size_t i = 1; i < means.size(); ++i) o.require(means[i] - means[i - 1] <= 1.5, "growth above 1.5");
}

// ---- 6 -------------------------------------------------------------------------------

void dabc_suite(Outcome& o) {
  Scenario s = load_scenario(scenario_path("dabc_basic.cfg"));
  s.run.events = false;
  const auto rep = sweep(s, 1, 300);
  o.detail << "runs=" << rep.runs.size() << " violations=" << rep.violations.size()
           << " terminated=" << fmt(rep.termination_rate) << " mean-ratified=" << fmt(rep.metrics.at("ratified").mean);
  o.require(rep.passed(), first_violation(rep));
}

// ---- 7 -------------------------------------------------------------------------------

void crs_suite(Outcome& o) {
  Scenario s = load_scenario(scenario_path("crs.cfg"));
  const auto blind = sweep(s, 1, 2000);
  s.protocol.compromised = {"n2"};
  const auto control = sweep(s, 1, 2000);
  const double rate = blind.metrics.at("predict_success").mean;
  const double ctl = control.metrics.at("predict_success").mean;
  o.detail << "t-share rate=" << fmt(rate) << " compromised rate=" << fmt(ctl);
  o.require(blind.passed() && control.passed(), "coin run failed");
  o.require(std::abs(rate - 0.5) <= 0.05, "prediction rate outside 0.50 +/- 0.05");
  o.require(ctl >= 0.95, "control below 0.95");
}

// ---- 8 -------------------------------------------------------------------------------

Scenario txorder_base(const std::string& name) {
  Scenario s = complete_network(4, 1, 3, ProtocolKind::TxOrder);
  s.name = name;
  s.protocol.block_every = 4;
  s.run.events = false;
  return s;
}

void view_change_suite(Outcome& o) {
  Scenario crash = load_scenario(scenario_path("txorder_viewchange.cfg"));
  crash.run.events = false;
  const auto crash_rep = sweep(crash, 1, 300);
  const double adopted = crash_rep.metrics.at("adopted").min;
  o.detail << "crash runs=" << crash_rep.runs.size() << " min-adopted=" << fmt(adopted);
  o.require(crash_rep.passed(), "crashed view: " + first_violation(crash_rep));
  o.require(adopted == 1.0, "some correct node did not adopt v2");

  std::uint64_t byz_runs = 0;
  std::uint64_t seed = 1;
  for (const char* beh : {"equivocate", "two-faced", "noise", "silent"}) {
    Scenario s = txorder_base(std::string("byz-view-") + beh);
    s.protocol.view_timeout = 60;
    s.views = {ViewConfig{{"a1", "a2", "a3", "a4"}, 1, std::nullopt, false, parse_behaviour(beh)},
               ViewConfig{{"b1", "b2", "b3", "b4"}, 1, std::nullopt, false, std::nullopt}};
    s.run.ticks = 6000;
    s.validate();
    const auto rep = sweep(s, seed, seed + 74);
    seed += 75;
    byz_runs += rep.runs.size();
    o.require(rep.passed(), s.name + ": " + first_violation(rep));
  }
  o.detail << "; byzantine-view runs=" << byz_runs;

  Scenario fb = txorder_base("fallback");
  fb.protocol.view_timeout = 30;
  fb.protocol.escalate_timeout = 100;
  fb.views = {ViewConfig{{"a1", "a2", "a3", "a4"}, 1, Tick{0}, false, std::nullopt},
              ViewConfig{{"b1", "b2", "b3", "b4"}, 1, Tick{0}, false, std::nullopt}};
  set_fault(fb, "n3", FaultStatus::ActivelyByzantine, Behaviour::Equivocate);
  fb.proposals = {ProposalSpec{"p1", 5, 0, "blk-a"}, ProposalSpec{"p2", 8, 0, "blk-b"},
                  ProposalSpec{"p1", 40, 0, "blk-c"}};
  fb.run.ticks = 3000;
  const auto fb_rep = sweep(fb, 1, 300);
  o.detail << "; fallback runs=" << fb_rep.runs.size() << " terminated=" << fmt(fb_rep.termination_rate);
  o.require(fb_rep.passed(), "fallback: " + first_violation(fb_rep));
}

// ---- 9 -------------------------------------------------------------------------------

void determinism_suite(Outcome& o) {
  std::vector<Scenario> pool;
  for (const char* f : {"rbc_equivocate.cfg", "abba_split.cfg", "mvba27.cfg", "dabc_basic.cfg",
                        "txorder_viewchange.cfg", "crs.cfg", "bridge.cfg"}) {
    pool.push_back(load_scenario(scenario_path(f)));
  }
  for (int k = 0; k < 5; ++k) pool.push_back(rbc_in_bounds(4 + static_cast<std::size_t>(k % 4), k));
  for (int k = 0; k < 3; ++k) pool.push_back(rbc_misconfigured(5 + static_cast<std::size_t>(k), k));
  std::vector<std::pair<const Scenario*, std::uint64_t>> cases;
  for (std::size_t i = 0; i < 50; ++i) cases.emplace_back(&pool[i % pool.size()], 1000 + i);
  std::vector<std::string> first;
  for (const auto& [s, seed] : cases) first.push_back(run_scenario(*s, seed).record.str());
  std::size_t identical = 0;
  // Second pass in reverse order so no run can lean on state left by its predecessor.
  for (std::size_t i = cases.size(); i-- > 0;) {
    if (run_scenario(*cases[i].first, cases[i].second).record.str() == first[i]) ++identical;
  }
  const auto one = sweep(pool[1], 1, 40, 1);
  const auto many = sweep(pool[1], 1, 40, 4);
  o.detail << "identical=" << identical << "/" << cases.size() << " sweep digest stable=" << (one.digest() == many.digest());
  o.require(identical == cases.size(), "replay diverged");
  o.require(one.digest() == many.digest(), "sweep digest depends on worker count");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"parameter laws", parameter_laws},
      {"support oracles", support_oracles},
      {"rbc consistency and locality", rbc_suite},
      {"abba termination and rounds", abba_suite},
      {"mvba round growth", mvba_suite},
      {"dabc end to end", dabc_suite},
      {"crs unpredictability", crs_suite},
      {"view change", view_change_suite},
      {"determinism", determinism_suite},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu (%s): %s  %s  [%.1fs]\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
