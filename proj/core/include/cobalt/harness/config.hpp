#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cobalt/topology.hpp"
#include "cobalt/types.hpp"

namespace cobalt::harness {

enum class ProtocolKind { Rbc, Abba, Mvba, Dabc, TxOrder, Crs };
std::string_view protocol_name(ProtocolKind k);
std::optional<ProtocolKind> parse_protocol(std::string_view s);

// Scripted misbehaviour of an actively Byzantine participant.
enum class Behaviour { Silent, Equivocate, TwoFaced, Noise };
std::string_view behaviour_name(Behaviour b);
std::optional<Behaviour> parse_behaviour(std::string_view s);

enum class Strategy { Random, Fifo, TargetDelay, Partition, Rush };
std::string_view strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view s);

struct NodeFault {
  FaultStatus status = FaultStatus::Correct;
  Tick crash_at = 0;
  Behaviour behaviour = Behaviour::Equivocate;
};

struct AdversarySpec {
  Strategy strategy = Strategy::Random;
  std::vector<std::string> targets;
  Tick max_delay = 5;
  std::uint64_t fairness = 5000;
};

// Randomizing key held by the owner's essential subsets. Non-bootstrap keys are
// admitted by ratifying an "ALLOW <id>" amendment.
struct KeySpec {
  std::string id;
  std::string owner;
  bool bootstrap = true;
};

struct ProposalSpec {
  std::string proposer;
  Tick at = 0;
  std::uint64_t slot = 0;
  std::string payload;
};

struct ViewConfig {
  std::vector<std::string> members;
  std::uint32_t t = 0;
  // Tick at which every member crashes; "random" draws it per seed from crash_window.
  std::optional<Tick> crash_at;
  bool crash_random = false;
  std::optional<Behaviour> byzantine;
};

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::Abba;
  bool pipelining = false;
  // rbc
  std::string broadcaster;
  std::string content = "m";
  // abba: one entry per node, -1 draws the input from the run seed
  std::vector<int> inputs;
  // mvba
  std::uint32_t valid_inputs = 3;
  Tick input_spread = 0;
  // dabc
  std::vector<std::string> oppose;
  std::vector<Tick> waits;
  std::size_t max_pending = 64;
  // txorder
  Tick block_every = 4;
  Tick view_timeout = 60;
  Tick escalate_timeout = 3000;
  Tick crash_window_lo = 10;
  Tick crash_window_hi = 200;
  // crs
  std::vector<std::string> compromised;
};

struct TimeSpec {
  Tick interval = 10;
  Tick advance = 0;
};

struct RunSpec {
  std::uint64_t seed = 1;
  Tick ticks = 20000;
  std::uint64_t steps = 3000000;
  bool events = true;
};

struct QuorumModelSpec {
  std::string name;
  std::uint64_t n_i = 0;
  std::uint64_t q_i = 0;
  std::uint64_t n_j = 0;
  std::uint64_t q_j = 0;
  std::uint64_t overlap = 0;
};

struct Expectation {
  std::optional<bool> valid;
  struct Link {
    std::string a;
    std::string b;
    Linkage expected;
  };
  std::vector<Link> links;
};

struct Scenario {
  std::string name;
  TrustConfig trust;
  std::vector<NodeFault> faults;
  AdversarySpec adversary;
  std::vector<KeySpec> keys;
  std::vector<ProposalSpec> proposals;
  TimeSpec time;
  ProtocolSpec protocol;
  std::vector<ViewConfig> views;
  RunSpec run;
  std::vector<QuorumModelSpec> quorum_models;
  Expectation expect;

  FaultAssignment fault_assignment() const;
  // Checks cross references that the parser cannot (names, ranges, protocol needs).
  void validate() const;
};

// Parse errors carry "<origin>:<line>: " context.
Scenario parse_scenario(std::string_view text, std::string_view origin = "<config>");
Scenario load_scenario(const std::string& path);
// Canonical text form; parse_scenario(format_scenario(s)) reproduces s.
std::string format_scenario(const Scenario& s);

// Shorthand for tests: n nodes named n0..n{n-1}, one complete-network subset for all.
Scenario complete_network(std::size_t n, std::uint32_t t, std::uint32_t q, ProtocolKind kind);

}  // namespace cobalt::harness
