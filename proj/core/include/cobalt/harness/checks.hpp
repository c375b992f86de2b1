#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cobalt/abba.hpp"
#include "cobalt/dabc.hpp"
#include "cobalt/topology.hpp"

namespace cobalt::harness {

using Violations = std::vector<std::string>;

// Pairs (i, j) of honest Cobalt nodes that share a subset within its fault bound.
std::vector<std::pair<NodeId, NodeId>> linked_honest_pairs(const TrustConfig& trust, const FaultAssignment& faults);

struct RbcLog {
  std::optional<std::string> accepted;
};

// Consistency over linked honest pairs; validity when the broadcaster is correct.
void check_rbc(const TrustConfig& trust, const FaultAssignment& faults, NodeId broadcaster,
               const std::string& content, const std::vector<RbcLog>& logs, Violations& out);

struct AbbaLog {
  std::optional<bool> input;
  std::optional<bool> decided;
  std::vector<BinaryAgreement::CoinStep> steps;
};

// Consistency, strong validity (decision reachable through honest UNL links from an
// unblocked node that input it), and the post-coin estimate properties.
void check_abba(const TrustConfig& trust, const FaultAssignment& faults, const std::vector<AbbaLog>& logs,
                Violations& out);

// Ordering between honest CONF messages and the adversary learning a coin.
struct CoinVisibility {
  // (coin tag, value) -> event clock of the first honest CONF(r) whose set contains value.
  std::map<std::pair<std::string, bool>, std::uint64_t> first_conf;
  // coin tag -> event clock when the adversary could first compute the coin.
  std::map<std::string, std::uint64_t> visible;
};

void check_coin_blindness(const std::string& abba_instance, const std::vector<AbbaLog>& logs,
                          const FaultAssignment& faults, const CoinVisibility& vis, Violations& out);

struct MvbaLog {
  std::optional<std::string> decided;
  std::optional<std::int64_t> decision_round;
  std::vector<std::set<std::string>> values;  // values[r] at run end
};

// Consistency, external validity, and per-round shrinkage of the honest candidate union.
void check_mvba(const TrustConfig& trust, const FaultAssignment& faults, const std::vector<MvbaLog>& logs,
                bool strongly_connected, Violations& out);

struct WaitResult {
  Tick tau = 0;
  Tick returned_at = 0;
  std::vector<Ratification> known;
};

struct DabcLog {
  std::vector<Ratification> ratified;
  std::vector<AtomicBroadcast::VerdictRecord> verdicts;
  std::vector<AtomicBroadcast::PendingEvent> pending_log;
  std::vector<WaitResult> waits;
};

// Agreement, linearizability, democracy witness, full knowledge, slot closure.
void check_dabc(const TrustConfig& trust, const FaultAssignment& faults, const std::vector<DabcLog>& logs,
                bool terminated, Violations& out);

struct TxLog {
  std::map<std::int64_t, std::string> accepted;
  std::size_t internal_conflicts = 0;
  std::int64_t view = 1;
  std::map<std::int64_t, std::int64_t> mins;
  bool fallback = false;
  std::vector<std::string> chain;
  std::set<std::string> ever_pinned;
};

// Cross-view sequence safety, agreement on each adopted view's floor, and (for
// terminated runs) that every pinned fallback block was ratified everywhere.
void check_txorder(const TrustConfig& trust, const FaultAssignment& faults, const std::vector<TxLog>& logs,
                   bool terminated, Violations& out);

}  // namespace cobalt::harness
