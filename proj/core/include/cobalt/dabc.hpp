#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cobalt/message.hpp"
#include "cobalt/mvba.hpp"
#include "cobalt/rbc.hpp"
#include "cobalt/topology.hpp"

namespace cobalt {

struct Amendment {
  std::string payload;
  std::uint64_t slot = 0;

  std::string id() const;
  std::string encode() const;
  static std::optional<Amendment> decode(std::string_view content);

  friend bool operator==(const Amendment&, const Amendment&) = default;
};

struct Ratification {
  std::uint64_t slot = 0;
  Amendment amendment;
  Tick activation = 0;

  friend bool operator==(const Ratification&, const Ratification&) = default;
};

struct TimeParams {
  Tick interval = 10;
  Tick advance = 0;
};

// INIT message that starts the democratic broadcast of `a` by `proposer`.
Message make_proposal(NodeId proposer, std::uint64_t serial, const Amendment& a);

// Democratic atomic broadcast for one node: DRBC dissemination, boundary stamping
// via CHECK/ACCEPT, one agreement instance per slot, and the waiting query.
class AtomicBroadcast {
 public:
  // Returns true when the node supports `a` given everything ratified before it.
  using SupportPolicy = std::function<bool(const Amendment& a, const std::vector<Ratification>& prefix)>;

  struct Options {
    TimeParams time;
    bool pipelining = false;
    std::size_t max_pending_per_slot = 64;
  };

  struct VerdictRecord {
    std::string amendment_id;
    std::uint64_t slot;
    bool support;
  };

  struct PendingEvent {
    bool closed;  // false: pair admitted to P, true: slot closed
    std::uint64_t slot;
  };

  AtomicBroadcast(NodeId self, SubsetList es, Options opts, SupportPolicy policy);

  Actions tick(Tick tau);
  Actions handle(const Message& msg);
  Actions on_coin(const std::string& tag, const CoinValue& value);

  // Ratifications with activation < tau once the CHECK quorums for every boundary up
  // to tau - advance show only locally ratified slots; nullopt while still waiting.
  std::optional<std::vector<Ratification>> known_before(Tick tau) const;

  const std::vector<Ratification>& ratified() const { return ratified_; }
  const std::vector<VerdictRecord>& verdicts() const { return verdicts_; }
  const std::vector<PendingEvent>& pending_log() const { return pending_log_; }
  const std::set<std::string>& pending() const { return pending_; }
  std::size_t overflow() const { return overflow_; }
  Tick last_tick() const { return last_tick_; }
  const MultiValuedAgreement* slot_agreement(std::uint64_t slot) const;
  std::vector<std::uint64_t> slots() const;

  static std::string slot_instance(std::uint64_t slot);

 private:
  ReliableBroadcast* drbc_for(const std::string& instance);
  MultiValuedAgreement& mvba_for(std::uint64_t slot);
  Actions decide_verdicts(ReliableBroadcast& rbc);
  void admit(ReliableBroadcast& rbc);
  Actions on_check(const Message& msg);
  Actions on_accept(const Message& msg);
  Actions evaluate_accept(const std::string& pair, Tick tau);
  Actions after_mvba(std::uint64_t slot);
  Actions ratify_ready();
  bool slot_closed(std::uint64_t slot) const { return closed_.count(slot) != 0; }

  NodeId self_;
  SubsetList es_;
  Options opts_;
  SupportPolicy policy_;

  Tick last_tick_ = 0;
  std::map<std::string, std::unique_ptr<ReliableBroadcast>> drbc_;
  std::set<std::string> deferred_;
  std::set<std::string> pending_;
  std::map<std::uint64_t, std::size_t> pending_per_slot_;
  std::set<std::uint64_t> closed_;
  std::map<Tick, std::map<NodeId, std::vector<std::string>>> checks_;
  std::map<std::pair<std::string, Tick>, NodeSet> accepts_;
  std::set<std::pair<std::string, Tick>> accept_sent_;
  std::set<std::pair<std::string, Tick>> accept_done_;
  std::map<std::uint64_t, std::unique_ptr<MultiValuedAgreement>> mvba_;
  std::vector<Ratification> ratified_;
  std::vector<VerdictRecord> verdicts_;
  std::vector<PendingEvent> pending_log_;
  std::size_t overflow_ = 0;
};

}  // namespace cobalt
