#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cobalt/abba.hpp"
#include "cobalt/message.hpp"
#include "cobalt/topology.hpp"

namespace cobalt {

using RoundIndex = std::array<std::uint8_t, 16>;

// Two distinct candidates hashed to the same round index.
class CollisionFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// First 128 bits of SHA-256 over the length-prefixed value followed by the seed.
RoundIndex round_index(std::string_view value, const CoinValue& seed);

std::string encode_value_set(const std::set<std::string>& values);
std::optional<std::set<std::string>> decode_value_set(std::string_view encoded);

// Multi-valued agreement with external validity: values[0] is fed by the caller,
// each round ends in a STOP binary agreement and a coin-indexed reduction.
class MultiValuedAgreement {
 public:
  struct Options {
    bool pipelining = false;
  };

  MultiValuedAgreement(std::string instance, NodeId self, SubsetList es, Options opts);
  MultiValuedAgreement(std::string instance, NodeId self, SubsetList es)
      : MultiValuedAgreement(std::move(instance), self, std::move(es), Options{}) {}

  Actions add_valid_input(const std::string& value);
  Actions handle(const Message& msg);
  Actions on_coin(const std::string& tag, const CoinValue& value);

  const std::string& instance() const { return instance_; }
  bool owns(std::string_view path) const;

  std::optional<std::string> decided() const { return decided_; }
  std::optional<std::int64_t> decision_round() const { return decision_round_; }
  std::int64_t round() const { return round_; }
  std::set<std::string> values(std::int64_t round) const;
  std::int64_t rounds_seen() const;
  const BinaryAgreement* stop(std::int64_t round) const;

 private:
  struct RoundState {
    std::set<std::string> values;
    std::vector<std::string> order;
    bool elect_sent = false;
    bool step3_done = false;
    std::optional<std::string> finish_sent;
    std::string last_cont;
    std::optional<bool> vote;
    bool cont_phase = false;
    bool seed_requested = false;
    std::optional<CoinValue> seed;
    std::map<std::string, RoundIndex> index;
    std::map<RoundIndex, std::string> by_index;
    std::optional<std::string> est_next;
    ExclusiveTally elect;
    ExclusiveTally finish;
    std::map<NodeId, std::vector<std::set<std::string>>> conts;
    Tally init;
    std::set<std::string> init_sent;
  };

  Message make(Label label, std::int64_t round, std::string content) const;
  BinaryAgreement& stop_for(std::int64_t round);
  bool add_value(RoundState& st, const std::string& value);
  const RoundIndex& index_of(RoundState& st, const std::string& value);
  bool has_valid_cont(const RoundState& st) const;
  bool send_cont(std::int64_t r, RoundState& st, Actions& a);

  Actions progress();
  bool step_elect(Actions& a);
  bool step_finish_or_cont(Actions& a);
  bool step_vote(std::int64_t r, Actions& a);
  bool walk(Actions& a);
  bool terminate_round(std::int64_t r, Actions& a);
  bool zero_branch(std::int64_t r, Actions& a);
  bool step_relay(std::int64_t r, Actions& a);
  bool step_admit(Actions& a);

  std::string instance_;
  NodeId self_;
  SubsetList es_;
  Options opts_;

  std::int64_t round_ = 0;
  std::map<std::int64_t, RoundState> rounds_;
  std::map<std::int64_t, std::unique_ptr<BinaryAgreement>> stops_;
  std::optional<std::string> decided_;
  std::optional<std::int64_t> decision_round_;
};

}  // namespace cobalt
