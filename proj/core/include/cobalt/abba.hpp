#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cobalt/message.hpp"
#include "cobalt/topology.hpp"

namespace cobalt {

// Bitmask over {0,1}: bit 0 set means 0 is present, bit 1 means 1 is present.
using BitSet2 = std::uint8_t;

std::string encode_bitset(BitSet2 s);
std::optional<BitSet2> decode_bitset(std::string_view s);

// Randomized binary agreement with a FINISH short-circuit and a per-round coin.
class BinaryAgreement {
 public:
  struct CoinStep {
    std::int64_t round;
    BitSet2 values;
    bool coin;
    bool est_next;
    bool sent_finish;
  };

  BinaryAgreement(std::string instance, NodeId self, SubsetList es);

  Actions input(bool v);
  Actions handle(const Message& msg);
  Actions on_coin(std::int64_t round, bool coin);

  const std::string& instance() const { return instance_; }
  std::string coin_tag(std::int64_t round) const;
  // Round encoded in a coin tag of this instance, if it is one.
  std::optional<std::int64_t> coin_round(std::string_view tag) const;

  bool has_input() const { return input_.has_value(); }
  std::optional<bool> decided() const { return decided_; }
  std::optional<std::int64_t> decision_round() const { return decision_round_; }
  std::int64_t round() const { return round_; }
  BitSet2 values(std::int64_t round) const;
  std::optional<bool> estimate(std::int64_t round) const;
  const std::vector<CoinStep>& coin_steps() const { return coin_steps_; }
  std::size_t rejected() const { return rejected_; }

 private:
  struct RoundState {
    BitSet2 values = 0;
    BitSet2 init_sent = 0;
    bool aux_sent = false;
    bool conf_sent = false;
    bool coin_requested = false;
    Tally init;
    ExclusiveTally aux;
    ExclusiveTally conf;
  };

  Message make(Label label, std::int64_t round, std::string content) const;
  Actions enter_round(std::int64_t r, bool est);
  Actions evaluate_round(std::int64_t r);
  Actions evaluate_finish();

  std::string instance_;
  NodeId self_;
  SubsetList es_;

  std::optional<bool> input_;
  std::int64_t round_ = 0;
  std::map<std::int64_t, RoundState> rounds_;
  std::map<std::int64_t, bool> est_;
  ExclusiveTally finish_;
  std::optional<bool> finish_sent_;
  std::optional<bool> decided_;
  std::optional<std::int64_t> decision_round_;
  std::vector<CoinStep> coin_steps_;
  std::size_t rejected_ = 0;
};

}  // namespace cobalt
