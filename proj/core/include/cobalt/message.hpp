#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cobalt/types.hpp"

namespace cobalt {

enum class Label : std::uint8_t {
  Init,
  Echo,
  Ready,
  Aux,
  Conf,
  Finish,
  Elect,
  Cont,
  Check,
  Accept,
  Share,
  Sig,
  Change,
  Confirm,
  Lock,
  NewView,
};

std::string_view label_name(Label l);
std::optional<Label> parse_label(std::string_view s);

// `instance` is a slash-separated path such as "dabc/slot/3/stop/2"; `round` carries
// the round, sequence number, or boundary time depending on the protocol.
struct Message {
  std::string instance;
  Label label = Label::Init;
  std::int64_t round = 0;
  std::string content;
  NodeId sender;

  friend bool operator==(const Message&, const Message&) = default;
};

enum class CoinSpace : std::uint8_t { Binary, Seed128 };

using CoinValue = std::array<std::uint8_t, 16>;

inline bool coin_bit(const CoinValue& v) { return (v[0] & 1U) != 0; }

struct CoinRequest {
  std::string tag;
  CoinSpace space = CoinSpace::Binary;
};

struct Actions {
  std::vector<Message> sends;
  std::vector<CoinRequest> coins;

  bool empty() const { return sends.empty() && coins.empty(); }
  void merge(Actions&& other);
};

// Per-(label, round) record of who sent what; a sender may contribute to many keys.
class Tally {
 public:
  // False when this sender already counted for `key`.
  bool add(const std::string& key, NodeId sender);
  const NodeSet& senders(const std::string& key) const;
  const std::map<std::string, NodeSet>& all() const { return by_key_; }

 private:
  std::map<std::string, NodeSet> by_key_;
};

// Tally under the single-message rule: the first content from a sender wins.
class ExclusiveTally {
 public:
  enum class Result { Added, Duplicate, Equivocation };

  Result add(const std::string& key, NodeId sender);
  const NodeSet& senders(const std::string& key) const;
  const std::string* of(NodeId sender) const;
  const std::map<std::string, NodeSet>& all() const { return by_key_; }
  const std::map<NodeId, std::string>& by_sender() const { return by_sender_; }

 private:
  std::map<std::string, NodeSet> by_key_;
  std::map<NodeId, std::string> by_sender_;
};

// Instance path helpers.
std::string child_path(std::string_view parent, std::string_view kind, std::int64_t index);
// If `path` is parent/kind/<index>[/...], returns index.
std::optional<std::int64_t> child_index(std::string_view path, std::string_view parent,
                                        std::string_view kind);

}  // namespace cobalt
