#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cobalt/message.hpp"
#include "cobalt/topology.hpp"

namespace cobalt {

enum class Verdict { Support, Oppose };

// Bracha-style reliable broadcast over essential subsets. In democratic mode a
// node only echoes content it has been told to support; READY relays are unaffected.
class ReliableBroadcast {
 public:
  ReliableBroadcast(std::string instance, NodeId self, NodeId broadcaster, SubsetList es,
                    bool democratic = false);

  Actions start_broadcast(std::string content);
  Actions handle(const Message& msg);
  Actions set_support(const std::string& content, Verdict verdict);

  const std::string& instance() const { return instance_; }
  NodeId broadcaster() const { return broadcaster_; }
  bool democratic() const { return democratic_; }
  const std::optional<std::string>& accepted() const { return accepted_; }
  const std::optional<std::string>& echoed() const { return echo_sent_; }
  const std::optional<std::string>& readied() const { return ready_sent_; }
  std::optional<Verdict> verdict(const std::string& content) const;
  std::size_t equivocations() const { return equivocations_; }

  // Contents this node would echo right now if it supported them.
  std::vector<std::string> awaiting_verdict() const;

 private:
  Actions evaluate(const std::string& content);
  Message make(Label label, const std::string& content) const;

  std::string instance_;
  NodeId self_;
  NodeId broadcaster_;
  SubsetList es_;
  bool democratic_;

  bool started_ = false;
  std::optional<std::string> init_;
  std::optional<std::string> echo_sent_;
  std::optional<std::string> ready_sent_;
  std::optional<std::string> accepted_;
  ExclusiveTally echo_;
  ExclusiveTally ready_;
  std::map<std::string, Verdict> verdicts_;
  std::size_t equivocations_ = 0;
};

}  // namespace cobalt
