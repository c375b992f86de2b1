#include "cobalt/rbc.hpp"

namespace cobalt {

ReliableBroadcast::ReliableBroadcast(std::string instance, NodeId self, NodeId broadcaster,
                                     SubsetList es, bool democratic)
    : instance_(std::move(instance)),
      self_(self),
      broadcaster_(broadcaster),
      es_(std::move(es)),
      democratic_(democratic) {
  if (!es_ || es_->empty()) throw ConfigError("broadcast instance without essential subsets");
}

Message ReliableBroadcast::make(Label label, const std::string& content) const {
  return Message{instance_, label, 0, content, self_};
}

Actions ReliableBroadcast::start_broadcast(std::string content) {
  if (self_ != broadcaster_) throw ProtocolViolation("only the broadcaster may start " + instance_);
  if (started_) throw ProtocolViolation("broadcast already started for " + instance_);
  started_ = true;
  Actions a;
  a.sends.push_back(make(Label::Init, content));
  return a;
}

std::optional<Verdict> ReliableBroadcast::verdict(const std::string& content) const {
  auto it = verdicts_.find(content);
  if (it == verdicts_.end()) return std::nullopt;
  return it->second;
}

Actions ReliableBroadcast::set_support(const std::string& content, Verdict v) {
  if (!democratic_) throw ProtocolViolation("support verdict on a plain broadcast");
  auto [it, inserted] = verdicts_.emplace(content, v);
  if (!inserted) {
    if (it->second != v) throw ProtocolViolation("support verdict flipped on " + instance_);
    return {};
  }
  return evaluate(content);
}

std::vector<std::string> ReliableBroadcast::awaiting_verdict() const {
  std::vector<std::string> out;
  if (!democratic_ || echo_sent_ || accepted_) return out;
  if (init_ && verdicts_.count(*init_) == 0) out.push_back(*init_);
  for (const auto& [content, senders] : echo_.all()) {
    if (verdicts_.count(content) != 0 || (init_ && *init_ == content)) continue;
    if (has_weak(*es_, senders)) out.push_back(content);
  }
  return out;
}

Actions ReliableBroadcast::handle(const Message& msg) {
  if (msg.instance != instance_) return {};
  switch (msg.label) {
    case Label::Init:
      if (msg.sender != broadcaster_) return {};
      if (init_) {
        if (*init_ != msg.content) ++equivocations_;
        return {};
      }
      init_ = msg.content;
      return evaluate(msg.content);
    case Label::Echo: {
      const auto r = echo_.add(msg.content, msg.sender);
      if (r == ExclusiveTally::Result::Equivocation) ++equivocations_;
      if (r != ExclusiveTally::Result::Added) return {};
      return evaluate(msg.content);
    }
    case Label::Ready: {
      const auto r = ready_.add(msg.content, msg.sender);
      if (r == ExclusiveTally::Result::Equivocation) ++equivocations_;
      if (r != ExclusiveTally::Result::Added) return {};
      return evaluate(msg.content);
    }
    default:
      return {};
  }
}

Actions ReliableBroadcast::evaluate(const std::string& content) {
  Actions a;
  const auto& es = *es_;
  if (!echo_sent_) {
    const bool triggered = (init_ && *init_ == content) || has_weak(es, echo_.senders(content));
    const bool allowed = !democratic_ || verdict(content) == Verdict::Support;
    if (triggered && allowed) {
      echo_sent_ = content;
      a.sends.push_back(make(Label::Echo, content));
    }
  }
  if (!ready_sent_ &&
      (has_strong(es, echo_.senders(content)) || has_weak(es, ready_.senders(content)))) {
    ready_sent_ = content;
    a.sends.push_back(make(Label::Ready, content));
  }
  if (!accepted_ && has_strong(es, ready_.senders(content))) accepted_ = content;
  return a;
}

}  // namespace cobalt
