#include "cobalt/abba.hpp"

namespace cobalt {

namespace {

std::optional<bool> decode_bit(std::string_view s) {
  if (s == "0") return false;
  if (s == "1") return true;
  return std::nullopt;
}

const char* bit_str(bool b) { return b ? "1" : "0"; }

BitSet2 mask_of(bool b) { return b ? 2 : 1; }

}  // namespace

std::string encode_bitset(BitSet2 s) {
  switch (s) {
    case 0: return "{}";
    case 1: return "{0}";
    case 2: return "{1}";
    default: return "{0,1}";
  }
}

std::optional<BitSet2> decode_bitset(std::string_view s) {
  if (s == "{}") return BitSet2{0};
  if (s == "{0}") return BitSet2{1};
  if (s == "{1}") return BitSet2{2};
  if (s == "{0,1}") return BitSet2{3};
  return std::nullopt;
}

BinaryAgreement::BinaryAgreement(std::string instance, NodeId self, SubsetList es)
    : instance_(std::move(instance)), self_(self), es_(std::move(es)) {
  if (!es_ || es_->empty()) throw ConfigError("agreement instance without essential subsets");
}

std::string BinaryAgreement::coin_tag(std::int64_t round) const {
  return child_path(instance_, "coin", round);
}

std::optional<std::int64_t> BinaryAgreement::coin_round(std::string_view tag) const {
  auto r = child_index(tag, instance_, "coin");
  if (!r || coin_tag(*r) != tag) return std::nullopt;
  return r;
}

BitSet2 BinaryAgreement::values(std::int64_t round) const {
  auto it = rounds_.find(round);
  return it == rounds_.end() ? 0 : it->second.values;
}

std::optional<bool> BinaryAgreement::estimate(std::int64_t round) const {
  auto it = est_.find(round);
  if (it == est_.end()) return std::nullopt;
  return it->second;
}

Message BinaryAgreement::make(Label label, std::int64_t round, std::string content) const {
  return Message{instance_, label, round, std::move(content), self_};
}

Actions BinaryAgreement::input(bool v) {
  if (decided_) throw ProtocolViolation("input after decision on " + instance_);
  if (input_) throw ProtocolViolation("double input on " + instance_);
  input_ = v;
  round_ = 0;
  return enter_round(0, v);
}

Actions BinaryAgreement::enter_round(std::int64_t r, bool est) {
  round_ = r;
  est_[r] = est;
  auto& st = rounds_[r];
  Actions a;
  if (!(st.init_sent & mask_of(est))) {
    st.init_sent |= mask_of(est);
    a.sends.push_back(make(Label::Init, r, bit_str(est)));
  }
  a.merge(evaluate_round(r));
  return a;
}

Actions BinaryAgreement::handle(const Message& msg) {
  if (decided_ || msg.instance != instance_) return {};
  switch (msg.label) {
    case Label::Finish: {
      if (!decode_bit(msg.content)) {
        ++rejected_;
        return {};
      }
      if (finish_.add(msg.content, msg.sender) != ExclusiveTally::Result::Added) return {};
      return evaluate_finish();
    }
    case Label::Init:
    case Label::Aux:
    case Label::Conf: {
      if (msg.round < 0) {
        ++rejected_;
        return {};
      }
      auto& st = rounds_[msg.round];
      if (msg.label == Label::Conf) {
        if (!decode_bitset(msg.content)) {
          ++rejected_;
          return {};
        }
        if (st.conf.add(msg.content, msg.sender) != ExclusiveTally::Result::Added) return {};
      } else {
        if (!decode_bit(msg.content)) {
          ++rejected_;
          return {};
        }
        if (msg.label == Label::Init) {
          if (!st.init.add(msg.content, msg.sender)) return {};
        } else if (st.aux.add(msg.content, msg.sender) != ExclusiveTally::Result::Added) {
          return {};
        }
      }
      if (!input_ || msg.round > round_) return {};
      return evaluate_round(msg.round);
    }
    default:
      return {};
  }
}

Actions BinaryAgreement::evaluate_finish() {
  Actions a;
  const auto& es = *es_;
  for (bool v : {false, true}) {
    const NodeSet& senders = finish_.senders(bit_str(v));
    if (!finish_sent_ && has_weak(es, senders)) {
      finish_sent_ = v;
      a.sends.push_back(make(Label::Finish, 0, bit_str(v)));
    }
    if (!decided_ && has_strong(es, senders)) {
      decided_ = v;
      // The round whose coin step produced the FINISH wave; a node may already have moved on.
      decision_round_ = coin_steps_.empty() ? 0 : coin_steps_.back().round;
    }
  }
  return a;
}

Actions BinaryAgreement::evaluate_round(std::int64_t r) {
  Actions a;
  if (decided_) return a;
  const auto& es = *es_;
  auto& st = rounds_[r];

  for (bool v : {false, true}) {
    const NodeSet& senders = st.init.senders(bit_str(v));
    if (!(st.init_sent & mask_of(v)) && has_weak(es, senders)) {
      st.init_sent |= mask_of(v);
      a.sends.push_back(make(Label::Init, r, bit_str(v)));
    }
    if (!(st.values & mask_of(v)) && has_strong(es, senders)) {
      st.values |= mask_of(v);
      if (!st.aux_sent) {
        st.aux_sent = true;
        a.sends.push_back(make(Label::Aux, r, bit_str(v)));
      }
    }
  }

  if (st.aux_sent && !st.conf_sent) {
    const bool ready = quorum_everywhere(es, [&](NodeId m) {
      const std::string* c = st.aux.of(m);
      return c != nullptr && (st.values & mask_of(*c == "1")) != 0;
    });
    if (ready) {
      st.conf_sent = true;
      a.sends.push_back(make(Label::Conf, r, encode_bitset(st.values)));
    }
  }

  if (st.conf_sent && !st.coin_requested && r == round_) {
    const bool ready = quorum_everywhere(es, [&](NodeId m) {
      const std::string* c = st.conf.of(m);
      if (c == nullptr) return false;
      const BitSet2 set = *decode_bitset(*c);
      return (set & ~st.values) == 0;
    });
    if (ready) {
      st.coin_requested = true;
      a.coins.push_back(CoinRequest{coin_tag(r), CoinSpace::Binary});
    }
  }
  return a;
}

Actions BinaryAgreement::on_coin(std::int64_t r, bool coin) {
  auto it = rounds_.find(r);
  if (it == rounds_.end() || !it->second.coin_requested) {
    throw ProtocolViolation("coin delivered for unrequested round on " + instance_);
  }
  if (decided_ || r != round_) return {};
  const BitSet2 vals = it->second.values;
  Actions a;
  bool next = coin;
  bool sent_finish = false;
  if (vals == 1 || vals == 2) {
    const bool v = vals == 2;
    next = v;
    if (v == coin && !finish_sent_) {
      finish_sent_ = v;
      sent_finish = true;
      a.sends.push_back(make(Label::Finish, 0, bit_str(v)));
    }
  }
  coin_steps_.push_back(CoinStep{r, vals, coin, next, sent_finish});
  a.merge(enter_round(r + 1, next));
  a.merge(evaluate_finish());
  return a;
}

}  // namespace cobalt
