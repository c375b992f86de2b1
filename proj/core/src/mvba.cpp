#include "cobalt/mvba.hpp"

#include <algorithm>

#include "cobalt/codec.hpp"

namespace cobalt {

RoundIndex round_index(std::string_view value, const CoinValue& seed) {
  std::string buf = encode_fields({std::string(value)});
  buf.append(reinterpret_cast<const char*>(seed.data()), seed.size());
  const Digest d = sha256(buf);
  RoundIndex out{};
  std::copy_n(d.begin(), out.size(), out.begin());
  return out;
}

std::string encode_value_set(const std::set<std::string>& values) {
  return encode_fields(std::vector<std::string>(values.begin(), values.end()));
}

std::optional<std::set<std::string>> decode_value_set(std::string_view encoded) {
  auto fields = decode_fields(encoded);
  if (!fields) return std::nullopt;
  std::set<std::string> out(fields->begin(), fields->end());
  if (out.size() != fields->size()) return std::nullopt;
  return out;
}

MultiValuedAgreement::MultiValuedAgreement(std::string instance, NodeId self, SubsetList es,
                                           Options opts)
    : instance_(std::move(instance)), self_(self), es_(std::move(es)), opts_(opts) {
  if (!es_ || es_->empty()) throw ConfigError("agreement instance without essential subsets");
}

bool MultiValuedAgreement::owns(std::string_view path) const {
  return path.size() >= instance_.size() && path.substr(0, instance_.size()) == instance_ &&
         (path.size() == instance_.size() || path[instance_.size()] == '/');
}

std::set<std::string> MultiValuedAgreement::values(std::int64_t round) const {
  auto it = rounds_.find(round);
  return it == rounds_.end() ? std::set<std::string>{} : it->second.values;
}

std::int64_t MultiValuedAgreement::rounds_seen() const {
  return rounds_.empty() ? 0 : rounds_.rbegin()->first + 1;
}

const BinaryAgreement* MultiValuedAgreement::stop(std::int64_t round) const {
  auto it = stops_.find(round);
  return it == stops_.end() ? nullptr : it->second.get();
}

Message MultiValuedAgreement::make(Label label, std::int64_t round, std::string content) const {
  return Message{instance_, label, round, std::move(content), self_};
}

BinaryAgreement& MultiValuedAgreement::stop_for(std::int64_t round) {
  auto& slot = stops_[round];
  if (!slot) slot = std::make_unique<BinaryAgreement>(child_path(instance_, "stop", round), self_, es_);
  return *slot;
}

bool MultiValuedAgreement::add_value(RoundState& st, const std::string& value) {
  if (!st.values.insert(value).second) return false;
  st.order.push_back(value);
  return true;
}

const RoundIndex& MultiValuedAgreement::index_of(RoundState& st, const std::string& value) {
  auto it = st.index.find(value);
  if (it != st.index.end()) return it->second;
  const RoundIndex idx = round_index(value, *st.seed);
  auto [other, fresh] = st.by_index.emplace(idx, value);
  if (!fresh && other->second != value) {
    throw CollisionFault("round index collision in " + instance_);
  }
  return st.index.emplace(value, idx).first->second;
}

bool MultiValuedAgreement::has_valid_cont(const RoundState& st) const {
  for (const auto& [sender, sets] : st.conts) {
    for (const auto& c : sets) {
      if (c.size() >= 2 && std::includes(st.values.begin(), st.values.end(), c.begin(), c.end())) {
        return true;
      }
    }
  }
  return false;
}

bool MultiValuedAgreement::send_cont(std::int64_t r, RoundState& st, Actions& a) {
  std::string enc = encode_value_set(st.values);
  if (enc == st.last_cont) return false;
  st.last_cont = enc;
  a.sends.push_back(make(Label::Cont, r, std::move(enc)));
  return true;
}

Actions MultiValuedAgreement::add_valid_input(const std::string& value) {
  if (decided_) return {};
  if (!add_value(rounds_[0], value)) return {};
  return progress();
}

Actions MultiValuedAgreement::handle(const Message& msg) {
  if (decided_ || !owns(msg.instance)) return {};
  Actions a;
  if (msg.instance != instance_) {
    auto r = child_index(msg.instance, instance_, "stop");
    if (!r || *r < 0 || msg.instance != child_path(instance_, "stop", *r)) return {};
    a = stop_for(*r).handle(msg);
    a.merge(progress());
    return a;
  }
  if (msg.round < 0) return {};
  auto& st = rounds_[msg.round];
  switch (msg.label) {
    case Label::Elect:
      if (st.elect.add(msg.content, msg.sender) != ExclusiveTally::Result::Added) return {};
      break;
    case Label::Finish:
      if (st.finish.add(msg.content, msg.sender) != ExclusiveTally::Result::Added) return {};
      break;
    case Label::Cont: {
      auto set = decode_value_set(msg.content);
      if (!set || set->empty()) return {};
      auto& mine = st.conts[msg.sender];
      if (std::find(mine.begin(), mine.end(), *set) != mine.end()) return {};
      mine.push_back(std::move(*set));
      break;
    }
    case Label::Init:
      if (msg.round < 1 || !st.init.add(msg.content, msg.sender)) return {};
      break;
    default:
      return {};
  }
  return progress();
}

Actions MultiValuedAgreement::on_coin(const std::string& tag, const CoinValue& value) {
  if (decided_ || !owns(tag)) return {};
  if (auto r = child_index(tag, instance_, "seed"); r && tag == child_path(instance_, "seed", *r)) {
    auto it = rounds_.find(*r);
    if (it == rounds_.end() || !it->second.seed_requested) {
      throw ProtocolViolation("seed delivered for unrequested round on " + instance_);
    }
    if (it->second.seed) return {};
    it->second.seed = value;
    return progress();
  }
  if (auto r = child_index(tag, instance_, "stop"); r) {
    auto& abba = stop_for(*r);
    auto coin_round = abba.coin_round(tag);
    if (!coin_round) return {};
    Actions a = abba.on_coin(*coin_round, coin_bit(value));
    a.merge(progress());
    return a;
  }
  return {};
}

Actions MultiValuedAgreement::progress() {
  Actions a;
  bool changed = true;
  while (changed && !decided_) {
    changed = false;
    changed |= step_elect(a);
    changed |= step_finish_or_cont(a);
    for (std::int64_t r = 0; r <= round_; ++r) changed |= step_vote(r, a);
    changed |= walk(a);
    changed |= step_admit(a);
  }
  return a;
}

bool MultiValuedAgreement::step_elect(Actions& a) {
  auto& st = rounds_[round_];
  if (st.elect_sent || st.values.empty()) return false;
  st.elect_sent = true;
  a.sends.push_back(make(Label::Elect, round_, st.order.front()));
  return true;
}

bool MultiValuedAgreement::step_finish_or_cont(Actions& a) {
  auto& st = rounds_[round_];
  if (!st.elect_sent || st.step3_done) return false;
  const bool ready = quorum_everywhere(*es_, [&](NodeId m) {
    const std::string* v = st.elect.of(m);
    return v != nullptr && st.values.count(*v) != 0;
  });
  if (!ready) return false;
  st.step3_done = true;
  if (st.values.size() == 1) {
    st.finish_sent = *st.values.begin();
    a.sends.push_back(make(Label::Finish, round_, *st.finish_sent));
  } else {
    send_cont(round_, st, a);
  }
  return true;
}

bool MultiValuedAgreement::step_vote(std::int64_t r, Actions& a) {
  auto& st = rounds_[r];
  if (!st.step3_done || st.vote) return false;
  bool bit = false;
  bool ready = false;
  for (const auto& [value, senders] : st.finish.all()) {
    if (has_strong(*es_, senders)) {
      bit = true;
      ready = true;
      break;
    }
  }
  if (!ready && has_valid_cont(st)) {
    send_cont(r, st, a);
    ready = true;
  }
  if (!ready) return false;
  st.vote = bit;
  auto& abba = stop_for(r);
  if (!abba.decided() && !abba.has_input()) a.merge(abba.input(bit));
  return true;
}

bool MultiValuedAgreement::walk(Actions& a) {
  bool changed = false;
  bool prior_zero = true;
  for (std::int64_t r = 0; r <= round_; ++r) {
    auto it = rounds_.find(r);
    if (it == rounds_.end() || !it->second.vote) break;
    const BinaryAgreement* abba = stop(r);
    const std::optional<bool> d = abba ? abba->decided() : std::nullopt;
    if (d == true) {
      if (prior_zero) changed |= terminate_round(r, a);
      break;
    }
    if (!d) {
      prior_zero = false;
      if (!opts_.pipelining) break;
    }
    changed |= zero_branch(r, a);
    if (!it->second.est_next) break;
    changed |= step_relay(r, a);
  }
  return changed;
}

bool MultiValuedAgreement::terminate_round(std::int64_t r, Actions& a) {
  auto& st = rounds_[r];
  bool changed = false;
  if (!st.finish_sent) {
    for (const auto& [value, senders] : st.finish.all()) {
      if (has_weak(*es_, senders)) {
        st.finish_sent = value;
        a.sends.push_back(make(Label::Finish, r, value));
        changed = true;
        break;
      }
    }
  }
  const auto& valid = rounds_[0].values;
  for (const auto& [value, senders] : st.finish.all()) {
    if (valid.count(value) != 0 && has_strong(*es_, senders)) {
      decided_ = value;
      decision_round_ = r;
      return true;
    }
  }
  return changed;
}

bool MultiValuedAgreement::zero_branch(std::int64_t r, Actions& a) {
  auto& st = rounds_[r];
  bool changed = false;
  if (!st.cont_phase && has_valid_cont(st)) {
    st.cont_phase = true;
    changed = true;
  }
  if (!st.cont_phase) return changed;
  changed |= send_cont(r, st, a);
  if (!st.seed_requested) {
    const bool ready = quorum_everywhere(*es_, [&](NodeId m) {
      auto it = st.conts.find(m);
      if (it == st.conts.end()) return false;
      const auto& latest = it->second.back();
      return std::includes(st.values.begin(), st.values.end(), latest.begin(), latest.end());
    });
    if (ready) {
      st.seed_requested = true;
      a.coins.push_back(CoinRequest{child_path(instance_, "seed", r), CoinSpace::Seed128});
      changed = true;
    }
  }
  if (st.seed && !st.est_next) {
    const std::string* best = nullptr;
    for (const auto& v : st.order) {
      if (best == nullptr || index_of(st, v) < index_of(st, *best)) best = &v;
    }
    st.est_next = *best;
    auto& next = rounds_[r + 1];
    next.init_sent.insert(*best);
    a.sends.push_back(make(Label::Init, r + 1, *best));
    changed = true;
  }
  return changed;
}

bool MultiValuedAgreement::step_relay(std::int64_t r, Actions& a) {
  bool changed = false;
  auto& st = rounds_[r];
  auto& next = rounds_[r + 1];
  for (const auto& [value, senders] : next.init.all()) {
    if (next.init_sent.count(value) == 0 && has_weak(*es_, senders)) {
      next.init_sent.insert(value);
      a.sends.push_back(make(Label::Init, r + 1, value));
      changed = true;
    }
  }
  const RoundIndex est = index_of(st, *st.est_next);
  for (const auto& v : st.order) {
    if (next.init_sent.count(v) == 0 && index_of(st, v) < est) {
      next.init_sent.insert(v);
      a.sends.push_back(make(Label::Init, r + 1, v));
      changed = true;
    }
  }
  return changed;
}

bool MultiValuedAgreement::step_admit(Actions& a) {
  (void)a;
  bool changed = false;
  for (auto& [r, st] : rounds_) {
    if (r < 1) continue;
    for (const auto& [value, senders] : st.init.all()) {
      if (st.values.count(value) == 0 && has_strong(*es_, senders)) {
        add_value(st, value);
        changed = true;
      }
    }
  }
  while (true) {
    auto cur = rounds_.find(round_);
    auto nxt = rounds_.find(round_ + 1);
    if (cur == rounds_.end() || !cur->second.est_next || nxt == rounds_.end() ||
        nxt->second.values.empty()) {
      break;
    }
    ++round_;
    changed = true;
  }
  return changed;
}

}  // namespace cobalt
