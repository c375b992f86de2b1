#include "cobalt/dabc.hpp"

#include <algorithm>

#include "cobalt/codec.hpp"

namespace cobalt {

namespace {

constexpr std::string_view kRoot = "dabc";

std::string encode_valid_input(const std::string& amendment, Tick activation) {
  return encode_fields({amendment, std::to_string(activation)});
}

std::optional<std::pair<Amendment, Tick>> decode_valid_input(std::string_view v) {
  auto f = decode_fields(v);
  if (!f || f->size() != 2) return std::nullopt;
  auto a = Amendment::decode((*f)[0]);
  auto t = decode_i64((*f)[1]);
  if (!a || !t) return std::nullopt;
  return std::make_pair(*a, *t);
}

}  // namespace

std::string Amendment::id() const {
  const Digest d = sha256(encode());
  return to_hex(d.data(), 8);
}

std::string Amendment::encode() const { return encode_fields({payload, std::to_string(slot)}); }

std::optional<Amendment> Amendment::decode(std::string_view content) {
  auto f = decode_fields(content);
  if (!f || f->size() != 2) return std::nullopt;
  auto slot = decode_u64((*f)[1]);
  if (!slot) return std::nullopt;
  return Amendment{(*f)[0], *slot};
}

Message make_proposal(NodeId proposer, std::uint64_t serial, const Amendment& a) {
  std::string inst = child_path(kRoot, "drbc", proposer.value) + "/" + std::to_string(serial);
  return Message{std::move(inst), Label::Init, 0, a.encode(), proposer};
}

std::string AtomicBroadcast::slot_instance(std::uint64_t slot) {
  return child_path(kRoot, "slot", static_cast<std::int64_t>(slot));
}

AtomicBroadcast::AtomicBroadcast(NodeId self, SubsetList es, Options opts, SupportPolicy policy)
    : self_(self), es_(std::move(es)), opts_(opts), policy_(std::move(policy)) {
  if (!es_ || es_->empty()) throw ConfigError("atomic broadcast node without essential subsets");
  if (opts_.time.interval <= 0) throw ConfigError("tick interval must be positive");
  if (opts_.time.advance < 0) throw ConfigError("activation advance must be nonnegative");
}

const MultiValuedAgreement* AtomicBroadcast::slot_agreement(std::uint64_t slot) const {
  auto it = mvba_.find(slot);
  return it == mvba_.end() ? nullptr : it->second.get();
}

std::vector<std::uint64_t> AtomicBroadcast::slots() const {
  std::vector<std::uint64_t> out;
  for (const auto& [s, m] : mvba_) out.push_back(s);
  return out;
}

ReliableBroadcast* AtomicBroadcast::drbc_for(const std::string& instance) {
  auto it = drbc_.find(instance);
  if (it != drbc_.end()) return it->second.get();
  auto b = child_index(instance, kRoot, "drbc");
  if (!b || *b < 0) return nullptr;
  const std::string prefix = child_path(kRoot, "drbc", *b) + "/";
  if (instance.size() <= prefix.size() || !decode_u64(std::string_view(instance).substr(prefix.size()))) {
    return nullptr;
  }
  auto rbc = std::make_unique<ReliableBroadcast>(instance, self_, NodeId{static_cast<std::uint32_t>(*b)},
                                                 es_, true);
  return drbc_.emplace(instance, std::move(rbc)).first->second.get();
}

MultiValuedAgreement& AtomicBroadcast::mvba_for(std::uint64_t slot) {
  auto& m = mvba_[slot];
  if (!m) {
    m = std::make_unique<MultiValuedAgreement>(slot_instance(slot), self_, es_,
                                               MultiValuedAgreement::Options{opts_.pipelining});
  }
  return *m;
}

Actions AtomicBroadcast::tick(Tick tau) {
  if (tau <= last_tick_) throw ProtocolViolation("tick boundaries must increase");
  if (tau % opts_.time.interval != 0) throw ProtocolViolation("tick is not a boundary");
  last_tick_ = tau;
  Actions a;
  std::vector<std::string> snapshot(pending_.begin(), pending_.end());
  a.sends.push_back(Message{std::string(kRoot), Label::Check, tau, encode_fields(snapshot), self_});
  return a;
}

Actions AtomicBroadcast::handle(const Message& msg) {
  if (msg.instance == kRoot) {
    if (msg.label == Label::Check) return on_check(msg);
    if (msg.label == Label::Accept) return on_accept(msg);
    return {};
  }
  if (auto slot = child_index(msg.instance, kRoot, "slot"); slot && *slot >= 0) {
    auto& m = mvba_for(static_cast<std::uint64_t>(*slot));
    if (!m.owns(msg.instance)) return {};
    Actions a = m.handle(msg);
    a.merge(after_mvba(static_cast<std::uint64_t>(*slot)));
    return a;
  }
  ReliableBroadcast* rbc = drbc_for(msg.instance);
  if (rbc == nullptr) return {};
  Actions a = rbc->handle(msg);
  a.merge(decide_verdicts(*rbc));
  admit(*rbc);
  return a;
}

Actions AtomicBroadcast::on_coin(const std::string& tag, const CoinValue& value) {
  auto slot = child_index(tag, kRoot, "slot");
  if (!slot || *slot < 0) return {};
  auto it = mvba_.find(static_cast<std::uint64_t>(*slot));
  if (it == mvba_.end()) return {};
  Actions a = it->second->on_coin(tag, value);
  a.merge(after_mvba(static_cast<std::uint64_t>(*slot)));
  return a;
}

Actions AtomicBroadcast::decide_verdicts(ReliableBroadcast& rbc) {
  Actions a;
  bool waiting = false;
  for (const auto& content : rbc.awaiting_verdict()) {
    auto am = Amendment::decode(content);
    if (!am) {
      a.merge(rbc.set_support(content, Verdict::Oppose));
      continue;
    }
    const std::uint64_t next = ratified_.size();
    if (am->slot > next) {
      waiting = true;
      continue;
    }
    const bool support = am->slot == next && policy_(*am, ratified_);
    verdicts_.push_back(VerdictRecord{am->id(), am->slot, support});
    a.merge(rbc.set_support(content, support ? Verdict::Support : Verdict::Oppose));
  }
  if (waiting) {
    deferred_.insert(rbc.instance());
  } else {
    deferred_.erase(rbc.instance());
  }
  return a;
}

void AtomicBroadcast::admit(ReliableBroadcast& rbc) {
  if (!rbc.accepted()) return;
  const std::string& content = *rbc.accepted();
  if (pending_.count(content) != 0) return;
  auto am = Amendment::decode(content);
  if (!am || slot_closed(am->slot) || am->slot < ratified_.size()) return;
  auto& count = pending_per_slot_[am->slot];
  if (count >= opts_.max_pending_per_slot) {
    ++overflow_;
    return;
  }
  ++count;
  pending_.insert(content);
  pending_log_.push_back(PendingEvent{false, am->slot});
}

Actions AtomicBroadcast::on_check(const Message& msg) {
  auto pairs = decode_fields(msg.content);
  if (!pairs || msg.round <= 0) return {};
  auto& at = checks_[msg.round];
  if (at.count(msg.sender) != 0) return {};
  auto& stored = at.emplace(msg.sender, std::move(*pairs)).first->second;
  std::sort(stored.begin(), stored.end());
  Actions a;
  for (const auto& p : stored) a.merge(evaluate_accept(p, msg.round));
  return a;
}

Actions AtomicBroadcast::evaluate_accept(const std::string& pair, Tick tau) {
  const auto key = std::make_pair(pair, tau);
  if (accept_sent_.count(key) != 0) return {};
  const auto& at = checks_[tau];
  const bool ready = quorum_everywhere(*es_, [&](NodeId m) {
    auto it = at.find(m);
    return it != at.end() && std::binary_search(it->second.begin(), it->second.end(), pair);
  });
  if (!ready) return {};
  accept_sent_.insert(key);
  Actions a;
  a.sends.push_back(Message{std::string(kRoot), Label::Accept, tau, pair, self_});
  return a;
}

Actions AtomicBroadcast::on_accept(const Message& msg) {
  auto am = Amendment::decode(msg.content);
  if (!am || msg.round <= 0) return {};
  const auto key = std::make_pair(msg.content, msg.round);
  if (!accepts_[key].insert(msg.sender)) return {};
  const NodeSet& senders = accepts_[key];
  Actions a;
  if (accept_sent_.count(key) == 0 && has_weak(*es_, senders)) {
    accept_sent_.insert(key);
    a.sends.push_back(Message{std::string(kRoot), Label::Accept, msg.round, msg.content, self_});
  }
  if (accept_done_.count(key) == 0 && has_strong(*es_, senders)) {
    accept_done_.insert(key);
    if (am->slot < ratified_.size()) return a;
    if (closed_.insert(am->slot).second) {
      pending_log_.push_back(PendingEvent{true, am->slot});
      for (auto it = pending_.begin(); it != pending_.end();) {
        auto other = Amendment::decode(*it);
        if (other && other->slot == am->slot) {
          it = pending_.erase(it);
        } else {
          ++it;
        }
      }
    }
    a.merge(mvba_for(am->slot).add_valid_input(
        encode_valid_input(msg.content, msg.round + opts_.time.advance)));
    a.merge(after_mvba(am->slot));
  }
  return a;
}

Actions AtomicBroadcast::after_mvba(std::uint64_t slot) {
  auto it = mvba_.find(slot);
  if (it == mvba_.end() || !it->second->decided() || slot != ratified_.size()) return {};
  return ratify_ready();
}

Actions AtomicBroadcast::ratify_ready() {
  Actions a;
  bool progressed = false;
  while (true) {
    auto it = mvba_.find(ratified_.size());
    if (it == mvba_.end() || !it->second->decided()) break;
    auto v = decode_valid_input(*it->second->decided());
    if (!v) throw ProtocolViolation("undecodable slot decision");
    ratified_.push_back(Ratification{it->first, v->first, v->second});
    progressed = true;
  }
  if (!progressed) return a;
  for (auto it = pending_.begin(); it != pending_.end();) {
    auto am = Amendment::decode(*it);
    if (am && am->slot < ratified_.size()) {
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
  const std::vector<std::string> deferred(deferred_.begin(), deferred_.end());
  for (const auto& inst : deferred) {
    auto rbc = drbc_.find(inst);
    if (rbc == drbc_.end()) continue;
    a.merge(decide_verdicts(*rbc->second));
    admit(*rbc->second);
  }
  return a;
}

std::optional<std::vector<Ratification>> AtomicBroadcast::known_before(Tick tau) const {
  const Tick limit = tau - opts_.time.advance;
  const std::uint64_t done = ratified_.size();
  for (Tick b = opts_.time.interval; b <= limit; b += opts_.time.interval) {
    auto it = checks_.find(b);
    if (it == checks_.end()) return std::nullopt;
    const auto& at = it->second;
    const bool ok = quorum_everywhere(*es_, [&](NodeId m) {
      auto c = at.find(m);
      if (c == at.end()) return false;
      return std::all_of(c->second.begin(), c->second.end(), [&](const std::string& p) {
        auto am = Amendment::decode(p);
        return am && am->slot < done;
      });
    });
    if (!ok) return std::nullopt;
  }
  std::vector<Ratification> out;
  for (const auto& r : ratified_) {
    if (r.activation < tau) out.push_back(r);
  }
  return out;
}

}  // namespace cobalt
