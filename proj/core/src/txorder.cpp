#include "cobalt/txorder.hpp"

#include <algorithm>

#include "cobalt/codec.hpp"

namespace cobalt {

namespace tx {

std::string view_instance(std::int64_t view) { return child_path("tx", "v", view); }
std::string change_instance(std::int64_t target) { return child_path("tx", "vc", target); }
std::string change_mvba_instance(std::int64_t target) { return change_instance(target) + "/mvba"; }

std::string fallback_drbc_instance(NodeId proposer, std::uint64_t serial) {
  return child_path("tx/fb", "drbc", proposer.value) + "/" + std::to_string(serial);
}

std::string fallback_slot_instance(std::uint64_t slot) {
  return child_path("tx/fb", "slot", static_cast<std::int64_t>(slot));
}

SubsetList view_subsets(const ViewSpec& view) {
  const auto n = static_cast<std::uint32_t>(view.members.size());
  const std::uint32_t q = n > view.t ? n - view.t : 0;
  return std::make_shared<const std::vector<EssentialSubset>>(
      std::vector<EssentialSubset>{EssentialSubset(view.members, view.t, q)});
}

}  // namespace tx

namespace {

bool has_prefix(std::string_view s, std::string_view p) {
  return s.size() >= p.size() && s.substr(0, p.size()) == p;
}

}  // namespace

TxOrderNode::TxOrderNode(NodeId self, SubsetList es, std::vector<ViewSpec> views, Options opts)
    : self_(self), es_(std::move(es)), views_(std::move(views)), opts_(opts) {
  if (!es_ || es_->empty()) throw ConfigError("transaction ordering node without essential subsets");
  if (views_.empty()) throw ConfigError("transaction ordering needs at least one view");
  for (std::size_t i = 0; i < views_.size(); ++i) {
    if (views_[i].id != static_cast<std::int64_t>(i) + 1) throw ConfigError("views must be numbered 1..k");
    if (views_[i].members.empty()) throw ConfigError("view without members");
    const auto bad = validate_subset(views_[i].members.size(), views_[i].t,
                                     static_cast<std::uint32_t>(views_[i].members.size()) - views_[i].t);
    if (!bad.empty()) throw ConfigError("view " + std::to_string(views_[i].id) + " has an invalid fault threshold");
  }
  current_view_ = 1;
  min_[1] = 0;
}

const ViewSpec* TxOrderNode::view(std::int64_t id) const {
  if (id < 1 || id > static_cast<std::int64_t>(views_.size())) return nullptr;
  return &views_[static_cast<std::size_t>(id - 1)];
}

std::optional<std::int64_t> TxOrderNode::view_min(std::int64_t v) const {
  auto it = min_.find(v);
  if (it == min_.end()) return std::nullopt;
  return it->second;
}

std::int64_t TxOrderNode::highest_accepted() const {
  return accepted_.empty() ? -1 : accepted_.rbegin()->first;
}

std::optional<std::int64_t> TxOrderNode::requested_view() const {
  if (last_requested_ == 0) return std::nullopt;
  return last_requested_;
}

std::optional<std::int64_t> TxOrderNode::newview_decision(std::int64_t target) const {
  auto it = changes_.find(target);
  if (it == changes_.end() || !it->second.mvba || !it->second.mvba->decided()) return std::nullopt;
  return decode_i64(*it->second.mvba->decided());
}

bool TxOrderNode::backfill_stalled() const {
  for (const auto& [t, st] : changes_) {
    if (t > current_view_ && st.adopt_at) return true;
  }
  return false;
}

Message TxOrderNode::make(std::string instance, Label label, std::int64_t round,
                          std::string content) const {
  return Message{std::move(instance), label, round, std::move(content), self_};
}

void TxOrderNode::emit(Actions& a, Message m) const {
  if (opts_.observer && m.label != Label::NewView) return;
  a.sends.push_back(std::move(m));
}

Actions TxOrderNode::handle(const Message& msg) {
  if (has_prefix(msg.instance, "tx/fb/")) return on_fallback_msg(msg);
  if (auto v = child_index(msg.instance, "tx", "v"); v && msg.instance == tx::view_instance(*v)) {
    return on_block_msg(*v, msg);
  }
  if (auto t = child_index(msg.instance, "tx", "vc"); t) {
    if (msg.instance == tx::change_instance(*t)) return on_change_msg(*t, msg);
    if (has_prefix(msg.instance, tx::change_mvba_instance(*t))) {
      auto it = changes_.find(*t);
      if (it == changes_.end() || !it->second.mvba) {
        const ViewSpec* vs = view(*t);
        if (*t <= current_view_) return {};
        if (!opts_.observer || vs == nullptr ||
            std::find(vs->members.begin(), vs->members.end(), self_) == vs->members.end()) {
          return {};
        }
        changes_[*t].mvba = std::make_unique<MultiValuedAgreement>(
            tx::change_mvba_instance(*t), self_, tx::view_subsets(*vs),
            MultiValuedAgreement::Options{opts_.pipelining});
      }
      Actions a = changes_[*t].mvba->handle(msg);
      a.merge(evaluate_change(*t));
      return a;
    }
  }
  return {};
}

Actions TxOrderNode::on_coin(const std::string& tag, const CoinValue& value) {
  if (has_prefix(tag, "tx/fb/")) {
    auto slot = child_index(tag, "tx/fb", "slot");
    if (!slot || *slot < 0) return {};
    auto it = fb_slots_.find(static_cast<std::uint64_t>(*slot));
    if (it == fb_slots_.end()) return {};
    Actions a = it->second->on_coin(tag, value);
    a.merge(evaluate_fallback());
    return a;
  }
  if (auto t = child_index(tag, "tx", "vc"); t) {
    auto it = changes_.find(*t);
    if (it == changes_.end() || !it->second.mvba) return {};
    Actions a = it->second.mvba->on_coin(tag, value);
    a.merge(evaluate_change(*t));
    return a;
  }
  return {};
}

bool TxOrderNode::gate(std::int64_t n) const {
  const std::int64_t lo = min_.at(current_view_);
  if (n < lo) return false;
  for (std::int64_t k = lo; k < n; ++k) {
    if (accepted_.count(k) == 0) return false;
  }
  return true;
}

void TxOrderNode::accept(std::int64_t n, const std::string& block) {
  auto [it, fresh] = accepted_.emplace(n, block);
  if (!fresh && it->second != block) conflicts_.push_back(Conflict{n, it->second, block});
}

bool TxOrderNode::evidence(std::int64_t n) const {
  auto it = strong_ready_.find(current_view_);
  return it != strong_ready_.end() && it->second.count(n) != 0;
}

bool TxOrderNode::backed(std::int64_t n) const {
  return n < 0 || accepted_.count(n) != 0 || evidence(n);
}

Actions TxOrderNode::on_block_msg(std::int64_t v, const Message& msg) {
  const ViewSpec* vs = view(v);
  if (vs == nullptr || msg.round < 0) return {};
  if (v < current_view_) {
    ++stale_;
    return {};
  }
  auto& s = seqs_[v][msg.round];
  switch (msg.label) {
    case Label::Init:
      if (std::find(vs->members.begin(), vs->members.end(), msg.sender) == vs->members.end()) return {};
      if (!s.init.add(msg.content, msg.sender)) return {};
      break;
    case Label::Echo:
      if (s.echo.add(msg.content, msg.sender) != ExclusiveTally::Result::Added) return {};
      break;
    case Label::Ready:
      if (s.ready.add(msg.content, msg.sender) != ExclusiveTally::Result::Added) return {};
      break;
    case Label::Check:
      if (s.check.add(msg.content, msg.sender) != ExclusiveTally::Result::Added) return {};
      break;
    default:
      return {};
  }
  if (v != current_view_) return {};
  const std::size_t before = accepted_.size();
  Actions a = evaluate_seq(v, msg.round);
  if (accepted_.size() != before) a.merge(evaluate_view(v));
  return a;
}

Actions TxOrderNode::evaluate_view(std::int64_t v) {
  Actions a;
  bool again = true;
  while (again) {
    again = false;
    auto it = seqs_.find(v);
    if (it == seqs_.end()) break;
    std::vector<std::int64_t> keys;
    for (const auto& [n, s] : it->second) keys.push_back(n);
    const std::size_t before = accepted_.size();
    for (std::int64_t n : keys) a.merge(evaluate_seq(v, n));
    again = accepted_.size() != before;
  }
  std::vector<std::int64_t> targets;
  for (const auto& [t, st] : changes_) {
    if (t > current_view_) targets.push_back(t);
  }
  for (std::int64_t t : targets) a.merge(evaluate_change(t));
  return a;
}

Actions TxOrderNode::evaluate_seq(std::int64_t v, std::int64_t n) {
  Actions a;
  if (v != current_view_) return a;
  auto& s = seqs_[v][n];
  const auto& es = *es_;
  const ViewSpec* vs = view(v);
  const bool open = gate(n);
  const std::string inst = tx::view_instance(v);

  if (open && !s.echo_sent) {
    for (const auto& [b, senders] : s.init.all()) {
      if (senders.size() >= std::size_t{vs->t} + 1) {
        s.echo_sent = b;
        break;
      }
    }
    if (!s.echo_sent) {
      for (const auto& [b, senders] : s.echo.all()) {
        if (has_weak(es, senders)) {
          s.echo_sent = b;
          break;
        }
      }
    }
    if (s.echo_sent) emit(a, make(inst, Label::Echo, n, *s.echo_sent));
  }
  if (open && !s.ready_sent) {
    for (const auto& [b, senders] : s.echo.all()) {
      if (has_strong(es, senders)) {
        s.ready_sent = b;
        break;
      }
    }
    if (!s.ready_sent) {
      for (const auto& [b, senders] : s.ready.all()) {
        if (has_weak(es, senders)) {
          s.ready_sent = b;
          break;
        }
      }
    }
    if (s.ready_sent) emit(a, make(inst, Label::Ready, n, *s.ready_sent));
  }
  auto& ev = strong_ready_[v];
  if (ev.count(n) == 0) {
    for (const auto& [b, senders] : s.ready.all()) {
      if (has_strong(es, senders)) {
        ev.emplace(n, b);
        break;
      }
    }
  }
  if (open && !s.check_sent && !locked(v) && ev.count(n) != 0) {
    s.check_sent = ev.at(n);
    emit(a, make(inst, Label::Check, n, *s.check_sent));
  }
  for (const auto& [b, senders] : s.check.all()) {
    if (has_strong(es, senders)) {
      accept(n, b);
      break;
    }
  }
  return a;
}

Actions TxOrderNode::request(std::int64_t target) {
  if (view(target) == nullptr) {
    if (!fallback_) {
      fallback_ = true;
      return evaluate_fallback();
    }
    return {};
  }
  last_requested_ = std::max(last_requested_, target);
  auto& st = changes_[target];
  Actions a;
  if (!st.change_sent) {
    st.change_sent = true;
    emit(a, make(tx::change_instance(target), Label::Change, 0, ""));
  }
  a.merge(evaluate_change(target));
  return a;
}

Actions TxOrderNode::request_view_change() {
  const std::int64_t target = current_view_ + 1;
  auto it = changes_.find(target);
  if (it != changes_.end() && it->second.change_sent) return {};
  return request(target);
}

Actions TxOrderNode::escalate_view_change() {
  return request(std::max(last_requested_, current_view_) + 1);
}

Actions TxOrderNode::on_change_msg(std::int64_t target, const Message& msg) {
  const ViewSpec* vs = view(target);
  if (vs == nullptr) return {};
  if (target <= current_view_) {
    ++stale_;
    return {};
  }
  auto& st = changes_[target];
  switch (msg.label) {
    case Label::Change:
      if (!st.change.insert(msg.sender)) return {};
      break;
    case Label::Confirm:
      if (!st.confirm.insert(msg.sender)) return {};
      break;
    case Label::Lock:
      if (!st.locks.emplace(msg.sender, msg.round).second) return {};
      break;
    case Label::NewView:
      if (std::find(vs->members.begin(), vs->members.end(), msg.sender) == vs->members.end()) return {};
      if (!st.newview[msg.round].insert(msg.sender)) return {};
      break;
    case Label::Echo:
      if (st.echo.add(std::to_string(msg.round), msg.sender) != ExclusiveTally::Result::Added) return {};
      break;
    case Label::Ready:
      if (st.ready.add(std::to_string(msg.round), msg.sender) != ExclusiveTally::Result::Added) return {};
      break;
    default:
      return {};
  }
  return evaluate_change(target);
}

Actions TxOrderNode::evaluate_change(std::int64_t target) {
  Actions a;
  if (target <= current_view_) return a;
  auto& st = changes_[target];
  const auto& es = *es_;
  const ViewSpec* vs = view(target);
  const std::string inst = tx::change_instance(target);

  if (!st.confirm_sent && (has_strong(es, st.change) || has_weak(es, st.confirm))) {
    st.confirm_sent = true;
    emit(a, make(inst, Label::Confirm, 0, ""));
  }
  if (!st.lock_sent && has_strong(es, st.confirm)) {
    st.lock_sent = true;
    locks_.insert(current_view_);
    emit(a, make(inst, Label::Lock, highest_accepted(), ""));
  }
  if (!st.n_locked) {
    auto ok = [&](NodeId m) {
      auto it = st.locks.find(m);
      return it != st.locks.end() && backed(it->second);
    };
    if (quorum_everywhere(es, ok)) {
      std::int64_t best = -1;
      for (const auto& s : es) {
        for (NodeId m : s.members) {
          if (ok(m)) best = std::max(best, st.locks.at(m));
        }
      }
      st.n_locked = best;
    }
  }
  auto valid_cont = [&](std::int64_t n) { return st.n_locked && n > *st.n_locked && backed(n - 1); };

  const bool member = std::find(vs->members.begin(), vs->members.end(), self_) != vs->members.end();
  if (opts_.observer && member && st.n_locked) {
    if (!st.mvba) {
      st.mvba = std::make_unique<MultiValuedAgreement>(tx::change_mvba_instance(target), self_,
                                                       tx::view_subsets(*vs),
                                                       MultiValuedAgreement::Options{opts_.pipelining});
    }
    std::int64_t top = *st.n_locked;
    if (!accepted_.empty()) top = std::max(top, accepted_.rbegin()->first);
    if (auto it = strong_ready_.find(current_view_); it != strong_ready_.end() && !it->second.empty()) {
      top = std::max(top, it->second.rbegin()->first);
    }
    for (std::int64_t n = *st.n_locked + 1; n <= top + 1; ++n) {
      if (valid_cont(n) && st.mvba_inputs.insert(n).second) {
        a.merge(st.mvba->add_valid_input(std::to_string(n)));
      }
    }
    if (st.mvba->decided() && !st.newview_sent) {
      st.newview_sent = true;
      emit(a, make(inst, Label::NewView, *decode_i64(*st.mvba->decided()), ""));
    }
  }

  if (!st.echo_sent && st.n_locked) {
    for (const auto& [n, senders] : st.newview) {
      if (senders.size() >= std::size_t{vs->t} + 1 && valid_cont(n)) {
        st.echo_sent = true;
        emit(a, make(inst, Label::Echo, n, ""));
        break;
      }
    }
  }
  if (!st.echo_sent) {
    for (const auto& [n, senders] : st.echo.all()) {
      if (has_weak(es, senders)) {
        st.echo_sent = true;
        emit(a, make(inst, Label::Echo, *decode_i64(n), ""));
        break;
      }
    }
  }
  if (!st.ready_sent) {
    std::optional<std::string> pick;
    for (const auto& [n, senders] : st.echo.all()) {
      if (has_strong(es, senders)) {
        pick = n;
        break;
      }
    }
    if (!pick) {
      for (const auto& [n, senders] : st.ready.all()) {
        if (has_weak(es, senders)) {
          pick = n;
          break;
        }
      }
    }
    if (pick) {
      st.ready_sent = true;
      emit(a, make(inst, Label::Ready, *decode_i64(*pick), ""));
    }
  }
  if (!st.adopt_at) {
    for (const auto& [n, senders] : st.ready.all()) {
      if (has_strong(es, senders)) {
        st.adopt_at = *decode_i64(n);
        break;
      }
    }
  }
  if (st.adopt_at) a.merge(try_adopt(target));
  return a;
}

Actions TxOrderNode::try_adopt(std::int64_t target) {
  auto& st = changes_[target];
  const std::int64_t n_cont = *st.adopt_at;
  const std::int64_t lo = min_.at(current_view_);
  const auto& ev = strong_ready_[current_view_];
  for (std::int64_t m = lo; m < n_cont; ++m) {
    if (accepted_.count(m) == 0 && ev.count(m) == 0) return {};
  }
  for (std::int64_t m = lo; m < n_cont; ++m) {
    if (accepted_.count(m) == 0) accept(m, ev.at(m));
  }
  const std::int64_t old = current_view_;
  current_view_ = target;
  min_[target] = n_cont;
  seqs_.erase(old);
  strong_ready_.erase(old);
  changes_.erase(changes_.begin(), changes_.lower_bound(target));
  return evaluate_view(target);
}

ReliableBroadcast* TxOrderNode::fb_drbc(const std::string& instance) {
  auto it = fb_drbc_.find(instance);
  if (it != fb_drbc_.end()) return it->second.get();
  auto p = child_index(instance, "tx/fb", "drbc");
  if (!p || *p < 0) return nullptr;
  const std::string prefix = child_path("tx/fb", "drbc", *p) + "/";
  if (instance.size() <= prefix.size() || !decode_u64(std::string_view(instance).substr(prefix.size()))) {
    return nullptr;
  }
  auto rbc = std::make_unique<ReliableBroadcast>(instance, self_, NodeId{static_cast<std::uint32_t>(*p)}, es_, true);
  return fb_drbc_.emplace(instance, std::move(rbc)).first->second.get();
}

MultiValuedAgreement& TxOrderNode::fb_slot(std::uint64_t slot) {
  auto& m = fb_slots_[slot];
  if (!m) {
    m = std::make_unique<MultiValuedAgreement>(tx::fallback_slot_instance(slot), self_, es_,
                                               MultiValuedAgreement::Options{opts_.pipelining});
  }
  return *m;
}

Actions TxOrderNode::on_fallback_msg(const Message& msg) {
  if (opts_.observer) return {};
  Actions a;
  if (auto slot = child_index(msg.instance, "tx/fb", "slot"); slot && *slot >= 0) {
    auto& m = fb_slot(static_cast<std::uint64_t>(*slot));
    if (!m.owns(msg.instance)) return {};
    a = m.handle(msg);
  } else {
    ReliableBroadcast* rbc = fb_drbc(msg.instance);
    if (rbc == nullptr) return {};
    a = rbc->handle(msg);
  }
  a.merge(evaluate_fallback());
  return a;
}

Actions TxOrderNode::evaluate_fallback() {
  Actions a;
  if (opts_.observer) return a;
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [inst, rbc] : fb_drbc_) {
      if (fallback_) {
        for (const auto& block : rbc->awaiting_verdict()) {
          if (fb_chain_set_.count(block) != 0) {
            a.merge(rbc->set_support(block, Verdict::Oppose));
            changed = true;
          } else if (pinned_.empty() || (pinned_.size() == 1 && pinned_.count(block) != 0)) {
            a.merge(rbc->set_support(block, Verdict::Support));
            changed = true;
          }
        }
      }
      if (rbc->accepted()) {
        const std::string& b = *rbc->accepted();
        if (fb_chain_set_.count(b) == 0 && pinned_.insert(b).second) {
          ever_pinned_.insert(b);
          if (fallback_) a.merge(fb_slot(fb_chain_.size()).add_valid_input(b));
          changed = true;
        }
      }
    }
    if (!fallback_) break;
    auto it = fb_slots_.find(fb_chain_.size());
    if (it != fb_slots_.end() && it->second->decided()) {
      const std::string x = *it->second->decided();
      fb_chain_.push_back(x);
      fb_chain_set_.insert(x);
      pinned_.erase(x);
      auto& next = fb_slot(fb_chain_.size());
      for (const auto& b : pinned_) a.merge(next.add_valid_input(b));
      changed = true;
    } else if (!pinned_.empty()) {
      auto& cur = fb_slot(fb_chain_.size());
      for (const auto& b : pinned_) {
        if (cur.values(0).count(b) == 0) {
          a.merge(cur.add_valid_input(b));
          changed = true;
        }
      }
    }
  }
  return a;
}

}  // namespace cobalt
