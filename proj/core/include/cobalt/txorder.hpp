#pragma once

#include <cstdint>
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

struct ViewSpec {
  std::int64_t id = 1;
  std::vector<NodeId> members;
  std::uint32_t t = 0;
};

namespace tx {
std::string view_instance(std::int64_t view);
std::string change_instance(std::int64_t target);
std::string change_mvba_instance(std::int64_t target);
std::string fallback_drbc_instance(NodeId proposer, std::uint64_t serial);
std::string fallback_slot_instance(std::uint64_t slot);
// Single complete-network subset over a view's members.
SubsetList view_subsets(const ViewSpec& view);
}  // namespace tx

// Transaction ordering driven by a committee ("view"), with a view change that
// preserves the accepted prefix and a committee-free fallback chain.
//
// Observer mode is used by committee members: they track Cobalt traffic to learn
// the locked sequence and run the committee agreement, but never emit Cobalt-level
// messages.
class TxOrderNode {
 public:
  struct Options {
    bool observer = false;
    bool pipelining = false;
  };

  struct Conflict {
    std::int64_t sequence;
    std::string first;
    std::string second;
  };

  TxOrderNode(NodeId self, SubsetList es, std::vector<ViewSpec> views, Options opts);

  Actions handle(const Message& msg);
  Actions on_coin(const std::string& tag, const CoinValue& value);

  // Asks to move to the view after the current one; repeated calls are no-ops.
  Actions request_view_change();
  // Asks to move past the most recently requested view, or enters fallback when none is left.
  Actions escalate_view_change();

  std::int64_t current_view() const { return current_view_; }
  std::optional<std::int64_t> view_min(std::int64_t view) const;
  bool locked(std::int64_t view) const { return locks_.count(view) != 0; }
  const std::map<std::int64_t, std::string>& accepted() const { return accepted_; }
  std::int64_t highest_accepted() const;
  const std::vector<Conflict>& conflicts() const { return conflicts_; }
  std::size_t stale_messages() const { return stale_; }
  std::optional<std::int64_t> requested_view() const;
  bool backfill_stalled() const;

  bool fallback() const { return fallback_; }
  const std::vector<std::string>& fallback_chain() const { return fb_chain_; }
  const std::set<std::string>& pinned() const { return pinned_; }
  const std::set<std::string>& ever_pinned() const { return ever_pinned_; }

  // For committee members: the next-view number they broadcast, if decided.
  std::optional<std::int64_t> newview_decision(std::int64_t target) const;

 private:
  struct SeqState {
    Tally init;
    ExclusiveTally echo;
    ExclusiveTally ready;
    ExclusiveTally check;
    std::optional<std::string> echo_sent;
    std::optional<std::string> ready_sent;
    std::optional<std::string> check_sent;
  };

  struct ChangeState {
    bool change_sent = false;
    bool confirm_sent = false;
    bool lock_sent = false;
    NodeSet change;
    NodeSet confirm;
    std::map<NodeId, std::int64_t> locks;
    std::optional<std::int64_t> n_locked;
    std::map<std::int64_t, NodeSet> newview;
    ExclusiveTally echo;
    ExclusiveTally ready;
    bool echo_sent = false;
    bool ready_sent = false;
    std::optional<std::int64_t> adopt_at;
    std::unique_ptr<MultiValuedAgreement> mvba;
    std::set<std::int64_t> mvba_inputs;
    bool newview_sent = false;
  };

  const ViewSpec* view(std::int64_t id) const;
  void emit(Actions& a, Message m) const;
  Message make(std::string instance, Label label, std::int64_t round, std::string content) const;

  bool gate(std::int64_t n) const;
  Actions evaluate_seq(std::int64_t v, std::int64_t n);
  Actions evaluate_view(std::int64_t v);
  void accept(std::int64_t n, const std::string& block);
  bool evidence(std::int64_t n) const;
  bool backed(std::int64_t n) const;
  Actions on_block_msg(std::int64_t v, const Message& msg);

  Actions on_change_msg(std::int64_t target, const Message& msg);
  Actions evaluate_change(std::int64_t target);
  Actions request(std::int64_t target);
  Actions try_adopt(std::int64_t target);

  Actions on_fallback_msg(const Message& msg);
  Actions evaluate_fallback();
  ReliableBroadcast* fb_drbc(const std::string& instance);
  MultiValuedAgreement& fb_slot(std::uint64_t slot);

  NodeId self_;
  SubsetList es_;
  std::vector<ViewSpec> views_;
  Options opts_;

  std::int64_t current_view_ = 1;
  std::map<std::int64_t, std::int64_t> min_;
  std::set<std::int64_t> locks_;
  std::map<std::int64_t, std::map<std::int64_t, SeqState>> seqs_;
  std::map<std::int64_t, std::map<std::int64_t, std::string>> strong_ready_;
  std::map<std::int64_t, std::string> accepted_;
  std::vector<Conflict> conflicts_;
  std::size_t stale_ = 0;

  std::map<std::int64_t, ChangeState> changes_;
  std::int64_t last_requested_ = 0;

  bool fallback_ = false;
  std::map<std::string, std::unique_ptr<ReliableBroadcast>> fb_drbc_;
  std::map<std::uint64_t, std::unique_ptr<MultiValuedAgreement>> fb_slots_;
  std::vector<std::string> fb_chain_;
  std::set<std::string> fb_chain_set_;
  std::set<std::string> pinned_;
  std::set<std::string> ever_pinned_;
};

}  // namespace cobalt
