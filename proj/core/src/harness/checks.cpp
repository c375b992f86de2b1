#include "cobalt/harness/checks.hpp"

#include <algorithm>
#include <deque>

#include "cobalt/message.hpp"

namespace cobalt::harness {

namespace {

std::string nm(const TrustConfig& trust, NodeId id) { return trust.name(id); }

std::string rat_str(const Ratification& r) {
  return "(slot " + std::to_string(r.slot) + ", " + r.amendment.id() + ", t=" + std::to_string(r.activation) + ")";
}

}  // namespace

std::vector<std::pair<NodeId, NodeId>> linked_honest_pairs(const TrustConfig& trust, const FaultAssignment& faults) {
  std::vector<std::pair<NodeId, NodeId>> out;
  const auto nodes = trust.nodes();
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    if (!faults.honest(nodes[a])) continue;
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      if (!faults.honest(nodes[b])) continue;
      if (linkage(trust, faults, nodes[a], nodes[b]) != Linkage::Unlinked) out.emplace_back(nodes[a], nodes[b]);
    }
  }
  return out;
}

void check_rbc(const TrustConfig& trust, const FaultAssignment& faults, NodeId broadcaster,
               const std::string& content, const std::vector<RbcLog>& logs, Violations& out) {
  for (auto [i, j] : linked_honest_pairs(trust, faults)) {
    const auto& a = logs[i.value].accepted;
    const auto& b = logs[j.value].accepted;
    if (a && b && *a != *b) {
      out.push_back("rbc consistency: " + nm(trust, i) + " accepted '" + *a + "' but " + nm(trust, j) +
                    " accepted '" + *b + "'");
    }
  }
  if (faults.correct(broadcaster)) {
    for (NodeId i : trust.nodes()) {
      const auto& a = logs[i.value].accepted;
      if (faults.honest(i) && a && *a != content) {
        out.push_back("rbc validity: " + nm(trust, i) + " accepted '" + *a + "' from a correct broadcaster of '" +
                      content + "'");
      }
    }
  }
}

void check_abba(const TrustConfig& trust, const FaultAssignment& faults, const std::vector<AbbaLog>& logs,
                Violations& out) {
  for (auto [i, j] : linked_honest_pairs(trust, faults)) {
    const auto& a = logs[i.value].decided;
    const auto& b = logs[j.value].decided;
    if (a && b && *a != *b) {
      out.push_back("abba consistency: " + nm(trust, i) + " and " + nm(trust, j) + " decided differently");
    }
  }

  const NodeClassification cls = classify(trust, faults);
  for (NodeId i : trust.nodes()) {
    const auto& d = logs[i.value].decided;
    if (!faults.honest(i) || !d) continue;
    std::vector<bool> seen(trust.size(), false);
    std::deque<NodeId> queue{i};
    seen[i.value] = true;
    bool found = false;
    while (!queue.empty() && !found) {
      const NodeId k = queue.front();
      queue.pop_front();
      if (cls.unblocked.contains(k) && logs[k.value].input == *d) {
        found = true;
        break;
      }
      trust.unl(k).for_each([&](NodeId m) {
        if (!seen[m.value] && faults.honest(m)) {
          seen[m.value] = true;
          queue.push_back(m);
        }
      });
    }
    if (!found) {
      out.push_back("abba strong validity: " + nm(trust, i) + " decided " + (*d ? "1" : "0") +
                    " with no unblocked input of that value reachable through honest links");
    }
  }

  // Post-coin estimate properties over healthy nodes.
  std::map<std::int64_t, std::set<bool>> singles;
  std::optional<std::pair<std::int64_t, bool>> locked;
  for (NodeId i : trust.nodes()) {
    if (!cls.healthy.contains(i)) continue;
    for (const auto& s : logs[i.value].steps) {
      if (s.values == 1 || s.values == 2) {
        const bool v = s.values == 2;
        singles[s.round].insert(v);
        if (v == s.coin && (!locked || s.round < locked->first)) locked = std::make_pair(s.round, v);
      }
      if (s.values == 1 || s.values == 2) {
        if (s.est_next != (s.values == 2)) {
          out.push_back("abba coin step: " + nm(trust, i) + " left singleton values without keeping its value");
        }
      } else if (s.values == 3 && s.est_next != s.coin) {
        out.push_back("abba coin step: " + nm(trust, i) + " ignored the coin with both values present");
      }
    }
  }
  for (const auto& [r, vals] : singles) {
    if (vals.size() > 1) {
      out.push_back("abba: healthy nodes held opposite singleton values in round " + std::to_string(r));
    }
  }
  if (locked) {
    for (NodeId i : trust.nodes()) {
      if (!cls.healthy.contains(i)) continue;
      for (const auto& s : logs[i.value].steps) {
        if (s.round >= locked->first && s.est_next != locked->second) {
          out.push_back("abba: " + nm(trust, i) + " moved past round " + std::to_string(locked->first) +
                        " with an estimate other than the aligned coin value");
          break;
        }
      }
    }
  }
}

void check_coin_blindness(const std::string& abba_instance, const std::vector<AbbaLog>& logs,
                          const FaultAssignment& faults, const CoinVisibility& vis, Violations& out) {
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (!faults.honest(NodeId{static_cast<std::uint32_t>(i)})) continue;
    for (const auto& s : logs[i].steps) {
      if (s.values != 1 && s.values != 2) continue;
      const bool v = s.values == 2;
      const std::string tag = child_path(abba_instance, "coin", s.round);
      auto vis_it = vis.visible.find(tag);
      if (vis_it == vis.visible.end()) continue;
      auto conf_it = vis.first_conf.find({tag, v});
      if (conf_it == vis.first_conf.end() || conf_it->second >= vis_it->second) {
        out.push_back("coin blindness: " + tag + " was computable by the adversary before any honest CONF carried " +
                      (v ? "1" : "0"));
      }
    }
  }
}

void check_mvba(const TrustConfig& trust, const FaultAssignment& faults, const std::vector<MvbaLog>& logs,
                bool strongly_connected, Violations& out) {
  for (auto [i, j] : linked_honest_pairs(trust, faults)) {
    const auto& a = logs[i.value].decided;
    const auto& b = logs[j.value].decided;
    if (a && b && *a != *b) {
      out.push_back("mvba consistency: " + nm(trust, i) + " decided '" + *a + "', " + nm(trust, j) + " decided '" +
                    *b + "'");
    }
  }
  for (NodeId i : trust.nodes()) {
    const auto& l = logs[i.value];
    if (!faults.honest(i) || !l.decided) continue;
    if (l.values.empty() || l.values[0].count(*l.decided) == 0) {
      out.push_back("mvba validity: " + nm(trust, i) + " decided a value outside its valid inputs");
    }
  }
  if (!strongly_connected) return;
  std::size_t rounds = 0;
  for (const auto& l : logs) rounds = std::max(rounds, l.values.size());
  std::vector<std::set<std::string>> unions(rounds);
  for (NodeId i : trust.nodes()) {
    if (!faults.honest(i)) continue;
    const auto& l = logs[i.value];
    for (std::size_t r = 0; r < l.values.size(); ++r) unions[r].insert(l.values[r].begin(), l.values[r].end());
  }
  for (std::size_t r = 0; r + 1 < rounds; ++r) {
    const auto& cur = unions[r];
    const auto& nxt = unions[r + 1];
    if (nxt.empty()) break;
    if (!std::includes(cur.begin(), cur.end(), nxt.begin(), nxt.end())) {
      out.push_back("mvba shrinkage: round " + std::to_string(r + 1) + " candidates are not drawn from round " +
                    std::to_string(r));
    } else if (cur.size() >= 2 && nxt.size() >= cur.size()) {
      out.push_back("mvba shrinkage: candidate union did not shrink after round " + std::to_string(r));
    }
  }
}

void check_dabc(const TrustConfig& trust, const FaultAssignment& faults, const std::vector<DabcLog>& logs,
                bool terminated, Violations& out) {
  const auto pairs = linked_honest_pairs(trust, faults);
  for (auto [i, j] : pairs) {
    const auto& a = logs[i.value].ratified;
    const auto& b = logs[j.value].ratified;
    const std::size_t k = std::min(a.size(), b.size());
    for (std::size_t s = 0; s < k; ++s) {
      if (!(a[s] == b[s])) {
        out.push_back("dabc linearizability: " + nm(trust, i) + " ratified " + rat_str(a[s]) + " where " +
                      nm(trust, j) + " ratified " + rat_str(b[s]));
        break;
      }
    }
  }
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& r = logs[i].ratified;
    for (std::size_t s = 0; s < r.size(); ++s) {
      if (r[s].slot != s || r[s].amendment.slot != s) {
        out.push_back("dabc: " + nm(trust, NodeId{static_cast<std::uint32_t>(i)}) + " ratified out of slot order");
        break;
      }
    }
  }

  // Democracy: some subset of the ratifier where most honest members supported it.
  const NodeClassification cls = classify(trust, faults);
  for (NodeId i : trust.nodes()) {
    if (!cls.healthy.contains(i) || !connectivity(trust, faults, cls, i).weakly) continue;
    for (const auto& rat : logs[i.value].ratified) {
      const std::string id = rat.amendment.id();
      bool witnessed = false;
      for (const auto& s : *trust.subsets(i)) {
        std::size_t honest = 0;
        std::size_t support = 0;
        for (NodeId m : s.members) {
          if (!faults.honest(m)) continue;
          ++honest;
          const auto& v = logs[m.value].verdicts;
          if (std::any_of(v.begin(), v.end(), [&](const auto& rec) {
                return rec.amendment_id == id && rec.slot == rat.slot && rec.support;
              })) {
            ++support;
          }
        }
        if (2 * support > honest) {
          witnessed = true;
          break;
        }
      }
      if (!witnessed) {
        out.push_back("dabc democracy: " + nm(trust, i) + " ratified " + rat_str(rat) +
                      " without an honest-majority subset supporting it");
      }
    }
  }

  // Full knowledge: a returned wait(tau) must list every ratification anyone linked makes before tau.
  for (NodeId i : trust.nodes()) {
    if (!faults.honest(i)) continue;
    for (const auto& w : logs[i.value].waits) {
      for (NodeId j : trust.nodes()) {
        if (!faults.honest(j)) continue;
        if (i != j && linkage(trust, faults, i, j) == Linkage::Unlinked) continue;
        for (const auto& rat : logs[j.value].ratified) {
          if (rat.activation >= w.tau) continue;
          if (std::find(w.known.begin(), w.known.end(), rat) == w.known.end()) {
            out.push_back("dabc full knowledge: " + nm(trust, i) + " finished waiting for " + std::to_string(w.tau) +
                          " at " + std::to_string(w.returned_at) + " without " + rat_str(rat) + " ratified by " +
                          nm(trust, j));
          }
        }
      }
    }
  }

  for (std::size_t i = 0; i < logs.size(); ++i) {
    std::set<std::uint64_t> closed;
    for (const auto& e : logs[i].pending_log) {
      if (e.closed) {
        closed.insert(e.slot);
      } else if (closed.count(e.slot) != 0) {
        out.push_back("dabc slot closure: " + nm(trust, NodeId{static_cast<std::uint32_t>(i)}) +
                      " admitted a pair for closed slot " + std::to_string(e.slot));
      }
    }
  }

  if (terminated) {
    std::size_t longest = 0;
    for (NodeId i : trust.nodes()) {
      if (cls.healthy.contains(i)) longest = std::max(longest, logs[i.value].ratified.size());
    }
    for (NodeId i : trust.nodes()) {
      if (!cls.unblocked.contains(i) || !faults.correct(i)) continue;
      if (logs[i.value].ratified.size() < longest) {
        out.push_back("dabc agreement: " + nm(trust, i) + " is missing ratifications made by healthy nodes");
      }
    }
  }
}

void check_txorder(const TrustConfig& trust, const FaultAssignment& faults, const std::vector<TxLog>& logs,
                   bool terminated, Violations& out) {
  for (NodeId i : trust.nodes()) {
    if (faults.honest(i) && logs[i.value].internal_conflicts != 0) {
      out.push_back("txorder: " + nm(trust, i) + " accepted two batches for one sequence");
    }
  }
  for (auto [i, j] : linked_honest_pairs(trust, faults)) {
    const auto& a = logs[i.value].accepted;
    for (const auto& [n, b] : logs[j.value].accepted) {
      auto it = a.find(n);
      if (it != a.end() && it->second != b) {
        out.push_back("txorder safety: sequence " + std::to_string(n) + " holds '" + it->second + "' at " +
                      nm(trust, i) + " and '" + b + "' at " + nm(trust, j));
      }
    }
    const auto& ca = logs[i.value].chain;
    const auto& cb = logs[j.value].chain;
    for (std::size_t k = 0; k < std::min(ca.size(), cb.size()); ++k) {
      if (ca[k] != cb[k]) {
        out.push_back("txorder fallback: chains of " + nm(trust, i) + " and " + nm(trust, j) + " diverge at slot " +
                      std::to_string(k));
        break;
      }
    }
  }
  std::map<std::int64_t, std::set<std::int64_t>> mins;
  for (NodeId i : trust.nodes()) {
    if (!faults.honest(i)) continue;
    for (const auto& [v, m] : logs[i.value].mins) mins[v].insert(m);
  }
  for (const auto& [v, ms] : mins) {
    if (ms.size() > 1) out.push_back("txorder: honest nodes disagree on the floor of view " + std::to_string(v));
  }
  if (!terminated) return;
  for (NodeId i : trust.nodes()) {
    if (!faults.correct(i)) continue;
    for (const auto& b : logs[i.value].ever_pinned) {
      for (NodeId j : trust.nodes()) {
        if (!faults.correct(j) || !logs[j.value].fallback) continue;
        const auto& c = logs[j.value].chain;
        if (std::find(c.begin(), c.end(), b) == c.end()) {
          out.push_back("txorder fallback: block '" + b + "' pinned by " + nm(trust, i) + " never ratified at " +
                        nm(trust, j));
        }
      }
    }
  }
}

}  // namespace cobalt::harness
