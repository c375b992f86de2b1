#include "cobalt/harness/oracle.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <map>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "cobalt/rbc.hpp"
#include "cobalt/topology.hpp"

namespace cobalt::harness {

namespace {

constexpr std::size_t kMaxNotes = 8;

void note(OracleVerdict& v, std::string s) {
  ++v.counterexamples;
  if (v.notes.size() < kMaxNotes) v.notes.push_back(std::move(s));
}

std::string triple(std::size_t n, std::uint32_t t, std::uint32_t q) {
  return "(n=" + std::to_string(n) + ",t=" + std::to_string(t) + ",q=" + std::to_string(q) + ")";
}

EssentialSubset first_n(std::size_t n, std::uint32_t t, std::uint32_t q) {
  std::vector<NodeId> m;
  for (std::uint32_t i = 0; i < n; ++i) m.push_back(NodeId{i});
  return EssentialSubset(std::move(m), t, q);
}

NodeSet from_mask(std::uint64_t mask) {
  NodeSet s;
  for (std::uint32_t i = 0; mask != 0; ++i, mask >>= 1) {
    if ((mask & 1U) != 0) s.insert(NodeId{i});
  }
  return s;
}

bool valid(std::size_t n, std::uint32_t t, std::uint32_t q) { return validate_subset(n, t, q).empty(); }

}  // namespace

OracleVerdict oracle_parameter_laws(std::size_t max_n) {
  OracleVerdict v;
  v.check = "laws";
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::uint32_t t = 0; t <= n + 1; ++t) {
      for (std::uint32_t q = 0; q <= n + 1; ++q) {
        ++v.cases;
        const auto sn = static_cast<long>(n);
        const long st = t;
        const long sq = q;
        const bool range = st <= sn && sq <= sn;
        bool consistency = st < 2 * sq - sn;
        const bool progress = 2 * st < sq;
        if (range) {
          // Two quorums placed as far apart as possible still share more than t members.
          const std::uint64_t low = (std::uint64_t{1} << q) - 1;
          const std::uint64_t high = low << (n - q);
          const bool witness = std::popcount(low & high) > static_cast<int>(t);
          if (witness != consistency) note(v, "intersection witness disagrees at " + triple(n, t, q));
          consistency = witness;
        }
        std::vector<Inequality> want;
        if (!range) want.push_back(Inequality::ParameterRange);
        if (!consistency) want.push_back(Inequality::Consistency);
        if (!progress) want.push_back(Inequality::Progress);
        if (validate_subset(n, t, q) != want) note(v, "validate_subset disagrees at " + triple(n, t, q));
        if (n >= 3 * static_cast<std::size_t>(t) + 1 && q == n - t && !want.empty()) {
          note(v, "n >= 3t+1, q = n-t rejected at " + triple(n, t, q));
        }
      }
    }
  }
  return v;
}

OracleVerdict oracle_transfer(std::size_t max_n, bool invalid) {
  OracleVerdict v;
  v.check = invalid ? "transfer-control" : "transfer";
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::uint32_t t = 0; t <= n; ++t) {
      for (std::uint32_t q = 1; q <= n; ++q) {
        const bool eligible = valid(n, t, q) && t <= n - q;
        if (eligible == invalid) continue;
        const EssentialSubset s = first_n(n, t, q);
        const std::vector<EssentialSubset> es{s};
        const std::uint64_t all = (std::uint64_t{1} << n) - 1;
        for (std::uint64_t a = 0; a <= all; ++a) {
          if (std::popcount(a) < static_cast<int>(q)) continue;
          for (std::uint64_t b = 0; b <= all; ++b) {
            if (std::popcount(b) > static_cast<int>(t)) continue;
            ++v.cases;
            if (!has_strong(es, from_mask(a))) {
              note(v, "quorum not strong at " + triple(n, t, q));
              continue;
            }
            if (!has_weak(es, from_mask(a & ~b))) {
              note(v, "no transfer at " + triple(n, t, q) + " senders=" + std::to_string(a) +
                          " byzantine=" + std::to_string(b));
            }
          }
        }
      }
    }
  }
  return v;
}

OracleVerdict oracle_blocking(std::size_t max_n, bool invalid) {
  OracleVerdict v;
  v.check = invalid ? "blocking-control" : "blocking";
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::uint32_t t = 0; t <= n; ++t) {
      for (std::uint32_t q = 1; q <= n; ++q) {
        if (invalid) {
          const auto bad = validate_subset(n, t, q);
          if (std::find(bad.begin(), bad.end(), Inequality::Consistency) == bad.end()) continue;
        } else if (!valid(n, t, q)) {
          continue;
        }
        const std::vector<EssentialSubset> es{first_n(n, t, q)};
        for (std::uint32_t b = 0; b <= t; ++b) {
          // Byzantine members 0..b-1 send both messages; each honest member sends one or none.
          const std::uint64_t byz = (std::uint64_t{1} << b) - 1;
          std::uint64_t combos = 1;
          for (std::size_t k = b; k < n; ++k) combos *= 3;
          for (std::uint64_t c = 0; c < combos; ++c) {
            ++v.cases;
            std::uint64_t m1 = byz;
            std::uint64_t m2 = byz;
            std::uint64_t x = c;
            for (std::size_t k = b; k < n; ++k, x /= 3) {
              if (x % 3 == 1) m1 |= std::uint64_t{1} << k;
              if (x % 3 == 2) m2 |= std::uint64_t{1} << k;
            }
            if (has_strong(es, from_mask(m1)) && has_strong(es, from_mask(m2))) {
              note(v, "dual strong support at " + triple(n, t, q) + " b=" + std::to_string(b));
            }
          }
        }
      }
    }
  }
  return v;
}

OracleVerdict oracle_quorum_model(std::uint64_t n_i, std::uint64_t q_i, std::uint64_t n_j, std::uint64_t q_j,
                                  std::uint64_t overlap, bool expect_linked) {
  OracleVerdict v;
  v.check = "quorum";
  // The implicit family holds every subset of size >= 3(n - q) + 1; a shared one lies in the overlap.
  const std::uint64_t need_i = 3 * (n_i - q_i) + 1;
  const std::uint64_t need_j = 3 * (n_j - q_j) + 1;
  bool shared = false;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << overlap); ++m) {
    ++v.cases;
    const auto size = static_cast<std::uint64_t>(std::popcount(m));
    if (size >= need_i && size >= need_j && size <= n_i && size <= n_j) {
      shared = true;
      break;
    }
  }
  const bool analytic = quorum_model_linked(n_i, q_i, n_j, q_j, overlap);
  if (shared != analytic) note(v, "analytic verdict disagrees with enumeration");
  if (shared != expect_linked) note(v, std::string("enumeration found linked=") + (shared ? "true" : "false"));
  return v;
}

namespace {

// Exhaustive delivery-order search for a 4-node broadcast with a Byzantine broadcaster (node 0).
class RbcSearch {
 public:
  static constexpr std::uint32_t kHonest = 3;

  RbcSearch(std::uint64_t cap, OracleVerdict& v) : cap_(cap), v_(v) {
    es_ = std::make_shared<const std::vector<EssentialSubset>>(
        std::vector<EssentialSubset>{first_n(4, 1, 3)});
  }

  // `init[r]` is the content node r+1 receives; `flip` makes Byzantine ECHO/READY disagree with it.
  bool explore(const std::array<int, 3>& init, bool flip) {
    init_ = init;
    flip_ = flip;
    seen_.clear();
    State s;
    for (std::uint32_t i = 1; i <= kHonest; ++i) s.nodes.emplace_back("rbc", NodeId{i}, NodeId{0}, es_);
    s.sent = (std::uint64_t{1} << 9) - 1;  // the broadcaster's 9 messages are in flight
    s.sent <<= kHonestIds;
    return dfs(s);
  }

 private:
  static constexpr int kHonestIds = 36;

  struct State {
    std::vector<ReliableBroadcast> nodes;
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
  };

  struct Key {
    std::uint64_t sent, delivered, accepted;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<std::uint64_t>{}(k.sent * 0x9e3779b97f4a7c15ULL ^ k.delivered) ^ (k.accepted << 1);
    }
  };

  static std::string content(int c) { return c == 0 ? "a" : "b"; }
  static int code(const std::string& c) { return c == "a" ? 0 : 1; }

  static int honest_id(std::uint32_t sender, Label l, int c, std::uint32_t to) {
    return static_cast<int>((((sender - 1) * 2 + (l == Label::Ready ? 1 : 0)) * 2 + c) * 3 + (to - 1));
  }

  Message decode(int id) const {
    if (id >= kHonestIds) {
      const int k = id - kHonestIds;
      const int to = k % 3;
      const Label l = k / 3 == 0 ? Label::Init : k / 3 == 1 ? Label::Echo : Label::Ready;
      const int c = l == Label::Init ? init_[to] : (init_[to] ^ (flip_ ? 1 : 0));
      return Message{"rbc", l, 0, content(c), NodeId{0}};
    }
    int x = id / 3;
    const int c = x % 2;
    x /= 2;
    const Label l = x % 2 == 1 ? Label::Ready : Label::Echo;
    const auto sender = static_cast<std::uint32_t>(x / 2 + 1);
    return Message{"rbc", l, 0, content(c), NodeId{sender}};
  }

  static std::uint32_t recipient(int id) {
    return static_cast<std::uint32_t>((id >= kHonestIds ? (id - kHonestIds) % 3 : id % 3) + 1);
  }

  // Delivers to node `to`; the node's own sends are processed locally at once.
  void deliver(State& s, std::uint32_t to, const Message& m) {
    std::vector<Message> local{m};
    while (!local.empty()) {
      Message cur = std::move(local.back());
      local.pop_back();
      Actions a = s.nodes[to - 1].handle(cur);
      for (auto& out : a.sends) {
        for (std::uint32_t r = 1; r <= kHonest; ++r) {
          if (r != to) s.sent |= std::uint64_t{1} << honest_id(to, out.label, code(out.content), r);
        }
        local.push_back(std::move(out));
      }
    }
  }

  bool dfs(const State& s) {
    std::uint64_t acc = 0;
    std::optional<std::string> first;
    for (std::uint32_t i = 0; i < kHonest; ++i) {
      const auto& a = s.nodes[i].accepted();
      acc |= static_cast<std::uint64_t>(a ? code(*a) + 1 : 0) << (2 * i);
      if (!a) continue;
      if (first && *first != *a) {
        note(v_, "honest nodes accepted different contents");
        return true;
      }
      first = a;
    }
    if (!seen_.insert(Key{s.sent, s.delivered, acc}).second) return true;
    ++v_.cases;
    if (v_.cases > cap_) return false;
    std::uint64_t pending = s.sent & ~s.delivered;
    while (pending != 0) {
      const int id = std::countr_zero(pending);
      pending &= pending - 1;
      State next = s;
      next.delivered |= std::uint64_t{1} << id;
      deliver(next, recipient(id), decode(id));
      if (!dfs(next)) return false;
    }
    return true;
  }

  std::uint64_t cap_;
  OracleVerdict& v_;
  SubsetList es_;
  std::array<int, 3> init_{};
  bool flip_ = false;
  std::unordered_set<Key, KeyHash> seen_;
};

}  // namespace

OracleVerdict oracle_rbc(std::size_t n, std::uint64_t state_cap) {
  OracleVerdict v;
  v.check = "rbc";
  if (n != 4) {
    v.refused = true;
    v.notes.push_back("bounded search supports n = 4 only; requested n = " + std::to_string(n) +
                      " needs " + std::to_string(n - 1) + " honest replicas and " +
                      std::to_string((n - 1) * (n - 2) * 4 + 3 * (n - 1)) + " message slots");
    return v;
  }
  RbcSearch search(state_cap, v);
  for (int mask = 0; mask < 8; ++mask) {
    for (bool flip : {false, true}) {
      const std::array<int, 3> init{mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
      if (!search.explore(init, flip)) {
        v.refused = true;
        v.notes.push_back("state cap " + std::to_string(state_cap) + " exceeded after " +
                          std::to_string(v.cases) + " states");
        return v;
      }
    }
  }
  return v;
}

namespace {

std::uint64_t number(const std::map<std::string, std::string>& kv, const std::string& key, std::uint64_t dflt,
                     std::string_view origin) {
  auto it = kv.find(key);
  if (it == kv.end()) return dflt;
  std::uint64_t out = 0;
  const auto& s = it->second;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ConfigError(std::string(origin) + ": '" + key + "' expects a number, got '" + s + "'");
  }
  return out;
}

OracleVerdict refuse(std::string check, std::string why) {
  OracleVerdict v;
  v.check = std::move(check);
  v.refused = true;
  v.notes.push_back(std::move(why));
  return v;
}

}  // namespace

OracleVerdict run_oracle_instance(std::string_view text, std::string_view origin) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  const auto it = kv.find("check");
  if (it == kv.end()) throw ConfigError(std::string(origin) + ": missing 'check'");
  const std::string& check = it->second;
  const bool control = kv.count("control") != 0 && kv.at("control") == "true";
  if (check == "laws") {
    const auto n = number(kv, "max_n", 12, origin);
    if (n > 20) return refuse(check, "max_n " + std::to_string(n) + " exceeds 20");
    return oracle_parameter_laws(n);
  }
  if (check == "transfer" || check == "blocking") {
    const auto n = number(kv, "max_n", 7, origin);
    if (n > 9) {
      return refuse(check, "max_n " + std::to_string(n) + " exceeds 9 (3^n assignments per triple)");
    }
    return check == "transfer" ? oracle_transfer(n, control) : oracle_blocking(n, control);
  }
  if (check == "quorum") {
    const auto overlap = number(kv, "overlap", 0, origin);
    if (overlap > 24) return refuse(check, "overlap " + std::to_string(overlap) + " exceeds 24 (2^overlap subsets)");
    const auto ni = number(kv, "n_i", 0, origin);
    const auto qi = number(kv, "q_i", 0, origin);
    const auto nj = number(kv, "n_j", ni, origin);
    const auto qj = number(kv, "q_j", qi, origin);
    if (qi > ni || qj > nj || overlap > std::min(ni, nj)) throw ConfigError(std::string(origin) + ": invalid quorum model");
    const auto e = kv.find("expect");
    if (e == kv.end()) throw ConfigError(std::string(origin) + ": quorum check needs 'expect = linked|unlinked'");
    return oracle_quorum_model(ni, qi, nj, qj, overlap, e->second == "linked");
  }
  if (check == "rbc") return oracle_rbc(number(kv, "n", 4, origin), number(kv, "state_cap", 5000000, origin));
  throw ConfigError(std::string(origin) + ": unknown check '" + check + "'");
}

std::string format_verdict(const OracleVerdict& v, bool records) {
  if (records) {
    nlohmann::ordered_json j;
    j["kind"] = "oracle";
    j["check"] = v.check;
    j["refused"] = v.refused;
    j["cases"] = v.cases;
    j["counterexamples"] = v.counterexamples;
    j["notes"] = v.notes;
    j["ok"] = v.ok();
    return j.dump() + "\n";
  }
  std::ostringstream out;
  out << v.check << ": " << v.cases << " cases, " << v.counterexamples << " counterexamples";
  if (v.refused) out << " (refused)";
  out << '\n';
  for (const auto& n : v.notes) out << "  " << n << '\n';
  out << (v.ok() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

}  // namespace cobalt::harness
