#include "cobalt/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cobalt::harness {

namespace {

struct Names {
  static constexpr std::pair<ProtocolKind, std::string_view> protocols[] = {
      {ProtocolKind::Rbc, "rbc"},   {ProtocolKind::Abba, "abba"},       {ProtocolKind::Mvba, "mvba"},
      {ProtocolKind::Dabc, "dabc"}, {ProtocolKind::TxOrder, "txorder"}, {ProtocolKind::Crs, "crs"},
  };
  static constexpr std::pair<Behaviour, std::string_view> behaviours[] = {
      {Behaviour::Silent, "silent"},
      {Behaviour::Equivocate, "equivocate"},
      {Behaviour::TwoFaced, "two-faced"},
      {Behaviour::Noise, "noise"},
  };
  static constexpr std::pair<Strategy, std::string_view> strategies[] = {
      {Strategy::Random, "random"},       {Strategy::Fifo, "fifo"}, {Strategy::TargetDelay, "target-delay"},
      {Strategy::Partition, "partition"}, {Strategy::Rush, "byz-first"},
  };
};

template <typename E, std::size_t N>
std::string_view name_of(const std::pair<E, std::string_view> (&table)[N], E e) {
  for (const auto& [k, v] : table) {
    if (k == e) return v;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> parse_of(const std::pair<E, std::string_view> (&table)[N], std::string_view s) {
  for (const auto& [k, v] : table) {
    if (v == s) return k;
  }
  return std::nullopt;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

class Parser {
 public:
  Parser(std::string_view origin) : origin_(origin) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(std::string(origin_) + ":" + std::to_string(line_) + ": " + what);
  }

  template <typename T>
  T number(std::string_view s, const char* what) const {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail(std::string("bad ") + what + " '" + std::string(s) + "'");
    return v;
  }

  bool boolean(std::string_view s) const {
    if (s == "true" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "off" || s == "no") return false;
    fail("bad boolean '" + std::string(s) + "'");
  }

  // Splits "{a b c} k=v k2=v2" into the braced group and the key/value tail.
  std::pair<std::optional<std::vector<std::string>>, std::map<std::string, std::string>> group_and_kv(
      std::string_view v) const {
    std::optional<std::vector<std::string>> group;
    v = trim(v);
    if (!v.empty() && v.front() == '{') {
      const auto close = v.find('}');
      if (close == std::string_view::npos) fail("unterminated '{'");
      group = split_ws(v.substr(1, close - 1));
      v = v.substr(close + 1);
    }
    return {group, kv(v)};
  }

  std::map<std::string, std::string> kv(std::string_view v) const {
    std::map<std::string, std::string> out;
    for (const auto& tok : split_ws(v)) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) fail("expected key=value, got '" + tok + "'");
      if (!out.emplace(tok.substr(0, eq), tok.substr(eq + 1)).second) fail("duplicate key '" + tok.substr(0, eq) + "'");
    }
    return out;
  }

  void only(const std::map<std::string, std::string>& m, std::initializer_list<std::string_view> allowed) const {
    for (const auto& [k, v] : m) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) fail("unknown field '" + k + "'");
    }
  }

  NodeId node(const Scenario& s, std::string_view name) const {
    auto id = s.trust.find(name);
    if (!id) fail("unknown node '" + std::string(name) + "'");
    return *id;
  }

  Scenario parse(std::string_view text);

 private:
  void on_line(Scenario& s, std::string_view section, std::string_view line);
  void finish_nodes(Scenario& s);

  std::string_view origin_;
  std::size_t line_ = 0;
  bool nodes_done_ = false;
  std::vector<std::pair<std::size_t, std::string>> deferred_subsets_;
  std::vector<std::pair<std::size_t, std::string>> deferred_faults_;
  std::vector<std::pair<std::size_t, std::string>> deferred_expect_;
};

void Parser::finish_nodes(Scenario& s) {
  if (nodes_done_) return;
  nodes_done_ = true;
  s.faults.assign(s.trust.size(), NodeFault{});
  const std::size_t saved = line_;
  for (const auto& [ln, body] : deferred_subsets_) {
    line_ = ln;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("expected '<owner> = {members} t=.. q=..'");
    const std::string owner(trim(std::string_view(body).substr(0, eq)));
    auto [group, fields] = group_and_kv(std::string_view(body).substr(eq + 1));
    if (!group) fail("subset needs a {member list}");
    only(fields, {"t", "q"});
    if (!fields.count("t") || !fields.count("q")) fail("subset needs t= and q=");
    std::vector<NodeId> members;
    for (const auto& m : *group) members.push_back(node(s, m));
    const auto t = number<std::uint32_t>(fields["t"], "t");
    const auto q = number<std::uint32_t>(fields["q"], "q");
    if (std::set<NodeId>(members.begin(), members.end()).size() != members.size()) fail("duplicate subset member");
    if (owner == "*") {
      for (NodeId id : s.trust.nodes()) s.trust.add_subset(id, EssentialSubset(members, t, q));
    } else {
      s.trust.add_subset(node(s, owner), EssentialSubset(members, t, q));
    }
  }
  for (const auto& [ln, body] : deferred_faults_) {
    line_ = ln;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("expected '<node> = correct|crash [tick]|byzantine [behaviour]'");
    const NodeId id = node(s, trim(std::string_view(body).substr(0, eq)));
    const auto words = split_ws(std::string_view(body).substr(eq + 1));
    if (words.empty() || words.size() > 2) fail("bad fault description");
    NodeFault f;
    if (words[0] == "correct") {
      if (words.size() != 1) fail("correct takes no argument");
    } else if (words[0] == "crash") {
      f.status = FaultStatus::Crashed;
      if (words.size() == 2) f.crash_at = number<Tick>(words[1], "crash tick");
    } else if (words[0] == "byzantine") {
      f.status = FaultStatus::ActivelyByzantine;
      if (words.size() == 2) {
        auto b = parse_behaviour(words[1]);
        if (!b) fail("unknown behaviour '" + words[1] + "'");
        f.behaviour = *b;
      }
    } else {
      fail("unknown fault status '" + words[0] + "'");
    }
    s.faults[id.value] = f;
  }
  for (const auto& [ln, body] : deferred_expect_) {
    line_ = ln;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const auto lhs = split_ws(std::string_view(body).substr(0, eq));
    const std::string rhs(trim(std::string_view(body).substr(eq + 1)));
    if (lhs.size() == 1 && lhs[0] == "valid") {
      s.expect.valid = boolean(rhs);
    } else if (lhs.size() == 3 && lhs[0] == "link") {
      Linkage l;
      if (rhs == "unlinked") {
        l = Linkage::Unlinked;
      } else if (rhs == "linked") {
        l = Linkage::Linked;
      } else if (rhs == "fully") {
        l = Linkage::FullyLinked;
      } else {
        fail("linkage must be unlinked, linked or fully");
      }
      node(s, lhs[1]);
      node(s, lhs[2]);
      s.expect.links.push_back({lhs[1], lhs[2], l});
    } else {
      fail("unknown expectation");
    }
  }
  line_ = saved;
}

void Parser::on_line(Scenario& s, std::string_view section, std::string_view line) {
  if (section == "nodes") {
    if (nodes_done_) fail("[nodes] must come before sections that reference nodes");
    for (const auto& n : split_ws(line)) {
      if (n.find_first_of("{}=#*") != std::string::npos) fail("bad node name '" + n + "'");
      try {
        s.trust.add_node(n);
      } catch (const ConfigError& e) {
        fail(e.what());
      }
    }
    return;
  }
  if (section == "subsets") {
    deferred_subsets_.emplace_back(line_, std::string(line));
    return;
  }
  if (section == "faults") {
    deferred_faults_.emplace_back(line_, std::string(line));
    return;
  }
  if (section == "expect") {
    deferred_expect_.emplace_back(line_, std::string(line));
    return;
  }

  const auto eq = line.find('=');
  if (eq == std::string_view::npos) fail("expected key = value");
  const std::string key(trim(line.substr(0, eq)));
  const std::string_view value = trim(line.substr(eq + 1));
  const auto words = split_ws(value);
  auto single = [&]() -> const std::string& {
    if (words.size() != 1) fail("'" + key + "' takes exactly one value");
    return words[0];
  };

  if (section == "adversary") {
    if (key == "strategy") {
      auto st = parse_strategy(single());
      if (!st) fail("unknown strategy '" + words[0] + "'");
      s.adversary.strategy = *st;
    } else if (key == "targets") {
      s.adversary.targets = words;
    } else if (key == "max_delay") {
      s.adversary.max_delay = number<Tick>(single(), "max_delay");
    } else if (key == "fairness") {
      s.adversary.fairness = number<std::uint64_t>(single(), "fairness");
    } else {
      fail("unknown adversary field '" + key + "'");
    }
  } else if (section == "keys") {
    if (words.empty() || words.size() > 2) fail("expected '<key> = <owner> [bootstrap|allow]'");
    KeySpec k{key, words[0], true};
    if (words.size() == 2) {
      if (words[1] == "allow") {
        k.bootstrap = false;
      } else if (words[1] != "bootstrap") {
        fail("key admission must be bootstrap or allow");
      }
    }
    s.keys.push_back(k);
  } else if (section == "proposals") {
    auto fields = kv(value);
    only(fields, {"at", "slot", "payload"});
    if (!fields.count("payload")) fail("proposal needs payload=");
    ProposalSpec p{key, 0, 0, fields["payload"]};
    if (fields.count("at")) p.at = number<Tick>(fields["at"], "at");
    if (fields.count("slot")) p.slot = number<std::uint64_t>(fields["slot"], "slot");
    s.proposals.push_back(p);
  } else if (section == "time") {
    if (key == "interval") {
      s.time.interval = number<Tick>(single(), "interval");
    } else if (key == "advance") {
      s.time.advance = number<Tick>(single(), "advance");
    } else {
      fail("unknown time field '" + key + "'");
    }
  } else if (section == "protocol") {
    auto& p = s.protocol;
    if (key == "kind") {
      auto k = parse_protocol(single());
      if (!k) fail("unknown protocol '" + words[0] + "'");
      p.kind = *k;
    } else if (key == "pipelining") {
      p.pipelining = boolean(single());
    } else if (key == "broadcaster") {
      p.broadcaster = single();
    } else if (key == "content") {
      p.content = single();
    } else if (key == "inputs") {
      p.inputs.clear();
      for (const auto& w : words) {
        if (w == "0" || w == "1") {
          p.inputs.push_back(w == "1");
        } else if (w == "?") {
          p.inputs.push_back(-1);
        } else {
          fail("inputs are 0, 1 or ?");
        }
      }
    } else if (key == "valid_inputs") {
      p.valid_inputs = number<std::uint32_t>(single(), "valid_inputs");
    } else if (key == "input_spread") {
      p.input_spread = number<Tick>(single(), "input_spread");
    } else if (key == "oppose") {
      p.oppose = words;
    } else if (key == "waits") {
      p.waits.clear();
      for (const auto& w : words) p.waits.push_back(number<Tick>(w, "wait tick"));
    } else if (key == "max_pending") {
      p.max_pending = number<std::size_t>(single(), "max_pending");
    } else if (key == "block_every") {
      p.block_every = number<Tick>(single(), "block_every");
    } else if (key == "view_timeout") {
      p.view_timeout = number<Tick>(single(), "view_timeout");
    } else if (key == "escalate_timeout") {
      p.escalate_timeout = number<Tick>(single(), "escalate_timeout");
    } else if (key == "crash_window") {
      if (words.size() != 2) fail("crash_window takes two ticks");
      p.crash_window_lo = number<Tick>(words[0], "crash_window");
      p.crash_window_hi = number<Tick>(words[1], "crash_window");
    } else if (key == "compromised") {
      p.compromised = words;
    } else {
      fail("unknown protocol field '" + key + "'");
    }
  } else if (section == "views") {
    auto [group, fields] = group_and_kv(value);
    if (!group || group->empty()) fail("view needs a {member list}");
    only(fields, {"t", "crash", "byzantine"});
    ViewConfig v;
    v.members = *group;
    if (fields.count("t")) v.t = number<std::uint32_t>(fields["t"], "t");
    if (fields.count("crash")) {
      if (fields["crash"] == "random") {
        v.crash_random = true;
      } else {
        v.crash_at = number<Tick>(fields["crash"], "crash tick");
      }
    }
    if (fields.count("byzantine")) {
      auto b = parse_behaviour(fields["byzantine"]);
      if (!b) fail("unknown behaviour '" + fields["byzantine"] + "'");
      v.byzantine = *b;
    }
    const std::string expected = "v" + std::to_string(s.views.size() + 1);
    if (key != expected) fail("views must be declared in order; expected '" + expected + "'");
    s.views.push_back(std::move(v));
  } else if (section == "run") {
    if (key == "seed") {
      s.run.seed = number<std::uint64_t>(single(), "seed");
    } else if (key == "ticks") {
      s.run.ticks = number<Tick>(single(), "ticks");
    } else if (key == "steps") {
      s.run.steps = number<std::uint64_t>(single(), "steps");
    } else if (key == "events") {
      s.run.events = boolean(single());
    } else if (key == "name") {
      s.name = single();
    } else {
      fail("unknown run field '" + key + "'");
    }
  } else if (section == "quorum_model") {
    auto fields = kv(value);
    only(fields, {"n_i", "q_i", "n_j", "q_j", "overlap"});
    for (const char* f : {"n_i", "q_i", "n_j", "q_j", "overlap"}) {
      if (!fields.count(f)) fail(std::string("quorum model needs ") + f + "=");
    }
    s.quorum_models.push_back(QuorumModelSpec{
        key, number<std::uint64_t>(fields["n_i"], "n_i"), number<std::uint64_t>(fields["q_i"], "q_i"),
        number<std::uint64_t>(fields["n_j"], "n_j"), number<std::uint64_t>(fields["q_j"], "q_j"),
        number<std::uint64_t>(fields["overlap"], "overlap")});
  } else {
    fail("unknown section [" + std::string(section) + "]");
  }
}

Scenario Parser::parse(std::string_view text) {
  Scenario s;
  s.name = std::string(origin_);
  std::string section;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!seen.insert(section).second) fail("section [" + section + "] repeated");
      static const std::set<std::string> known = {"nodes",     "subsets", "faults", "adversary",
                                                  "keys",      "proposals", "time", "protocol",
                                                  "views",     "run",     "quorum_model", "expect"};
      if (!known.count(section)) fail("unknown section [" + section + "]");
      if (section != "nodes" && section != "subsets" && section != "faults" && section != "expect") {
        finish_nodes(s);
      }
      continue;
    }
    if (section.empty()) fail("content before the first section");
    on_line(s, section, line);
  }
  finish_nodes(s);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin_) + ": " + e.what());
  }
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& w : v) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

std::string_view protocol_name(ProtocolKind k) { return name_of(Names::protocols, k); }
std::optional<ProtocolKind> parse_protocol(std::string_view s) { return parse_of(Names::protocols, s); }
std::string_view behaviour_name(Behaviour b) { return name_of(Names::behaviours, b); }
std::optional<Behaviour> parse_behaviour(std::string_view s) { return parse_of(Names::behaviours, s); }
std::string_view strategy_name(Strategy s) { return name_of(Names::strategies, s); }
std::optional<Strategy> parse_strategy(std::string_view s) { return parse_of(Names::strategies, s); }

FaultAssignment Scenario::fault_assignment() const {
  FaultAssignment fa(trust.size());
  for (std::size_t i = 0; i < faults.size() && i < trust.size(); ++i) {
    fa.set(NodeId{static_cast<std::uint32_t>(i)}, faults[i].status);
  }
  return fa;
}

void Scenario::validate() const {
  if (trust.size() == 0) throw ConfigError("no nodes declared");
  for (NodeId id : trust.nodes()) {
    if (trust.subsets(id)->empty()) throw ConfigError("node '" + trust.name(id) + "' has no essential subsets");
  }
  if (faults.size() != trust.size()) throw ConfigError("fault table does not cover every node");
  if (adversary.max_delay < 1) throw ConfigError("max_delay must be at least 1");
  if (adversary.fairness < 1) throw ConfigError("fairness must be at least 1");
  if (time.interval <= 0) throw ConfigError("time interval must be positive");
  if (time.advance < 0) throw ConfigError("time advance must be nonnegative");
  if (run.ticks < 0) throw ConfigError("tick budget must be nonnegative");

  std::set<std::string> externals;
  for (const auto& v : views) {
    for (const auto& m : v.members) {
      if (trust.find(m)) throw ConfigError("view member '" + m + "' clashes with a node name");
      if (!externals.insert(m).second) throw ConfigError("view member '" + m + "' appears in two views");
    }
    if (v.members.size() <= 3 * std::size_t{v.t}) {
      throw ConfigError("view needs more than 3t members");
    }
  }
  for (const auto& p : proposals) {
    if (trust.find(p.proposer)) throw ConfigError("proposer '" + p.proposer + "' must be an external entity");
    if (externals.count(p.proposer)) throw ConfigError("proposer '" + p.proposer + "' is also a view member");
    if (p.at < 0) throw ConfigError("proposal time must be nonnegative");
  }
  std::set<std::string> key_ids;
  for (const auto& k : keys) {
    if (!trust.find(k.owner)) throw ConfigError("key '" + k.id + "' has unknown owner '" + k.owner + "'");
    if (!key_ids.insert(k.id).second) throw ConfigError("key '" + k.id + "' declared twice");
  }
  if (!keys.empty() && std::none_of(keys.begin(), keys.end(), [](const KeySpec& k) { return k.bootstrap; })) {
    throw ConfigError("at least one key must be bootstrap");
  }
  for (const auto& t : adversary.targets) {
    if (!trust.find(t) && !externals.count(t)) throw ConfigError("unknown adversary target '" + t + "'");
  }
  const auto& p = protocol;
  switch (p.kind) {
    case ProtocolKind::Rbc:
      if (!trust.find(p.broadcaster)) throw ConfigError("rbc needs a broadcaster node");
      break;
    case ProtocolKind::Abba:
      if (!p.inputs.empty() && p.inputs.size() != trust.size()) {
        throw ConfigError("abba inputs must list one value per node");
      }
      break;
    case ProtocolKind::Mvba:
      if (p.valid_inputs == 0) throw ConfigError("mvba needs at least one valid input");
      break;
    case ProtocolKind::Dabc:
      if (proposals.empty()) throw ConfigError("dabc needs proposals");
      break;
    case ProtocolKind::TxOrder:
      if (views.empty()) throw ConfigError("txorder needs views");
      if (p.block_every <= 0 || p.view_timeout <= 0 || p.escalate_timeout <= 0) {
        throw ConfigError("txorder timers must be positive");
      }
      if (p.crash_window_lo < 1 || p.crash_window_hi < p.crash_window_lo) {
        throw ConfigError("bad crash window");
      }
      break;
    case ProtocolKind::Crs:
      for (const auto& c : p.compromised) {
        if (!trust.find(c)) throw ConfigError("unknown compromised node '" + c + "'");
      }
      break;
  }
}

Scenario parse_scenario(std::string_view text, std::string_view origin) { return Parser(origin).parse(text); }

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str(), path);
  return s;
}

std::string format_scenario(const Scenario& s) {
  std::ostringstream o;
  const auto nodes = s.trust.nodes();
  o << "[nodes]\n";
  for (NodeId id : nodes) o << s.trust.name(id) << (id.value + 1 == nodes.size() ? "\n" : " ");
  o << "\n[subsets]\n";
  for (NodeId id : nodes) {
    for (const auto& sub : *s.trust.subsets(id)) {
      o << s.trust.name(id) << " = {";
      for (std::size_t i = 0; i < sub.members.size(); ++i) o << (i ? " " : "") << s.trust.name(sub.members[i]);
      o << "} t=" << sub.t << " q=" << sub.q << "\n";
    }
  }
  bool any_fault = false;
  for (std::size_t i = 0; i < s.faults.size(); ++i) {
    const auto& f = s.faults[i];
    if (f.status == FaultStatus::Correct) continue;
    if (!any_fault) o << "\n[faults]\n";
    any_fault = true;
    o << s.trust.name(NodeId{static_cast<std::uint32_t>(i)}) << " = ";
    if (f.status == FaultStatus::Crashed) {
      o << "crash " << f.crash_at << "\n";
    } else {
      o << "byzantine " << behaviour_name(f.behaviour) << "\n";
    }
  }
  o << "\n[adversary]\nstrategy = " << strategy_name(s.adversary.strategy) << "\n";
  if (!s.adversary.targets.empty()) o << "targets = " << join(s.adversary.targets) << "\n";
  o << "max_delay = " << s.adversary.max_delay << "\nfairness = " << s.adversary.fairness << "\n";
  if (!s.keys.empty()) {
    o << "\n[keys]\n";
    for (const auto& k : s.keys) o << k.id << " = " << k.owner << (k.bootstrap ? " bootstrap" : " allow") << "\n";
  }
  if (!s.proposals.empty()) {
    o << "\n[proposals]\n";
    for (const auto& p : s.proposals) {
      o << p.proposer << " = at=" << p.at << " slot=" << p.slot << " payload=" << p.payload << "\n";
    }
  }
  o << "\n[time]\ninterval = " << s.time.interval << "\nadvance = " << s.time.advance << "\n";
  const auto& p = s.protocol;
  o << "\n[protocol]\nkind = " << protocol_name(p.kind) << "\n";
  o << "pipelining = " << (p.pipelining ? "on" : "off") << "\n";
  switch (p.kind) {
    case ProtocolKind::Rbc:
      o << "broadcaster = " << p.broadcaster << "\ncontent = " << p.content << "\n";
      break;
    case ProtocolKind::Abba:
      if (!p.inputs.empty()) {
        o << "inputs =";
        for (int b : p.inputs) o << " " << (b < 0 ? "?" : std::to_string(b));
        o << "\n";
      }
      break;
    case ProtocolKind::Mvba:
      o << "valid_inputs = " << p.valid_inputs << "\ninput_spread = " << p.input_spread << "\n";
      break;
    case ProtocolKind::Dabc:
      if (!p.oppose.empty()) o << "oppose = " << join(p.oppose) << "\n";
      if (!p.waits.empty()) {
        o << "waits =";
        for (Tick w : p.waits) o << " " << w;
        o << "\n";
      }
      o << "max_pending = " << p.max_pending << "\n";
      break;
    case ProtocolKind::TxOrder:
      o << "block_every = " << p.block_every << "\nview_timeout = " << p.view_timeout
        << "\nescalate_timeout = " << p.escalate_timeout << "\ncrash_window = " << p.crash_window_lo << " "
        << p.crash_window_hi << "\n";
      break;
    case ProtocolKind::Crs:
      if (!p.compromised.empty()) o << "compromised = " << join(p.compromised) << "\n";
      break;
  }
  if (!s.views.empty()) {
    o << "\n[views]\n";
    for (std::size_t i = 0; i < s.views.size(); ++i) {
      const auto& v = s.views[i];
      o << "v" << i + 1 << " = {" << join(v.members) << "} t=" << v.t;
      if (v.crash_random) {
        o << " crash=random";
      } else if (v.crash_at) {
        o << " crash=" << *v.crash_at;
      }
      if (v.byzantine) o << " byzantine=" << behaviour_name(*v.byzantine);
      o << "\n";
    }
  }
  o << "\n[run]\nseed = " << s.run.seed << "\nticks = " << s.run.ticks << "\nsteps = " << s.run.steps
    << "\nevents = " << (s.run.events ? "on" : "off") << "\n";
  if (!s.quorum_models.empty()) {
    o << "\n[quorum_model]\n";
    for (const auto& q : s.quorum_models) {
      o << q.name << " = n_i=" << q.n_i << " q_i=" << q.q_i << " n_j=" << q.n_j << " q_j=" << q.q_j
        << " overlap=" << q.overlap << "\n";
    }
  }
  if (s.expect.valid || !s.expect.links.empty()) {
    o << "\n[expect]\n";
    if (s.expect.valid) o << "valid = " << (*s.expect.valid ? "true" : "false") << "\n";
    for (const auto& l : s.expect.links) {
      o << "link " << l.a << " " << l.b << " = "
        << (l.expected == Linkage::Unlinked ? "unlinked" : l.expected == Linkage::Linked ? "linked" : "fully")
        << "\n";
    }
  }
  return o.str();
}

Scenario complete_network(std::size_t n, std::uint32_t t, std::uint32_t q, ProtocolKind kind) {
  Scenario s;
  s.name = "complete-" + std::to_string(n);
  std::vector<NodeId> all;
  for (std::size_t i = 0; i < n; ++i) all.push_back(s.trust.add_node("n" + std::to_string(i)));
  for (NodeId id : all) s.trust.add_subset(id, EssentialSubset(all, t, q));
  s.faults.assign(n, NodeFault{});
  s.protocol.kind = kind;
  if (kind == ProtocolKind::Rbc) s.protocol.broadcaster = "n0";
  return s;
}

}  // namespace cobalt::harness
