#include "cobalt/topology.hpp"

#include <algorithm>
#include <sstream>

namespace cobalt {

EssentialSubset::EssentialSubset(std::vector<NodeId> m, std::uint32_t t_, std::uint32_t q_)
    : members(std::move(m)), t(t_), q(q_) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  for (NodeId id : members) set_.insert(id);
}

bool EssentialSubset::contains(NodeId id) const { return set_.contains(id); }

std::string_view inequality_name(Inequality ineq) {
  switch (ineq) {
    case Inequality::ParameterRange: return "range: 0<=t<=n and 0<=q<=n";
    case Inequality::Consistency: return "consistency: t < 2q-n";
    case Inequality::Progress: return "progress: 2t < q";
  }
  return "?";
}

std::vector<Inequality> validate_subset(std::size_t n, std::uint32_t t, std::uint32_t q) {
  std::vector<Inequality> out;
  const auto sn = static_cast<std::int64_t>(n);
  const auto st = static_cast<std::int64_t>(t);
  const auto sq = static_cast<std::int64_t>(q);
  if (st > sn || sq > sn) out.push_back(Inequality::ParameterRange);
  if (!(st < 2 * sq - sn)) out.push_back(Inequality::Consistency);
  if (!(2 * st < sq)) out.push_back(Inequality::Progress);
  return out;
}

NodeId TrustConfig::add_node(std::string name) {
  if (by_name_.count(name) != 0) throw ConfigError("duplicate node id: " + name);
  const NodeId id{static_cast<std::uint32_t>(names_.size())};
  by_name_.emplace(name, id);
  names_.push_back(std::move(name));
  es_.push_back(std::make_shared<const std::vector<EssentialSubset>>());
  unl_.emplace_back();
  listeners_dirty_ = true;
  return id;
}

void TrustConfig::check(NodeId id) const {
  if (id.value >= names_.size()) {
    throw ConfigError("unknown node id #" + std::to_string(id.value));
  }
}

void TrustConfig::add_subset(NodeId owner, EssentialSubset subset) {
  check(owner);
  for (NodeId m : subset.members) check(m);
  auto next = std::make_shared<std::vector<EssentialSubset>>(*es_[owner.value]);
  for (NodeId m : subset.members) unl_[owner.value].insert(m);
  next->push_back(std::move(subset));
  es_[owner.value] = std::move(next);
  listeners_dirty_ = true;
}

const std::string& TrustConfig::name(NodeId id) const {
  check(id);
  return names_[id.value];
}

std::optional<NodeId> TrustConfig::find(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> TrustConfig::nodes() const {
  std::vector<NodeId> out;
  out.reserve(names_.size());
  for (std::uint32_t i = 0; i < names_.size(); ++i) out.push_back(NodeId{i});
  return out;
}

const SubsetList& TrustConfig::subsets(NodeId id) const {
  check(id);
  return es_[id.value];
}

const NodeSet& TrustConfig::unl(NodeId id) const {
  check(id);
  return unl_[id.value];
}

void TrustConfig::rebuild_listeners() const {
  listeners_.assign(names_.size(), NodeSet{});
  for (std::uint32_t j = 0; j < names_.size(); ++j) {
    unl_[j].for_each([&](NodeId s) { listeners_[s.value].insert(NodeId{j}); });
  }
  listeners_dirty_ = false;
}

const NodeSet& TrustConfig::listeners(NodeId sender) const {
  check(sender);
  if (listeners_dirty_) rebuild_listeners();
  return listeners_[sender.value];
}

void TrustConfig::validate() const {
  std::ostringstream err;
  bool bad = false;
  for (std::uint32_t i = 0; i < names_.size(); ++i) {
    const auto& list = *es_[i];
    if (list.empty()) {
      err << names_[i] << ": no essential subsets\n";
      bad = true;
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto& s = list[k];
      for (Inequality v : validate_subset(s.n(), s.t, s.q)) {
        err << names_[i] << " subset " << k << " (n=" << s.n() << ",t=" << s.t << ",q=" << s.q
            << "): violates " << inequality_name(v) << "\n";
        bad = true;
      }
    }
  }
  if (bad) throw ConfigError(err.str());
}

std::string_view fault_name(FaultStatus s) {
  switch (s) {
    case FaultStatus::Correct: return "correct";
    case FaultStatus::Crashed: return "crashed";
    case FaultStatus::ActivelyByzantine: return "byzantine";
  }
  return "?";
}

void FaultAssignment::set(NodeId id, FaultStatus s) {
  if (id.value >= status_.size()) status_.resize(id.value + 1, FaultStatus::Correct);
  status_[id.value] = s;
}

FaultStatus FaultAssignment::status(NodeId id) const {
  return id.value < status_.size() ? status_[id.value] : FaultStatus::Correct;
}

namespace {

// Grows `bad` until no node has more than min(t, n-q) bad members in one of its subsets.
NodeSet fault_closure(const TrustConfig& config, NodeSet bad) {
  const std::size_t n = config.size();
  for (std::size_t iter = 0; iter <= n; ++iter) {
    bool grew = false;
    for (std::uint32_t i = 0; i < n; ++i) {
      const NodeId id{i};
      if (bad.contains(id)) continue;
      for (const auto& s : *config.subsets(id)) {
        const std::size_t tolerated = std::min<std::size_t>(s.t, s.n() - std::min<std::size_t>(s.q, s.n()));
        if (s.member_set().intersection_size(bad) > tolerated) {
          bad.insert(id);
          grew = true;
          break;
        }
      }
    }
    if (!grew) break;
  }
  return bad;
}

}  // namespace

NodeClassification classify(const TrustConfig& config, const FaultAssignment& faults) {
  config.validate();
  const std::size_t n = config.size();
  NodeClassification out;

  out.extended_unl.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    NodeSet closure = config.unl(NodeId{i});
    NodeSet expanded;
    bool grew = true;
    while (grew) {
      grew = false;
      for (NodeId j : closure.to_vector()) {
        if (!faults.honest(j) || !expanded.insert(j)) continue;
        const std::size_t before = closure.size();
        closure.unite(config.unl(j));
        grew = grew || closure.size() != before;
      }
    }
    out.extended_unl[i] = std::move(closure);
  }

  NodeSet byz;
  NodeSet not_correct;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!faults.honest(NodeId{i})) byz.insert(NodeId{i});
    if (!faults.correct(NodeId{i})) not_correct.insert(NodeId{i});
  }
  const NodeSet unhealthy = fault_closure(config, byz);
  NodeSet seed = unhealthy;
  seed.unite(not_correct);
  const NodeSet blocked = fault_closure(config, seed);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!unhealthy.contains(NodeId{i})) out.healthy.insert(NodeId{i});
    if (!blocked.contains(NodeId{i})) out.unblocked.insert(NodeId{i});
  }
  return out;
}

std::string_view linkage_name(Linkage l) {
  switch (l) {
    case Linkage::Unlinked: return "unlinked";
    case Linkage::Linked: return "linked";
    case Linkage::FullyLinked: return "fully-linked";
  }
  return "?";
}

Linkage linkage(const TrustConfig& config, const FaultAssignment& faults, NodeId i, NodeId j) {
  const auto& a = *config.subsets(i);
  const auto& b = *config.subsets(j);
  Linkage best = Linkage::Unlinked;
  for (const auto& s : a) {
    if (std::find(b.begin(), b.end(), s) == b.end()) continue;
    std::size_t byz = 0;
    std::size_t correct = 0;
    for (NodeId m : s.members) {
      if (!faults.honest(m)) ++byz;
      if (faults.correct(m)) ++correct;
    }
    if (byz > s.t) continue;
    best = std::max(best, Linkage::Linked);
    if (correct >= s.q && s.t + s.q <= s.n()) return Linkage::FullyLinked;
  }
  return best;
}

Connectivity connectivity(const TrustConfig& config, const FaultAssignment& faults, NodeId i) {
  return connectivity(config, faults, classify(config, faults), i);
}

Connectivity connectivity(const TrustConfig& config, const FaultAssignment& faults,
                          const NodeClassification& cls, NodeId i) {
  config.unl(i);
  std::vector<NodeId> healthy;
  cls.extended_unl[i.value].for_each([&](NodeId j) {
    if (cls.healthy.contains(j)) healthy.push_back(j);
  });
  Connectivity c{true, true};
  for (NodeId j : healthy) {
    if (j != i && linkage(config, faults, i, j) != Linkage::FullyLinked) c.weakly = false;
  }
  for (std::size_t a = 0; a < healthy.size() && c.strongly; ++a) {
    for (std::size_t b = a + 1; b < healthy.size(); ++b) {
      if (linkage(config, faults, healthy[a], healthy[b]) != Linkage::FullyLinked) {
        c.strongly = false;
        break;
      }
    }
  }
  return c;
}

std::string_view support_name(Support s) {
  switch (s) {
    case Support::None: return "none";
    case Support::Weak: return "weak";
    case Support::Strong: return "strong";
  }
  return "?";
}

bool has_weak(std::span<const EssentialSubset> es, const NodeSet& senders) {
  for (const auto& s : es) {
    if (s.member_set().intersection_size(senders) >= std::size_t{s.t} + 1) return true;
  }
  return false;
}

bool has_strong(std::span<const EssentialSubset> es, const NodeSet& senders) {
  if (es.empty()) return false;
  for (const auto& s : es) {
    if (s.member_set().intersection_size(senders) < s.q) return false;
  }
  return true;
}

Support support_of(std::span<const EssentialSubset> es, const NodeSet& senders) {
  if (es.empty()) throw ConfigError("support evaluated against an empty subset list");
  if (has_strong(es, senders)) return Support::Strong;
  if (has_weak(es, senders)) return Support::Weak;
  return Support::None;
}

Support support(std::span<const EssentialSubset> es, const std::map<NodeId, std::string>& received,
                std::string_view target) {
  NodeSet senders;
  for (const auto& [id, content] : received) {
    if (content == target) senders.insert(id);
  }
  return support_of(es, senders);
}

bool quorum_model_linked(std::uint64_t n_i, std::uint64_t q_i, std::uint64_t n_j,
                         std::uint64_t q_j, std::uint64_t overlap) {
  if (q_i > n_i || q_j > n_j) throw std::invalid_argument("quorum exceeds UNL size");
  if (overlap > std::min(n_i, n_j)) throw std::invalid_argument("overlap exceeds UNL size");
  const std::uint64_t need = std::max(3 * (n_i - q_i) + 1, 3 * (n_j - q_j) + 1);
  return overlap >= need;
}

}  // namespace cobalt
