#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cobalt/types.hpp"

namespace cobalt {

struct EssentialSubset {
  std::vector<NodeId> members;  // sorted, unique
  std::uint32_t t = 0;
  std::uint32_t q = 0;

  EssentialSubset() = default;
  EssentialSubset(std::vector<NodeId> m, std::uint32_t t_, std::uint32_t q_);

  std::size_t n() const { return members.size(); }
  bool contains(NodeId id) const;
  const NodeSet& member_set() const { return set_; }

  friend bool operator==(const EssentialSubset& a, const EssentialSubset& b) {
    return a.t == b.t && a.q == b.q && a.members == b.members;
  }

 private:
  NodeSet set_;
};

// Shared, immutable list of subsets handed to protocol instances.
using SubsetList = std::shared_ptr<const std::vector<EssentialSubset>>;

enum class Inequality { ParameterRange, Consistency, Progress };

std::string_view inequality_name(Inequality ineq);

// Empty result means the triple is valid.
std::vector<Inequality> validate_subset(std::size_t n, std::uint32_t t, std::uint32_t q);

class TrustConfig {
 public:
  NodeId add_node(std::string name);
  void add_subset(NodeId owner, EssentialSubset subset);

  std::size_t size() const { return names_.size(); }
  const std::string& name(NodeId id) const;
  std::optional<NodeId> find(std::string_view name) const;
  std::vector<NodeId> nodes() const;

  const SubsetList& subsets(NodeId id) const;
  const NodeSet& unl(NodeId id) const;

  // Nodes j whose UNL contains `sender`.
  const NodeSet& listeners(NodeId sender) const;

  // Throws ConfigError naming every subset that breaks a parameter law.
  void validate() const;

 private:
  void check(NodeId id) const;
  void rebuild_listeners() const;

  std::vector<std::string> names_;
  std::map<std::string, NodeId, std::less<>> by_name_;
  std::vector<SubsetList> es_;
  std::vector<NodeSet> unl_;
  mutable std::vector<NodeSet> listeners_;
  mutable bool listeners_dirty_ = true;
};

enum class FaultStatus { Correct, Crashed, ActivelyByzantine };

std::string_view fault_name(FaultStatus s);

class FaultAssignment {
 public:
  FaultAssignment() = default;
  explicit FaultAssignment(std::size_t n) : status_(n, FaultStatus::Correct) {}

  void set(NodeId id, FaultStatus s);
  FaultStatus status(NodeId id) const;
  bool honest(NodeId id) const { return status(id) != FaultStatus::ActivelyByzantine; }
  bool correct(NodeId id) const { return status(id) == FaultStatus::Correct; }
  std::size_t size() const { return status_.size(); }

 private:
  std::vector<FaultStatus> status_;
};

struct NodeClassification {
  std::vector<NodeSet> extended_unl;
  NodeSet healthy;
  NodeSet unblocked;
};

NodeClassification classify(const TrustConfig& config, const FaultAssignment& faults);

enum class Linkage { Unlinked, Linked, FullyLinked };

std::string_view linkage_name(Linkage l);

Linkage linkage(const TrustConfig& config, const FaultAssignment& faults, NodeId i, NodeId j);

struct Connectivity {
  bool weakly = false;
  bool strongly = false;
};

Connectivity connectivity(const TrustConfig& config, const FaultAssignment& faults, NodeId i);
Connectivity connectivity(const TrustConfig& config, const FaultAssignment& faults,
                          const NodeClassification& cls, NodeId i);

enum class Support { None, Weak, Strong };

std::string_view support_name(Support s);

// Support given the set of senders that sent the target content.
Support support_of(std::span<const EssentialSubset> es, const NodeSet& senders);
bool has_weak(std::span<const EssentialSubset> es, const NodeSet& senders);
bool has_strong(std::span<const EssentialSubset> es, const NodeSet& senders);

// True when every subset has at least q_S members satisfying `pred`.
template <class Pred>
bool quorum_everywhere(std::span<const EssentialSubset> es, Pred&& pred) {
  for (const auto& s : es) {
    std::uint32_t c = 0;
    for (NodeId m : s.members) {
      if (pred(m) && ++c >= s.q) break;
    }
    if (c < s.q) return false;
  }
  return true;
}

Support support(std::span<const EssentialSubset> es, const std::map<NodeId, std::string>& received,
                std::string_view target);

bool quorum_model_linked(std::uint64_t n_i, std::uint64_t q_i, std::uint64_t n_j,
                         std::uint64_t q_j, std::uint64_t overlap);

}  // namespace cobalt
