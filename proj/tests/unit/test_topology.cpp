#include <gtest/gtest.h>

#include "cobalt/harness/config.hpp"
#include "cobalt/topology.hpp"

using namespace cobalt;
using cobalt::harness::parse_scenario;

namespace {

std::vector<NodeId> ids(std::initializer_list<std::uint32_t> v) {
  std::vector<NodeId> out;
  for (auto x : v) out.push_back(NodeId{x});
  return out;
}

TrustConfig complete(std::size_t n, std::uint32_t t, std::uint32_t q) {
  TrustConfig c;
  std::vector<NodeId> all;
  for (std::size_t i = 0; i < n; ++i) all.push_back(c.add_node("n" + std::to_string(i)));
  for (NodeId id : all) c.add_subset(id, EssentialSubset(all, t, q));
  return c;
}

FaultAssignment faults(std::size_t n, std::initializer_list<std::pair<std::uint32_t, FaultStatus>> set) {
  FaultAssignment f(n);
  for (auto [i, s] : set) f.set(NodeId{i}, s);
  return f;
}

}  // namespace

TEST(ValidateSubset, AcceptsThreeTPlusOneFamily) {
  EXPECT_TRUE(validate_subset(4, 1, 3).empty());
  EXPECT_TRUE(validate_subset(7, 2, 5).empty());
  for (std::uint32_t t = 0; t < 5; ++t) EXPECT_TRUE(validate_subset(3 * t + 1, t, 2 * t + 1).empty());
}

TEST(ValidateSubset, NamesBrokenInequality) {
  // 1 < 2*2-3 and 2*1 < 2 both fail.
  EXPECT_EQ(validate_subset(3, 1, 2), (std::vector<Inequality>{Inequality::Consistency, Inequality::Progress}));
  EXPECT_EQ(validate_subset(4, 2, 4), std::vector<Inequality>{Inequality::Progress});
  EXPECT_EQ(validate_subset(4, 5, 3), (std::vector<Inequality>{Inequality::ParameterRange, Inequality::Consistency,
                                                              Inequality::Progress}));
}

TEST(ValidateSubset, ValidTriplesHaveQuorumSlack) {
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::uint32_t t = 0; t <= n; ++t) {
      for (std::uint32_t q = 0; q <= n; ++q) {
        if (!validate_subset(n, t, q).empty()) continue;
        EXPECT_GT(static_cast<long>(q) - t, static_cast<long>(n) - q) << n << " " << t << " " << q;
      }
    }
  }
}

TEST(TrustConfig, RejectsUnknownAndDuplicate) {
  TrustConfig c;
  c.add_node("a");
  EXPECT_THROW(c.add_node("a"), ConfigError);
  EXPECT_THROW(c.subsets(NodeId{3}), ConfigError);
}

TEST(TrustConfig, ValidateNamesViolations) {
  TrustConfig c = complete(3, 1, 2);
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("n0"), std::string::npos);
  }
}

TEST(TrustConfig, ListenersInvertUnl) {
  TrustConfig c;
  const NodeId a = c.add_node("a");
  const NodeId b = c.add_node("b");
  const NodeId d = c.add_node("d");
  c.add_subset(a, EssentialSubset({a, b}, 0, 2));
  c.add_subset(b, EssentialSubset({b, d}, 0, 2));
  EXPECT_TRUE(c.listeners(b).contains(a));
  EXPECT_TRUE(c.listeners(b).contains(b));
  EXPECT_FALSE(c.listeners(a).contains(b));
  EXPECT_TRUE(c.listeners(d).contains(b));
}

TEST(Classify, AllCorrectIsAllHealthy) {
  const auto c = complete(5, 1, 4);
  const auto cls = classify(c, FaultAssignment(5));
  EXPECT_EQ(cls.healthy.size(), 5U);
  EXPECT_EQ(cls.unblocked.size(), 5U);
}

TEST(Classify, OneByzantineTolerated) {
  const auto c = complete(4, 1, 3);
  const auto cls = classify(c, faults(4, {{3, FaultStatus::ActivelyByzantine}}));
  EXPECT_EQ(cls.healthy.to_vector(), ids({0, 1, 2}));
  EXPECT_EQ(cls.unblocked.to_vector(), ids({0, 1, 2}));
}

TEST(Classify, TwoCrashedBlocksTheRest) {
  const auto c = complete(4, 1, 3);
  const auto cls = classify(c, faults(4, {{2, FaultStatus::Crashed}, {3, FaultStatus::Crashed}}));
  // Crashes never make anyone unhealthy, only blocked.
  EXPECT_EQ(cls.healthy.to_vector(), ids({0, 1, 2, 3}));
  EXPECT_TRUE(cls.unblocked.empty());
}

TEST(Classify, ByzantineNeverGrowsSets) {
  const auto c = complete(7, 2, 5);
  FaultAssignment f(7);
  auto prev = classify(c, f);
  for (std::uint32_t i = 0; i < 7; ++i) {
    f.set(NodeId{i}, FaultStatus::ActivelyByzantine);
    const auto cur = classify(c, f);
    cur.healthy.for_each([&](NodeId id) { EXPECT_TRUE(prev.healthy.contains(id)); });
    cur.unblocked.for_each([&](NodeId id) { EXPECT_TRUE(prev.unblocked.contains(id)); });
    prev = cur;
  }
}

TEST(Linkage, SharedSubsetCases) {
  const auto c = complete(4, 1, 3);
  EXPECT_EQ(linkage(c, FaultAssignment(4), NodeId{0}, NodeId{1}), Linkage::FullyLinked);
  EXPECT_EQ(linkage(c, faults(4, {{3, FaultStatus::ActivelyByzantine}}), NodeId{0}, NodeId{1}), Linkage::FullyLinked);
  const auto over = faults(4, {{2, FaultStatus::ActivelyByzantine}, {3, FaultStatus::ActivelyByzantine}});
  EXPECT_EQ(linkage(c, over, NodeId{0}, NodeId{1}), Linkage::Unlinked);
}

TEST(Linkage, CrashesBreakFullLinkOnly) {
  const auto c = complete(4, 1, 3);
  const auto f = faults(4, {{2, FaultStatus::Crashed}, {3, FaultStatus::Crashed}});
  EXPECT_EQ(linkage(c, f, NodeId{0}, NodeId{1}), Linkage::Linked);
}

TEST(Linkage, DisjointEssentialSubsetsAreUnlinked) {
  TrustConfig c;
  std::vector<NodeId> a, b;
  for (int i = 0; i < 4; ++i) a.push_back(c.add_node("a" + std::to_string(i)));
  for (int i = 0; i < 4; ++i) b.push_back(c.add_node("b" + std::to_string(i)));
  for (NodeId x : a) c.add_subset(x, EssentialSubset(a, 1, 3));
  for (NodeId x : b) c.add_subset(x, EssentialSubset(b, 1, 3));
  EXPECT_EQ(linkage(c, FaultAssignment(8), a[0], b[0]), Linkage::Unlinked);
}

TEST(Linkage, CompleteNetworkAllAssignments) {
  const auto c = complete(5, 1, 4);
  for (std::uint32_t code = 0; code < 243; ++code) {
    FaultAssignment f(5);
    std::size_t byz = 0, correct = 0;
    for (std::uint32_t i = 0, x = code; i < 5; ++i, x /= 3) {
      const auto s = static_cast<FaultStatus>(x % 3);
      f.set(NodeId{i}, s);
      byz += s == FaultStatus::ActivelyByzantine;
      correct += s == FaultStatus::Correct;
    }
    const Linkage want = byz > 1 ? Linkage::Unlinked : correct >= 4 ? Linkage::FullyLinked : Linkage::Linked;
    EXPECT_EQ(linkage(c, f, NodeId{0}, NodeId{4}), want) << code;
  }
}

TEST(Connectivity, CompleteNetworkWithinBounds) {
  const auto c = complete(4, 1, 3);
  const auto f = faults(4, {{3, FaultStatus::ActivelyByzantine}});
  const auto con = connectivity(c, f, NodeId{0});
  EXPECT_TRUE(con.weakly);
  EXPECT_TRUE(con.strongly);
}

TEST(Connectivity, FaultsBeyondBoundLeaveNobodyHealthy) {
  const auto c = complete(4, 1, 3);
  const auto f = faults(4, {{2, FaultStatus::ActivelyByzantine}, {3, FaultStatus::ActivelyByzantine}});
  EXPECT_TRUE(classify(c, f).healthy.empty());
  EXPECT_EQ(linkage(c, f, NodeId{0}, NodeId{1}), Linkage::Unlinked);
}

TEST(Connectivity, UnlinkedHealthyPeerBreaksWeak) {
  // The b nodes reach a1..a3 through a0's UNL but share no subset with them.
  const auto s = parse_scenario(R"(
[nodes]
a0 a1 a2 a3 b1 b2 b3
[subsets]
a0 = {a0 a1 a2 a3} t=1 q=3
a1 = {a0 a1 a2 a3} t=1 q=3
a2 = {a0 a1 a2 a3} t=1 q=3
a3 = {a0 a1 a2 a3} t=1 q=3
b1 = {a0 b1 b2 b3} t=1 q=3
b2 = {a0 b1 b2 b3} t=1 q=3
b3 = {a0 b1 b2 b3} t=1 q=3
[faults]
a3 = crash 0
)");
  const auto f = s.fault_assignment();
  const auto con = connectivity(s.trust, f, *s.trust.find("b1"));
  EXPECT_FALSE(con.weakly);
  EXPECT_FALSE(con.strongly);
  EXPECT_TRUE(connectivity(s.trust, f, *s.trust.find("a1")).weakly);
}

TEST(Connectivity, BridgeNodeIsWeakButNotStrong) {
  // Two cliques; the bridge h holds one subset from each, so it is linked to everyone
  // while cross-clique pairs share nothing.
  const auto s = parse_scenario(R"(
[nodes]
a1 a2 a3 h b1 b2 b3
[subsets]
a1 = {a1 a2 a3 h} t=1 q=3
a2 = {a1 a2 a3 h} t=1 q=3
a3 = {a1 a2 a3 h} t=1 q=3
h = {a1 a2 a3 h} t=1 q=3
h = {h b1 b2 b3} t=1 q=3
b1 = {h b1 b2 b3} t=1 q=3
b2 = {h b1 b2 b3} t=1 q=3
b3 = {h b1 b2 b3} t=1 q=3
)");
  const auto f = s.fault_assignment();
  const auto con = connectivity(s.trust, f, *s.trust.find("h"));
  EXPECT_TRUE(con.weakly);
  EXPECT_FALSE(con.strongly);
  EXPECT_EQ(linkage(s.trust, f, *s.trust.find("a1"), *s.trust.find("b1")), Linkage::Unlinked);
}

TEST(Support, WeakStrongNone) {
  const std::vector<EssentialSubset> es{EssentialSubset(ids({0, 1, 2, 3}), 1, 3)};
  EXPECT_EQ(support_of(es, NodeSet{NodeId{0}, NodeId{1}}), Support::Weak);
  EXPECT_EQ(support_of(es, NodeSet{NodeId{0}, NodeId{1}, NodeId{2}}), Support::Strong);
  EXPECT_EQ(support_of(es, NodeSet{NodeId{0}}), Support::None);
}

TEST(Support, ReceivedMapCountsOnlyTarget) {
  const std::vector<EssentialSubset> es{EssentialSubset(ids({0, 1, 2, 3}), 1, 3)};
  std::map<NodeId, std::string> got{{NodeId{0}, "x"}, {NodeId{1}, "x"}, {NodeId{2}, "y"}};
  EXPECT_EQ(support(es, got, "x"), Support::Weak);
  EXPECT_EQ(support(es, got, "y"), Support::None);
}

TEST(Support, StrongRequiresEverySubset) {
  const std::vector<EssentialSubset> es{EssentialSubset(ids({0, 1, 2, 3}), 1, 3),
                                        EssentialSubset(ids({3, 4, 5, 6}), 1, 3)};
  const NodeSet first{NodeId{0}, NodeId{1}, NodeId{2}};
  EXPECT_EQ(support_of(es, first), Support::Weak);
  NodeSet both = first;
  both.unite(NodeSet{NodeId{4}, NodeId{5}, NodeId{6}});
  EXPECT_EQ(support_of(es, both), Support::Strong);
}

TEST(Support, EmptyListIsConfigError) {
  const std::vector<EssentialSubset> none;
  EXPECT_THROW(support_of(none, NodeSet{}), ConfigError);
}

// Expected verdicts come from enumerating subsets of the overlap (see oracle tests).
TEST(QuorumModel, OverlapThreshold) {
  EXPECT_TRUE(quorum_model_linked(10, 8, 10, 8, 7));
  EXPECT_FALSE(quorum_model_linked(10, 8, 10, 8, 6));
  EXPECT_TRUE(quorum_model_linked(10, 10, 10, 10, 1));
  EXPECT_THROW(quorum_model_linked(10, 8, 10, 8, 11), std::invalid_argument);
  EXPECT_THROW(quorum_model_linked(10, 11, 10, 8, 5), std::invalid_argument);
}
