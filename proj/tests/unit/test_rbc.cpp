#include <gtest/gtest.h>

#include <memory>

#include "bus.hpp"
#include "cobalt/rbc.hpp"

using namespace cobalt;
using cobalt::testing::Bus;

namespace {

SubsetList complete_list(std::size_t n, std::uint32_t t, std::uint32_t q) {
  std::vector<NodeId> all;
  for (std::uint32_t i = 0; i < n; ++i) all.push_back(NodeId{i});
  return std::make_shared<const std::vector<EssentialSubset>>(std::vector{EssentialSubset(all, t, q)});
}

std::vector<ReliableBroadcast> make_nodes(std::size_t n, const SubsetList& es, bool democratic) {
  std::vector<ReliableBroadcast> nodes;
  for (std::uint32_t i = 0; i < n; ++i) nodes.emplace_back("rbc", NodeId{i}, NodeId{0}, es, democratic);
  return nodes;
}

}  // namespace

TEST(ReliableBroadcast, HonestBroadcasterDeliversEverywhere) {
  const auto es = complete_list(4, 1, 3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto nodes = make_nodes(4, es, false);
    Bus bus(4, seed);
    bus.handle = [&](std::size_t i, const Message& m) { return nodes[i].handle(m); };
    bus.push(0, nodes[0].start_broadcast("hello"));
    bus.run();
    for (const auto& n : nodes) EXPECT_EQ(n.accepted(), "hello");
  }
}

TEST(ReliableBroadcast, ToleratesOneSilentNode) {
  const auto es = complete_list(4, 1, 3);
  auto nodes = make_nodes(4, es, false);
  Bus bus(4, 7);
  bus.mute = {3};
  bus.handle = [&](std::size_t i, const Message& m) { return nodes[i].handle(m); };
  bus.push(0, nodes[0].start_broadcast("x"));
  bus.run();
  for (int i = 0; i < 3; ++i) EXPECT_EQ(nodes[i].accepted(), "x");
  EXPECT_FALSE(nodes[3].accepted());
}

TEST(ReliableBroadcast, EquivocatingInitNeverSplits) {
  const auto es = complete_list(4, 1, 3);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto nodes = make_nodes(4, es, false);
    Bus bus(4, seed);
    bus.mute = {0};
    bus.handle = [&](std::size_t i, const Message& m) { return nodes[i].handle(m); };
    // Broadcaster is Byzantine: node 1 sees "a", nodes 2 and 3 see "b".
    for (std::size_t i = 1; i < 4; ++i) {
      Actions a = nodes[i].handle(Message{"rbc", Label::Init, 0, i == 1 ? "a" : "b", NodeId{0}});
      bus.push(i, std::move(a));
    }
    bus.run();
    std::optional<std::string> seen;
    for (std::size_t i = 1; i < 4; ++i) {
      if (!nodes[i].accepted()) continue;
      if (seen) {
        EXPECT_EQ(*seen, *nodes[i].accepted());
      }
      seen = nodes[i].accepted();
    }
  }
}

TEST(ReliableBroadcast, RejectsInitFromNonBroadcaster) {
  const auto es = complete_list(4, 1, 3);
  ReliableBroadcast r("rbc", NodeId{1}, NodeId{0}, es);
  EXPECT_TRUE(r.handle(Message{"rbc", Label::Init, 0, "x", NodeId{2}}).empty());
  EXPECT_FALSE(r.echoed());
}

TEST(ReliableBroadcast, IgnoresOtherInstances) {
  const auto es = complete_list(4, 1, 3);
  ReliableBroadcast r("rbc", NodeId{1}, NodeId{0}, es);
  EXPECT_TRUE(r.handle(Message{"other", Label::Init, 0, "x", NodeId{0}}).empty());
}

TEST(ReliableBroadcast, StartRequiresBroadcaster) {
  const auto es = complete_list(4, 1, 3);
  ReliableBroadcast r("rbc", NodeId{1}, NodeId{0}, es);
  EXPECT_THROW(r.start_broadcast("x"), ProtocolViolation);
  ReliableBroadcast b("rbc", NodeId{0}, NodeId{0}, es);
  b.start_broadcast("x");
  EXPECT_THROW(b.start_broadcast("y"), ProtocolViolation);
}

TEST(ReliableBroadcast, CountsEquivocations) {
  const auto es = complete_list(4, 1, 3);
  ReliableBroadcast r("rbc", NodeId{1}, NodeId{0}, es);
  r.handle(Message{"rbc", Label::Echo, 0, "a", NodeId{2}});
  r.handle(Message{"rbc", Label::Echo, 0, "b", NodeId{2}});
  EXPECT_EQ(r.equivocations(), 1U);
}

TEST(ReliableBroadcast, WeakReadySupportAmplifies) {
  const auto es = complete_list(4, 1, 3);
  ReliableBroadcast r("rbc", NodeId{1}, NodeId{0}, es);
  EXPECT_TRUE(r.handle(Message{"rbc", Label::Ready, 0, "v", NodeId{2}}).empty());
  const Actions a = r.handle(Message{"rbc", Label::Ready, 0, "v", NodeId{3}});
  ASSERT_EQ(a.sends.size(), 1U);
  EXPECT_EQ(a.sends[0].label, Label::Ready);
  EXPECT_FALSE(r.accepted());
  r.handle(Message{"rbc", Label::Ready, 0, "v", NodeId{0}});
  EXPECT_EQ(r.accepted(), "v");
}

TEST(DemocraticBroadcast, EchoWaitsForSupport) {
  const auto es = complete_list(4, 1, 3);
  ReliableBroadcast r("rbc", NodeId{1}, NodeId{0}, es, true);
  EXPECT_TRUE(r.handle(Message{"rbc", Label::Init, 0, "p", NodeId{0}}).empty());
  EXPECT_EQ(r.awaiting_verdict(), std::vector<std::string>{"p"});
  const Actions a = r.set_support("p", Verdict::Support);
  ASSERT_EQ(a.sends.size(), 1U);
  EXPECT_EQ(a.sends[0].label, Label::Echo);
  EXPECT_THROW(r.set_support("p", Verdict::Oppose), ProtocolViolation);
}

TEST(DemocraticBroadcast, OpposedContentStillRelaysReady) {
  const auto es = complete_list(4, 1, 3);
  ReliableBroadcast r("rbc", NodeId{1}, NodeId{0}, es, true);
  r.handle(Message{"rbc", Label::Init, 0, "p", NodeId{0}});
  EXPECT_TRUE(r.set_support("p", Verdict::Oppose).empty());
  r.handle(Message{"rbc", Label::Ready, 0, "p", NodeId{2}});
  const Actions a = r.handle(Message{"rbc", Label::Ready, 0, "p", NodeId{3}});
  ASSERT_EQ(a.sends.size(), 1U);
  EXPECT_EQ(a.sends[0].label, Label::Ready);
  EXPECT_FALSE(r.echoed());
}

TEST(DemocraticBroadcast, MajorityOppositionBlocksDelivery) {
  const auto es = complete_list(4, 1, 3);
  auto nodes = make_nodes(4, es, true);
  Bus bus(4, 3);
  bus.handle = [&](std::size_t i, const Message& m) {
    Actions a = nodes[i].handle(m);
    for (const auto& c : nodes[i].awaiting_verdict()) {
      a.merge(nodes[i].set_support(c, i < 2 ? Verdict::Support : Verdict::Oppose));
    }
    return a;
  };
  bus.push(0, nodes[0].start_broadcast("p"));
  bus.run();
  for (const auto& n : nodes) EXPECT_FALSE(n.accepted());
}

TEST(DemocraticBroadcast, PlainModeRejectsVerdicts) {
  const auto es = complete_list(4, 1, 3);
  ReliableBroadcast r("rbc", NodeId{1}, NodeId{0}, es);
  EXPECT_THROW(r.set_support("p", Verdict::Support), ProtocolViolation);
}
