#include <gtest/gtest.h>

#include <memory>

#include "bus.hpp"
#include "cobalt/mvba.hpp"

using namespace cobalt;
using cobalt::testing::Bus;

namespace {

SubsetList complete_list(std::size_t n, std::uint32_t t, std::uint32_t q) {
  std::vector<NodeId> all;
  for (std::uint32_t i = 0; i < n; ++i) all.push_back(NodeId{i});
  return std::make_shared<const std::vector<EssentialSubset>>(std::vector{EssentialSubset(all, t, q)});
}

struct Net {
  std::vector<MultiValuedAgreement> nodes;
  Bus bus;

  Net(std::size_t n, std::uint32_t t, std::uint32_t q, std::uint64_t seed, bool pipelining = false)
      : bus(n, seed) {
    const auto es = complete_list(n, t, q);
    for (std::uint32_t i = 0; i < n; ++i) nodes.emplace_back("mv", NodeId{i}, es, MultiValuedAgreement::Options{pipelining});
    bus.handle = [this](std::size_t i, const Message& m) { return nodes[i].handle(m); };
    bus.coin = [this](std::size_t i, const std::string& tag, const CoinValue& v) { return nodes[i].on_coin(tag, v); };
  }
};

}  // namespace

TEST(RoundIndex, DependsOnValueAndSeed) {
  const CoinValue a{};
  CoinValue b{};
  b[0] = 1;
  EXPECT_NE(round_index("x", a), round_index("y", a));
  EXPECT_NE(round_index("x", a), round_index("x", b));
  EXPECT_EQ(round_index("x", a), round_index("x", a));
}

TEST(ValueSetCodec, RoundTripAndDuplicates) {
  const std::set<std::string> s{"a", "b:c", ""};
  EXPECT_EQ(decode_value_set(encode_value_set(s)), s);
  EXPECT_FALSE(decode_value_set(encode_fields({"a", "a"})));
}

TEST(MultiValuedAgreement, SingleValueDecides) {
  Net net(4, 1, 3, 1);
  for (std::size_t i = 0; i < 4; ++i) net.bus.push(i, net.nodes[i].add_valid_input("v"));
  net.bus.run();
  for (const auto& n : net.nodes) {
    EXPECT_EQ(n.decided(), "v");
    EXPECT_EQ(n.decision_round(), 0);
  }
}

// Every node learns every candidate, starting from a different one.
TEST(MultiValuedAgreement, DistinctFirstInputsAgreeOnAnInput) {
  for (bool pipelining : {false, true}) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      Net net(4, 1, 3, seed, pipelining);
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t k = 0; k < 4; ++k) {
          net.bus.push(i, net.nodes[i].add_valid_input("value-" + std::to_string((i + k) % 4)));
        }
      }
      net.bus.run();
      ASSERT_TRUE(net.nodes[0].decided()) << seed;
      EXPECT_EQ(net.nodes[0].decided()->rfind("value-", 0), 0U);
      for (const auto& n : net.nodes) EXPECT_EQ(n.decided(), net.nodes[0].decided()) << seed;
    }
  }
}

TEST(MultiValuedAgreement, SharedInputsCollapseAfterOneReduction) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Net net(4, 1, 3, seed);
    for (std::size_t i = 0; i < 4; ++i) {
      for (const char* v : {"a", "b", "c"}) net.bus.push(i, net.nodes[i].add_valid_input(v));
    }
    net.bus.run();
    for (const auto& n : net.nodes) {
      ASSERT_TRUE(n.decided());
      EXPECT_EQ(n.decision_round(), 1) << seed;
    }
  }
}

TEST(MultiValuedAgreement, SilentNodeWithinBound) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Net net(4, 1, 3, seed);
    net.bus.mute = {0};
    for (std::size_t i = 1; i < 4; ++i) {
      for (std::size_t k = 0; k < 3; ++k) {
        net.bus.push(i, net.nodes[i].add_valid_input("v" + std::to_string(1 + (i + k) % 3)));
      }
    }
    net.bus.run();
    for (std::size_t i = 1; i < 4; ++i) {
      ASSERT_TRUE(net.nodes[i].decided()) << seed;
      EXPECT_EQ(net.nodes[i].decided(), net.nodes[1].decided());
    }
  }
}

TEST(MultiValuedAgreement, UnrequestedSeedThrows) {
  MultiValuedAgreement m("mv", NodeId{0}, complete_list(4, 1, 3));
  EXPECT_THROW(m.on_coin("mv/seed/0", CoinValue{}), ProtocolViolation);
  EXPECT_TRUE(m.on_coin("other/seed/0", CoinValue{}).empty());
}

TEST(MultiValuedAgreement, OwnsChildPathsOnly) {
  MultiValuedAgreement m("mv", NodeId{0}, complete_list(4, 1, 3));
  EXPECT_TRUE(m.owns("mv"));
  EXPECT_TRUE(m.owns("mv/stop/1"));
  EXPECT_FALSE(m.owns("mvx"));
}
