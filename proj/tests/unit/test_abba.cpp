#include <gtest/gtest.h>

#include <memory>

#include "bus.hpp"
#include "cobalt/abba.hpp"

using namespace cobalt;
using cobalt::testing::Bus;

namespace {

SubsetList complete_list(std::size_t n, std::uint32_t t, std::uint32_t q) {
  std::vector<NodeId> all;
  for (std::uint32_t i = 0; i < n; ++i) all.push_back(NodeId{i});
  return std::make_shared<const std::vector<EssentialSubset>>(std::vector{EssentialSubset(all, t, q)});
}

struct Net {
  std::vector<BinaryAgreement> nodes;
  Bus bus;

  // `fixed` pins every coin to one bit; otherwise coins come from the bus hash.
  Net(std::size_t n, std::uint32_t t, std::uint32_t q, std::uint64_t seed, std::optional<bool> fixed = {})
      : bus(n, seed) {
    const auto es = complete_list(n, t, q);
    for (std::uint32_t i = 0; i < n; ++i) nodes.emplace_back("ba", NodeId{i}, es);
    bus.handle = [this](std::size_t i, const Message& m) { return nodes[i].handle(m); };
    bus.coin = [this, fixed](std::size_t i, const std::string& tag, const CoinValue& v) {
      const auto r = nodes[i].coin_round(tag);
      return nodes[i].on_coin(*r, fixed ? *fixed : coin_bit(v));
    };
  }

  void input(std::size_t i, bool v) { bus.push(i, nodes[i].input(v)); }
};

}  // namespace

TEST(BinaryAgreement, UnanimousInputDecidesInRoundZero) {
  for (bool v : {false, true}) {
    Net net(4, 1, 3, 1, v);
    for (std::size_t i = 0; i < 4; ++i) net.input(i, v);
    net.bus.run();
    for (const auto& n : net.nodes) {
      EXPECT_EQ(n.decided(), v);
      EXPECT_EQ(n.decision_round(), 0);
    }
  }
}

TEST(BinaryAgreement, UnanimousInputIsTheDecision) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const bool v = seed % 2 == 1;
    Net net(4, 1, 3, seed);
    for (std::size_t i = 0; i < 4; ++i) net.input(i, v);
    net.bus.run();
    for (const auto& n : net.nodes) EXPECT_EQ(n.decided(), v) << seed;
  }
}

TEST(BinaryAgreement, SplitInputAgrees) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Net net(4, 1, 3, seed);
    for (std::size_t i = 0; i < 4; ++i) net.input(i, i < 2);
    net.bus.run();
    ASSERT_TRUE(net.nodes[0].decided()) << seed;
    for (const auto& n : net.nodes) EXPECT_EQ(n.decided(), net.nodes[0].decided()) << seed;
  }
}

TEST(BinaryAgreement, SilentNodeWithinBound) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Net net(4, 1, 3, seed);
    net.bus.mute = {3};
    for (std::size_t i = 0; i < 3; ++i) net.input(i, i == 0);
    net.bus.run();
    for (std::size_t i = 0; i < 3; ++i) {
      ASSERT_TRUE(net.nodes[i].decided()) << seed;
      EXPECT_EQ(net.nodes[i].decided(), net.nodes[0].decided());
    }
  }
}

TEST(BinaryAgreement, CoinStepsRecordSingletonFinish) {
  Net net(4, 1, 3, 5, true);
  for (std::size_t i = 0; i < 4; ++i) net.input(i, true);
  net.bus.run();
  const auto& steps = net.nodes[0].coin_steps();
  ASSERT_FALSE(steps.empty());
  EXPECT_EQ(steps[0].round, 0);
  EXPECT_EQ(steps[0].values, 2);
  EXPECT_TRUE(steps[0].sent_finish);
}

TEST(BinaryAgreement, MismatchedCoinDefersDecision) {
  // Unanimous 1 with a coin pinned to 0 can never send FINISH.
  Net net(4, 1, 3, 2, false);
  for (std::size_t i = 0; i < 4; ++i) net.input(i, true);
  net.bus.run(20000);
  for (const auto& n : net.nodes) {
    EXPECT_FALSE(n.decided());
    EXPECT_GT(n.round(), 3);
  }
}

TEST(BinaryAgreement, PreconditionsThrow) {
  const auto es = complete_list(4, 1, 3);
  BinaryAgreement b("ba", NodeId{0}, es);
  EXPECT_THROW(b.on_coin(0, true), ProtocolViolation);
  b.input(true);
  EXPECT_THROW(b.input(false), ProtocolViolation);
  EXPECT_THROW(BinaryAgreement("ba", NodeId{0}, nullptr), ConfigError);
}

TEST(BinaryAgreement, RejectsMalformedContent) {
  const auto es = complete_list(4, 1, 3);
  BinaryAgreement b("ba", NodeId{0}, es);
  b.input(true);
  b.handle(Message{"ba", Label::Init, 0, "2", NodeId{1}});
  b.handle(Message{"ba", Label::Conf, 0, "{2}", NodeId{1}});
  b.handle(Message{"ba", Label::Aux, -1, "1", NodeId{1}});
  EXPECT_EQ(b.rejected(), 3U);
}

TEST(BinaryAgreement, CoinTagRoundTrip) {
  const auto es = complete_list(4, 1, 3);
  BinaryAgreement b("x/stop/2", NodeId{0}, es);
  EXPECT_EQ(b.coin_round(b.coin_tag(7)), 7);
  EXPECT_FALSE(b.coin_round("x/stop/3/coin/1"));
}

TEST(BitSetCodec, RoundTrip) {
  for (BitSet2 s = 0; s < 4; ++s) EXPECT_EQ(decode_bitset(encode_bitset(s)), s);
  EXPECT_FALSE(decode_bitset("{1,0}"));
}
