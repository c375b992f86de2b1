#include <gtest/gtest.h>

#include "cobalt/simnet.hpp"

using namespace cobalt;

namespace {

// Node 0 broadcasts to everyone; every receiver answers once. Deliveries are logged.
class Echoer : public Participant {
 public:
  Echoer(NodeId self, std::vector<std::string>* log) : self_(self), log_(log) {}
  void start(Tick, Outbox& out) override {
    if (self_.value == 0) out.broadcast_all(Message{"p", Label::Init, 0, "hi", self_});
  }
  void on_message(const Message& m, Tick now, Outbox& out) override {
    log_->push_back(std::to_string(now) + ":" + std::to_string(m.sender.value) + ">" + std::to_string(self_.value));
    if (m.label == Label::Init) out.broadcast_all(Message{"p", Label::Echo, 0, "ok", self_});
  }

 private:
  NodeId self_;
  std::vector<std::string>* log_;
};

class Forger : public Participant {
 public:
  void start(Tick, Outbox& out) override { out.broadcast_all(Message{"p", Label::Init, 0, "x", NodeId{1}}); }
  void on_message(const Message&, Tick, Outbox&) override {}
};

class Direct : public Participant {
 public:
  void start(Tick, Outbox& out) override { out.direct(NodeId{1}, Message{"p", Label::Init, 0, "x", NodeId{0}}); }
  void on_message(const Message&, Tick, Outbox&) override {}
};

std::vector<std::string> trace(std::uint64_t seed, std::unique_ptr<Scheduler> sched, SimStats* stats = nullptr,
                               std::uint64_t budget = 5000000) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.step_budget = budget;
  Simulator sim(cfg, std::move(sched));
  std::vector<std::string> log;
  for (std::uint32_t i = 0; i < 5; ++i) sim.add(std::make_unique<Echoer>(NodeId{i}, &log));
  const auto s = sim.run({});
  if (stats != nullptr) *stats = s;
  return log;
}

}  // namespace

TEST(Simulator, SameSeedSameTrace) {
  EXPECT_EQ(trace(3, make_random_scheduler()), trace(3, make_random_scheduler()));
  EXPECT_NE(trace(3, make_random_scheduler()), trace(4, make_random_scheduler()));
}

TEST(Simulator, DeliversEverything) {
  SimStats s;
  const auto log = trace(1, make_random_scheduler(), &s);
  // 4 INIT deliveries, then 4 echoers each reach 4 peers.
  EXPECT_EQ(log.size(), 4U + 16U);
  EXPECT_EQ(s.undelivered_correct, 0U);
  EXPECT_EQ(s.sent, s.steps);
}

TEST(Simulator, ZeroStepBudgetDeliversNothing) {
  SimStats s;
  EXPECT_TRUE(trace(1, make_random_scheduler(), &s, 0).empty());
  EXPECT_EQ(s.steps, 0U);
  EXPECT_EQ(s.undelivered_correct, 4U);
  EXPECT_FALSE(s.terminated);
}

TEST(Simulator, FifoDeliversInSendOrder) {
  const auto log = trace(1, make_fifo_scheduler());
  ASSERT_GE(log.size(), 4U);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(log[i], "1:0>" + std::to_string(i + 1));
}

TEST(Simulator, TerminalStopsRun) {
  SimConfig cfg;
  Simulator sim(cfg, make_random_scheduler());
  std::vector<std::string> log;
  for (std::uint32_t i = 0; i < 3; ++i) sim.add(std::make_unique<Echoer>(NodeId{i}, &log));
  const auto s = sim.run([&] { return log.size() >= 2; });
  EXPECT_TRUE(s.terminated);
  EXPECT_EQ(log.size(), 2U);
}

TEST(Simulator, ForgedSendsAreDropped) {
  Simulator sim(SimConfig{}, make_random_scheduler());
  std::vector<std::string> log;
  sim.add(std::make_unique<Forger>(), ParticipantStatus::Byzantine);
  sim.add(std::make_unique<Echoer>(NodeId{1}, &log));
  const auto s = sim.run({});
  EXPECT_EQ(s.forged, 1U);
  EXPECT_TRUE(log.empty());
}

TEST(Simulator, DirectSendsNeedByzantineStatus) {
  std::vector<std::string> log;
  Simulator bad(SimConfig{}, make_random_scheduler());
  bad.add(std::make_unique<Direct>());
  bad.add(std::make_unique<Echoer>(NodeId{1}, &log));
  EXPECT_THROW(bad.run({}), ProtocolViolation);
  Simulator ok(SimConfig{}, make_random_scheduler());
  ok.add(std::make_unique<Direct>(), ParticipantStatus::Byzantine);
  ok.add(std::make_unique<Echoer>(NodeId{1}, &log));
  ok.run({});
  EXPECT_EQ(log.size(), 1U);
}

TEST(Simulator, CrashedAtStartSendsNothing) {
  Simulator sim(SimConfig{}, make_random_scheduler());
  std::vector<std::string> log;
  sim.add(std::make_unique<Echoer>(NodeId{0}, &log), ParticipantStatus::Crashed, 0);
  for (std::uint32_t i = 1; i < 4; ++i) sim.add(std::make_unique<Echoer>(NodeId{i}, &log));
  sim.run({});
  EXPECT_TRUE(log.empty());
}

TEST(Simulator, CrashVoidsWholeBroadcastOrNone) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.max_delay = 10;
    Simulator sim(cfg, make_random_scheduler());
    std::vector<std::string> log;
    sim.add(std::make_unique<Echoer>(NodeId{0}, &log), ParticipantStatus::Crashed, 1);
    for (std::uint32_t i = 1; i < 5; ++i) sim.add(std::make_unique<Echoer>(NodeId{i}, &log));
    const auto s = sim.run({});
    std::size_t inits = 0;
    for (const auto& l : log) inits += l.find(":0>") != std::string::npos;
    EXPECT_TRUE(inits == 0 || inits == 4) << seed << " " << inits;
    if (s.voided > 0) {
      EXPECT_EQ(inits, 0U);
    }
  }
}

TEST(Simulator, ListenersLimitBroadcast) {
  Simulator sim(SimConfig{}, make_random_scheduler());
  std::vector<std::string> log;
  class Speaker : public Participant {
   public:
    void start(Tick, Outbox& out) override { out.broadcast(Message{"p", Label::Echo, 0, "x", NodeId{0}}); }
    void on_message(const Message&, Tick, Outbox&) override {}
  };
  sim.add(std::make_unique<Speaker>());
  for (std::uint32_t i = 1; i < 4; ++i) sim.add(std::make_unique<Echoer>(NodeId{i}, &log));
  sim.set_listeners(NodeId{0}, NodeSet{NodeId{2}});
  sim.run({});
  ASSERT_EQ(log.size(), 1U);
  EXPECT_NE(log[0].find("0>2"), std::string::npos);
}

TEST(Simulator, RejectsBadConfig) {
  SimConfig c;
  c.max_delay = 0;
  EXPECT_THROW(Simulator(c, make_random_scheduler()), ConfigError);
  EXPECT_THROW(Simulator(SimConfig{}, nullptr), ConfigError);
}
