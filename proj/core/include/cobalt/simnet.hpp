#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "cobalt/message.hpp"
#include "cobalt/types.hpp"

namespace cobalt {

enum class ParticipantStatus { Correct, Crashed, Byzantine };

struct Outgoing {
  enum class Kind { Listeners, All, Explicit, Direct };
  Message msg;
  Kind kind = Kind::Listeners;
  NodeSet to;
};

class Outbox {
 public:
  void broadcast(Message m) { items.push_back({std::move(m), Outgoing::Kind::Listeners, {}}); }
  void broadcast_all(Message m) { items.push_back({std::move(m), Outgoing::Kind::All, {}}); }
  void broadcast_to(Message m, NodeSet to) {
    items.push_back({std::move(m), Outgoing::Kind::Explicit, std::move(to)});
  }
  // Point-to-point send; only Byzantine participants may use it.
  void direct(NodeId to, Message m) { items.push_back({std::move(m), Outgoing::Kind::Direct, NodeSet{to}}); }

  std::vector<Outgoing> items;
};

class Participant {
 public:
  virtual ~Participant() = default;
  virtual void start(Tick now, Outbox& out) {
    (void)now;
    (void)out;
  }
  virtual void on_message(const Message& msg, Tick now, Outbox& out) = 0;
  virtual void on_tick(Tick now, Outbox& out) {
    (void)now;
    (void)out;
  }
  virtual bool wants_ticks() const { return false; }
};

struct Envelope {
  std::uint64_t seq = 0;
  std::uint64_t broadcast = 0;
  Tick sent_at = 0;
  Tick deliver_at = 0;
  std::uint64_t enqueued_step = 0;
  NodeId from;
  NodeId to;
  Message msg;
  bool delivered = false;
  bool voided = false;
  std::size_t ready_pos = SIZE_MAX;
};

using Rng = std::mt19937_64;

class Scheduler {
 public:
  using Accessor = std::function<const Envelope&(std::size_t)>;
  virtual ~Scheduler() = default;
  // Delivery delay in ticks, clamped by the simulator to [1, max_delay].
  virtual Tick delay(const Envelope& e, Tick max_delay, Rng& rng) = 0;
  // Index into the deliverable pool of size `count`.
  virtual std::size_t pick(std::size_t count, const Accessor& at, Rng& rng) = 0;
};

std::unique_ptr<Scheduler> make_random_scheduler();
std::unique_ptr<Scheduler> make_fifo_scheduler();
// Messages from `targets` always take the maximum delay and are delivered last when possible.
std::unique_ptr<Scheduler> make_target_delay_scheduler(NodeSet targets);
// Messages crossing between `group` and the rest take the maximum delay.
std::unique_ptr<Scheduler> make_partition_scheduler(NodeSet group);
// Messages from `rushers` arrive first; everything else is randomly delayed.
std::unique_ptr<Scheduler> make_rush_scheduler(NodeSet rushers);

struct SimConfig {
  std::uint64_t seed = 1;
  Tick max_delay = 5;
  std::uint64_t fairness = 5000;
  Tick tick_budget = 100000;
  std::uint64_t step_budget = 5000000;
};

struct SimStats {
  bool terminated = false;
  Tick ticks = 0;
  std::uint64_t steps = 0;
  std::uint64_t sent = 0;
  std::uint64_t forged = 0;
  std::uint64_t voided = 0;
  std::uint64_t forced = 0;
  std::uint64_t undelivered_correct = 0;
};

class Simulator {
 public:
  Simulator(SimConfig cfg, std::unique_ptr<Scheduler> scheduler);

  // Participant ids are assigned densely in insertion order.
  NodeId add(std::unique_ptr<Participant> p, ParticipantStatus status = ParticipantStatus::Correct,
             Tick crash_at = 0);
  void set_listeners(NodeId sender, NodeSet listeners);

  std::size_t size() const { return parts_.size(); }
  Participant& participant(NodeId id) { return *parts_.at(id.value).impl; }
  ParticipantStatus status(NodeId id) const { return parts_.at(id.value).status; }
  bool alive(NodeId id) const;
  Tick now() const { return now_; }
  std::uint64_t steps() const { return steps_; }
  Rng& rng() { return rng_; }

  std::function<void(const Envelope&)> on_enqueue;
  std::function<void(const Envelope&)> on_deliver;

  SimStats run(const std::function<bool()>& terminal);

 private:
  struct Slot {
    std::unique_ptr<Participant> impl;
    ParticipantStatus status;
    Tick crash_at;
    bool crash_applied = false;
    NodeSet listeners;
  };

  void flush(NodeId from, Outbox& out);
  void enqueue(NodeId from, NodeId to, const Message& m, std::uint64_t bcast);
  void promote();
  void make_ready(std::size_t idx);
  void remove_ready(std::size_t idx);
  void apply_crashes();
  void deliver(std::size_t idx);

  SimConfig cfg_;
  std::unique_ptr<Scheduler> scheduler_;
  Rng rng_;
  std::vector<Slot> parts_;
  std::deque<Envelope> env_;
  std::priority_queue<std::pair<Tick, std::uint64_t>, std::vector<std::pair<Tick, std::uint64_t>>,
                      std::greater<>>
      future_;
  std::vector<std::size_t> ready_;
  std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, std::greater<>> oldest_;
  std::vector<std::uint64_t> bcast_delivered_;
  std::vector<std::vector<std::size_t>> bcast_members_;
  Tick now_ = 0;
  std::uint64_t steps_ = 0;
  SimStats stats_;
};

}  // namespace cobalt
