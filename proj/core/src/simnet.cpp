#include "cobalt/simnet.hpp"

#include <algorithm>

namespace cobalt {

namespace {

Tick uniform_delay(Tick max_delay, Rng& rng) {
  return std::uniform_int_distribution<Tick>(1, max_delay)(rng);
}

std::size_t uniform_pick(std::size_t count, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
}

// Samples a bounded number of candidates and returns the first one `prefer` accepts.
template <typename Pred>
std::size_t sample_preferring(std::size_t count, const Scheduler::Accessor& at, Rng& rng, Pred prefer) {
  constexpr int kTries = 16;
  std::size_t first = uniform_pick(count, rng);
  if (prefer(at(first))) return first;
  for (int i = 1; i < kTries; ++i) {
    const std::size_t c = uniform_pick(count, rng);
    if (prefer(at(c))) return c;
  }
  return first;
}

class RandomScheduler : public Scheduler {
 public:
  Tick delay(const Envelope&, Tick max_delay, Rng& rng) override { return uniform_delay(max_delay, rng); }
  std::size_t pick(std::size_t count, const Accessor&, Rng& rng) override { return uniform_pick(count, rng); }
};

class FifoScheduler : public Scheduler {
 public:
  Tick delay(const Envelope&, Tick, Rng&) override { return 1; }
  std::size_t pick(std::size_t count, const Accessor& at, Rng&) override {
    std::size_t best = 0;
    for (std::size_t i = 1; i < count; ++i) {
      if (at(i).seq < at(best).seq) best = i;
    }
    return best;
  }
};

class TargetDelayScheduler : public Scheduler {
 public:
  explicit TargetDelayScheduler(NodeSet targets) : targets_(std::move(targets)) {}
  Tick delay(const Envelope& e, Tick max_delay, Rng& rng) override {
    return targets_.contains(e.from) ? max_delay : uniform_delay(max_delay, rng);
  }
  std::size_t pick(std::size_t count, const Accessor& at, Rng& rng) override {
    return sample_preferring(count, at, rng, [&](const Envelope& e) { return !targets_.contains(e.from); });
  }

 private:
  NodeSet targets_;
};

class PartitionScheduler : public Scheduler {
 public:
  explicit PartitionScheduler(NodeSet group) : group_(std::move(group)) {}
  Tick delay(const Envelope& e, Tick max_delay, Rng& rng) override {
    if (crosses(e)) return max_delay;
    return std::min<Tick>(uniform_delay(max_delay, rng), std::max<Tick>(1, max_delay / 4));
  }
  std::size_t pick(std::size_t count, const Accessor& at, Rng& rng) override {
    return sample_preferring(count, at, rng, [&](const Envelope& e) { return !crosses(e); });
  }

 private:
  bool crosses(const Envelope& e) const { return group_.contains(e.from) != group_.contains(e.to); }
  NodeSet group_;
};

class RushScheduler : public Scheduler {
 public:
  explicit RushScheduler(NodeSet rushers) : rushers_(std::move(rushers)) {}
  Tick delay(const Envelope& e, Tick max_delay, Rng& rng) override {
    return rushers_.contains(e.from) ? 1 : uniform_delay(max_delay, rng);
  }
  std::size_t pick(std::size_t count, const Accessor& at, Rng& rng) override {
    return sample_preferring(count, at, rng, [&](const Envelope& e) { return rushers_.contains(e.from); });
  }

 private:
  NodeSet rushers_;
};

}  // namespace

std::unique_ptr<Scheduler> make_random_scheduler() { return std::make_unique<RandomScheduler>(); }
std::unique_ptr<Scheduler> make_fifo_scheduler() { return std::make_unique<FifoScheduler>(); }
std::unique_ptr<Scheduler> make_target_delay_scheduler(NodeSet targets) {
  return std::make_unique<TargetDelayScheduler>(std::move(targets));
}
std::unique_ptr<Scheduler> make_partition_scheduler(NodeSet group) {
  return std::make_unique<PartitionScheduler>(std::move(group));
}
std::unique_ptr<Scheduler> make_rush_scheduler(NodeSet rushers) {
  return std::make_unique<RushScheduler>(std::move(rushers));
}

Simulator::Simulator(SimConfig cfg, std::unique_ptr<Scheduler> scheduler)
    : cfg_(cfg), scheduler_(std::move(scheduler)), rng_(cfg.seed) {
  if (!scheduler_) throw ConfigError("simulator needs a scheduler");
  if (cfg_.max_delay < 1) throw ConfigError("max delay must be at least one tick");
  if (cfg_.fairness < 1) throw ConfigError("fairness bound must be positive");
}

NodeId Simulator::add(std::unique_ptr<Participant> p, ParticipantStatus status, Tick crash_at) {
  if (!p) throw ConfigError("null participant");
  if (status == ParticipantStatus::Crashed && crash_at < 0) throw ConfigError("negative crash time");
  const NodeId id{static_cast<std::uint32_t>(parts_.size())};
  parts_.push_back(Slot{std::move(p), status, crash_at, false, {}});
  return id;
}

void Simulator::set_listeners(NodeId sender, NodeSet listeners) {
  parts_.at(sender.value).listeners = std::move(listeners);
}

bool Simulator::alive(NodeId id) const {
  const Slot& s = parts_.at(id.value);
  return s.status != ParticipantStatus::Crashed || now_ < s.crash_at;
}

void Simulator::enqueue(NodeId from, NodeId to, const Message& m, std::uint64_t bcast) {
  if (to.value >= parts_.size()) return;
  Envelope e;
  e.seq = env_.size();
  e.broadcast = bcast;
  e.sent_at = now_;
  e.enqueued_step = steps_;
  e.from = from;
  e.to = to;
  e.msg = m;
  const Tick d = std::clamp<Tick>(scheduler_->delay(e, cfg_.max_delay, rng_), 1, cfg_.max_delay);
  e.deliver_at = now_ + d;
  env_.push_back(std::move(e));
  bcast_members_[bcast].push_back(env_.size() - 1);
  future_.emplace(env_.back().deliver_at, env_.back().seq);
  ++stats_.sent;
  if (on_enqueue) on_enqueue(env_.back());
}

void Simulator::flush(NodeId from, Outbox& out) {
  const Slot& src = parts_.at(from.value);
  for (auto& item : out.items) {
    if (item.msg.sender != from) {
      ++stats_.forged;
      continue;
    }
    if (item.kind == Outgoing::Kind::Direct && src.status != ParticipantStatus::Byzantine) {
      throw ProtocolViolation("point-to-point send from a non-Byzantine participant");
    }
    const std::uint64_t bcast = bcast_members_.size();
    bcast_members_.emplace_back();
    bcast_delivered_.push_back(0);
    switch (item.kind) {
      case Outgoing::Kind::Listeners:
        src.listeners.for_each([&](NodeId to) { enqueue(from, to, item.msg, bcast); });
        break;
      case Outgoing::Kind::All:
        for (std::uint32_t i = 0; i < parts_.size(); ++i) {
          if (i != from.value) enqueue(from, NodeId{i}, item.msg, bcast);
        }
        break;
      case Outgoing::Kind::Explicit:
      case Outgoing::Kind::Direct:
        item.to.for_each([&](NodeId to) { enqueue(from, to, item.msg, bcast); });
        break;
    }
  }
  out.items.clear();
}

void Simulator::make_ready(std::size_t idx) {
  Envelope& e = env_[idx];
  e.ready_pos = ready_.size();
  ready_.push_back(idx);
  oldest_.push(e.seq);
}

void Simulator::remove_ready(std::size_t idx) {
  Envelope& e = env_[idx];
  const std::size_t pos = e.ready_pos;
  const std::size_t last = ready_.back();
  ready_[pos] = last;
  env_[last].ready_pos = pos;
  ready_.pop_back();
  e.ready_pos = SIZE_MAX;
}

void Simulator::promote() {
  while (!future_.empty() && future_.top().first <= now_) {
    const std::size_t idx = future_.top().second;
    future_.pop();
    if (!env_[idx].voided) make_ready(idx);
  }
}

void Simulator::apply_crashes() {
  for (std::uint32_t i = 0; i < parts_.size(); ++i) {
    Slot& s = parts_[i];
    if (s.status != ParticipantStatus::Crashed || s.crash_applied || now_ < s.crash_at) continue;
    s.crash_applied = true;
    // Each in-flight broadcast either reaches everyone it was addressed to or nobody.
    for (std::size_t b = 0; b < bcast_members_.size(); ++b) {
      const auto& members = bcast_members_[b];
      if (members.empty() || env_[members.front()].from.value != i || bcast_delivered_[b] != 0) continue;
      bool pending = false;
      for (std::size_t idx : members) pending = pending || !env_[idx].delivered;
      if (!pending || std::bernoulli_distribution(0.5)(rng_)) continue;
      for (std::size_t idx : members) {
        Envelope& e = env_[idx];
        e.voided = true;
        if (e.ready_pos != SIZE_MAX) remove_ready(idx);
        ++stats_.voided;
      }
    }
  }
}

void Simulator::deliver(std::size_t idx) {
  Envelope& e = env_[idx];
  remove_ready(idx);
  e.delivered = true;
  ++bcast_delivered_[e.broadcast];
  ++steps_;
  if (on_deliver) on_deliver(e);
  if (!alive(e.to)) return;
  Outbox out;
  parts_[e.to.value].impl->on_message(e.msg, now_, out);
  flush(e.to, out);
}

SimStats Simulator::run(const std::function<bool()>& terminal) {
  stats_ = SimStats{};
  for (std::uint32_t i = 0; i < parts_.size(); ++i) {
    if (!alive(NodeId{i})) continue;
    Outbox out;
    parts_[i].impl->start(now_, out);
    flush(NodeId{i}, out);
  }
  apply_crashes();
  const bool any_ticker = std::any_of(parts_.begin(), parts_.end(),
                                      [](const Slot& s) { return s.impl->wants_ticks(); });
  while (true) {
    if (terminal && terminal()) {
      stats_.terminated = true;
      break;
    }
    if (steps_ >= cfg_.step_budget || now_ > cfg_.tick_budget) break;
    promote();
    if (ready_.empty()) {
      if (future_.empty() && !any_ticker) break;
      // Without tickers there is nothing to observe between deliveries, so skip ahead.
      const Tick next = any_ticker || future_.empty() ? now_ + 1 : std::max(now_ + 1, future_.top().first);
      now_ = next;
      apply_crashes();
      if (any_ticker) {
        for (std::uint32_t i = 0; i < parts_.size(); ++i) {
          if (!alive(NodeId{i}) || !parts_[i].impl->wants_ticks()) continue;
          Outbox out;
          parts_[i].impl->on_tick(now_, out);
          flush(NodeId{i}, out);
        }
      }
      continue;
    }
    while (!oldest_.empty() && env_[oldest_.top()].ready_pos == SIZE_MAX) oldest_.pop();
    std::size_t chosen;
    if (!oldest_.empty() && steps_ - env_[oldest_.top()].enqueued_step >= cfg_.fairness) {
      chosen = oldest_.top();
      ++stats_.forced;
    } else {
      const Scheduler::Accessor at = [this](std::size_t i) -> const Envelope& { return env_[ready_[i]]; };
      const std::size_t pos = scheduler_->pick(ready_.size(), at, rng_);
      chosen = ready_.at(pos);
    }
    deliver(chosen);
  }
  for (const Envelope& e : env_) {
    if (e.delivered || e.voided) continue;
    if (parts_[e.from.value].status == ParticipantStatus::Correct &&
        parts_[e.to.value].status == ParticipantStatus::Correct) {
      ++stats_.undelivered_correct;
    }
  }
  stats_.ticks = now_;
  stats_.steps = steps_;
  return stats_;
}

}  // namespace cobalt
