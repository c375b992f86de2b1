#include <benchmark/benchmark.h>

#include "cobalt/harness/config.hpp"
#include "cobalt/harness/runners.hpp"
#include "cobalt/topology.hpp"

using namespace cobalt;
using namespace cobalt::harness;

namespace {

void BM_Classify(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto t = static_cast<std::uint32_t>((n - 1) / 3);
  const Scenario s = complete_network(n, t, static_cast<std::uint32_t>(n) - t, ProtocolKind::Abba);
  FaultAssignment f(n);
  for (std::uint32_t i = 0; i < t; ++i) f.set(NodeId{i}, FaultStatus::ActivelyByzantine);
  for (auto _ : state) benchmark::DoNotOptimize(classify(s.trust, f));
}
BENCHMARK(BM_Classify)->Arg(4)->Arg(16)->Arg(64);

// One seeded run of a shipped scenario per iteration; reports delivered messages per second.
void run_file(benchmark::State& state, const char* file) {
  Scenario s = load_scenario(std::string(COBALT_SCENARIO_DIR "/") + file);
  s.run.events = false;
  std::uint64_t seed = 1;
  std::uint64_t steps = 0;
  for (auto _ : state) {
    const auto r = run_scenario(s, seed++);
    steps += r.stats.steps;
  }
  state.counters["deliveries/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}

void BM_Rbc(benchmark::State& state) { run_file(state, "rbc_equivocate.cfg"); }
void BM_Abba(benchmark::State& state) { run_file(state, "abba_split.cfg"); }
void BM_Mvba27(benchmark::State& state) { run_file(state, "mvba27.cfg"); }
void BM_Dabc(benchmark::State& state) { run_file(state, "dabc_basic.cfg"); }
void BM_ViewChange(benchmark::State& state) { run_file(state, "txorder_viewchange.cfg"); }

BENCHMARK(BM_Rbc)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Abba)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mvba27)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dabc)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ViewChange)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
