#include "cobalt/harness/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "cobalt/harness/runners.hpp"
#include "cobalt/harness/record.hpp"

namespace cobalt::harness {

namespace {

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(p * static_cast<double>(v.size() - 1) + 0.5);
  return v[std::min(idx, v.size() - 1)];
}

}  // namespace

std::string SweepReport::digest() const {
  RunRecord r;
  for (const auto& s : runs) r.add("seed", {{"seed", s.seed}, {"digest", s.digest}});
  return r.digest();
}

SweepReport sweep(const Scenario& scenario, std::uint64_t first, std::uint64_t last, unsigned workers) {
  if (last < first) throw ConfigError("empty seed range");
  scenario.trust.validate();
  scenario.validate();
  const std::uint64_t count = last - first + 1;
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, count));

  std::vector<RunSummary> runs(count);
  std::vector<std::uint64_t> sent(count, 0);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t k = next++; k < count; k = next++) {
      RunResult r = run_scenario(scenario, first + k);
      runs[k] = RunSummary{r.seed, r.terminated, r.record.digest(), std::move(r.metrics), std::move(r.violations)};
      sent[k] = r.stats.sent;
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  SweepReport rep;
  rep.scenario = scenario.name;
  rep.first = first;
  rep.last = last;
  std::size_t terminated = 0;
  std::map<std::string, std::vector<double>> samples;
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto& s = runs[k];
    if (s.terminated) ++terminated;
    rep.messages += sent[k];
    for (const auto& [name, v] : s.metrics) samples[name].push_back(v);
    for (const auto& v : s.violations) rep.violations.push_back("seed " + std::to_string(s.seed) + ": " + v);
  }
  for (auto& [name, v] : samples) {
    MetricStats st;
    for (double x : v) st.mean += x;
    st.mean /= static_cast<double>(v.size());
    st.min = *std::min_element(v.begin(), v.end());
    st.max = *std::max_element(v.begin(), v.end());
    st.p50 = percentile(v, 0.5);
    st.p90 = percentile(v, 0.9);
    rep.metrics[name] = st;
  }
  rep.termination_rate = static_cast<double>(terminated) / static_cast<double>(count);
  rep.runs = std::move(runs);
  return rep;
}

std::string format_sweep(const SweepReport& r, bool records) {
  std::ostringstream out;
  if (records) {
    for (const auto& s : r.runs) {
      nlohmann::ordered_json j;
      j["kind"] = "run";
      j["seed"] = s.seed;
      j["terminated"] = s.terminated;
      j["digest"] = s.digest;
      j["violations"] = s.violations.size();
      out << j.dump() << '\n';
    }
    for (const auto& [name, st] : r.metrics) {
      nlohmann::ordered_json j;
      j["kind"] = "metric";
      j["name"] = name;
      j["mean"] = st.mean;
      j["min"] = st.min;
      j["max"] = st.max;
      j["p50"] = st.p50;
      j["p90"] = st.p90;
      out << j.dump() << '\n';
    }
    nlohmann::ordered_json j;
    j["kind"] = "sweep";
    j["scenario"] = r.scenario;
    j["first"] = r.first;
    j["last"] = r.last;
    j["termination_rate"] = r.termination_rate;
    j["messages"] = r.messages;
    j["violations"] = r.violations;
    j["digest"] = r.digest();
    j["passed"] = r.passed();
    out << j.dump() << '\n';
    return out.str();
  }
  out << "scenario " << r.scenario << "  seeds " << r.first << ".." << r.last << '\n';
  out << "termination rate " << r.termination_rate << "  messages " << r.messages << '\n';
  for (const auto& [name, st] : r.metrics) {
    out << "  " << name << ": mean " << st.mean << "  min " << st.min << "  p50 " << st.p50 << "  p90 " << st.p90
        << "  max " << st.max << '\n';
  }
  for (const auto& v : r.violations) out << "VIOLATION " << v << '\n';
  out << "digest " << r.digest() << '\n';
  out << (r.passed() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

}  // namespace cobalt::harness
