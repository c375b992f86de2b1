#include "cobalt/harness/analyze.hpp"

#include <sstream>

#include "json.hpp"

namespace cobalt::harness {

namespace {

std::string triple(const EssentialSubset& s) {
  return "(n=" + std::to_string(s.n()) + ",t=" + std::to_string(s.t) + ",q=" + std::to_string(s.q) + ")";
}

std::string_view short_link(Linkage l) {
  switch (l) {
    case Linkage::FullyLinked:
      return "F";
    case Linkage::Linked:
      return "L";
    case Linkage::Unlinked:
      return ".";
  }
  return "?";
}

}  // namespace

AnalysisReport analyze(const Scenario& sc) {
  AnalysisReport r;
  const auto& trust = sc.trust;
  const auto faults = sc.fault_assignment();
  for (NodeId id : trust.nodes()) r.names.push_back(trust.name(id));

  for (NodeId id : trust.nodes()) {
    const auto& es = *trust.subsets(id);
    for (std::size_t k = 0; k < es.size(); ++k) {
      for (Inequality bad : validate_subset(es[k].n(), es[k].t, es[k].q)) {
        r.subset_violations.push_back(trust.name(id) + " subset " + std::to_string(k) + " " + triple(es[k]) + ": " +
                                      std::string(inequality_name(bad)));
      }
    }
  }

  const std::size_t n = trust.size();
  r.linkage.assign(n, std::vector<Linkage>(n, Linkage::Unlinked));
  for (NodeId i : trust.nodes()) {
    for (NodeId j : trust.nodes()) {
      if (faults.honest(i) && faults.honest(j)) r.linkage[i.value][j.value] = linkage(trust, faults, i, j);
    }
  }
  r.connectivity.assign(n, Connectivity{});
  // Classification is only defined once every subset obeys the laws.
  r.classified = r.subset_violations.empty();
  if (r.classified) {
    const auto cls = classify(trust, faults);
    cls.healthy.for_each([&](NodeId id) { r.healthy.push_back(trust.name(id)); });
    cls.unblocked.for_each([&](NodeId id) { r.unblocked.push_back(trust.name(id)); });
    for (NodeId id : trust.nodes()) {
      if (faults.honest(id)) r.connectivity[id.value] = connectivity(trust, faults, cls, id);
    }
  }

  for (const auto& m : sc.quorum_models) {
    r.quorum_models.push_back({m.name, quorum_model_linked(m.n_i, m.q_i, m.n_j, m.q_j, m.overlap)});
  }

  if (sc.expect.valid && *sc.expect.valid != r.subset_violations.empty()) {
    r.mismatches.push_back(std::string("expected config ") + (*sc.expect.valid ? "valid" : "invalid"));
  }
  for (const auto& l : sc.expect.links) {
    const NodeId a = *trust.find(l.a);
    const NodeId b = *trust.find(l.b);
    const Linkage got = linkage(trust, faults, a, b);
    if (got != l.expected) {
      r.mismatches.push_back("link " + l.a + " " + l.b + ": expected " + std::string(linkage_name(l.expected)) +
                             ", got " + std::string(linkage_name(got)));
    }
  }
  return r;
}

std::string format_analysis(const AnalysisReport& r, bool records) {
  std::ostringstream out;
  if (records) {
    auto emit = [&](nlohmann::ordered_json j) { out << j.dump() << '\n'; };
    for (const auto& v : r.subset_violations) emit({{"kind", "violation"}, {"text", v}});
    for (std::size_t i = 0; i < r.names.size(); ++i) {
      for (std::size_t j = 0; j < r.names.size(); ++j) {
        emit({{"kind", "link"},
              {"a", r.names[i]},
              {"b", r.names[j]},
              {"linkage", std::string(linkage_name(r.linkage[i][j]))}});
      }
    }
    for (std::size_t i = 0; i < r.names.size() && r.classified; ++i) {
      const bool healthy = std::find(r.healthy.begin(), r.healthy.end(), r.names[i]) != r.healthy.end();
      const bool unblocked = std::find(r.unblocked.begin(), r.unblocked.end(), r.names[i]) != r.unblocked.end();
      emit({{"kind", "node"},
            {"name", r.names[i]},
            {"healthy", healthy},
            {"unblocked", unblocked},
            {"weakly", r.connectivity[i].weakly},
            {"strongly", r.connectivity[i].strongly}});
    }
    for (const auto& m : r.quorum_models) emit({{"kind", "quorum_model"}, {"name", m.name}, {"linked", m.linked}});
    for (const auto& m : r.mismatches) emit({{"kind", "mismatch"}, {"text", m}});
    emit({{"kind", "analysis"}, {"ok", r.ok()}});
    return out.str();
  }

  out << "validation: " << (r.subset_violations.empty() ? "ok" : "VIOLATED") << '\n';
  for (const auto& v : r.subset_violations) out << "  " << v << '\n';
  out << "linkage (F fully linked, L linked, . unlinked or faulty):\n";
  std::size_t width = 0;
  for (const auto& n : r.names) width = std::max(width, n.size());
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    out << "  " << r.names[i] << std::string(width - r.names[i].size() + 1, ' ');
    for (std::size_t j = 0; j < r.names.size(); ++j) out << short_link(r.linkage[i][j]);
    out << '\n';
  }
  auto list = [&](const char* label, const std::vector<std::string>& v) {
    out << label << ":";
    for (const auto& s : v) out << ' ' << s;
    out << '\n';
  };
  if (r.classified) {
    list("healthy", r.healthy);
    list("unblocked", r.unblocked);
    out << "connectivity:\n";
    for (std::size_t i = 0; i < r.names.size(); ++i) {
      out << "  " << r.names[i] << " weakly=" << (r.connectivity[i].weakly ? "yes" : "no")
          << " strongly=" << (r.connectivity[i].strongly ? "yes" : "no") << '\n';
    }
  } else {
    out << "classification skipped: parameter laws violated\n";
  }
  for (const auto& m : r.quorum_models) out << "quorum model " << m.name << ": " << (m.linked ? "linked" : "unlinked") << '\n';
  for (const auto& m : r.mismatches) out << "MISMATCH " << m << '\n';
  out << (r.ok() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

}  // namespace cobalt::harness
