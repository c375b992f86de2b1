#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cobalt::harness {

struct OracleVerdict {
  std::string check;
  bool refused = false;          // instance exceeded the configured bound
  std::uint64_t cases = 0;       // enumerated assignments, schedules, or triples
  std::uint64_t counterexamples = 0;
  std::vector<std::string> notes;  // first few counterexamples, or the size report

  bool ok() const { return !refused && counterexamples == 0; }
};

// validate_subset against literal inequality evaluation and a constructive
// quorum-intersection witness, for every (n, t, q) with n <= max_n and t, q <= n + 1.
OracleVerdict oracle_parameter_laws(std::size_t max_n);

// Support transfer: for every valid triple with t <= n - q and n <= max_n, every set of
// at least q senders and every placement of at most t Byzantine members leaves t + 1
// honest senders. `invalid` enumerates triples breaking the laws instead (a control
// that must produce counterexamples).
OracleVerdict oracle_transfer(std::size_t max_n, bool invalid = false);

// Support blocking: for every valid triple with n <= max_n, every Byzantine count
// b <= t, and every single-message assignment of the honest members, two nodes
// sharing the subset never both observe strong support for different messages.
OracleVerdict oracle_blocking(std::size_t max_n, bool invalid = false);

// Shared implicit essential subset by enumerating subsets of the overlap.
OracleVerdict oracle_quorum_model(std::uint64_t n_i, std::uint64_t q_i, std::uint64_t n_j, std::uint64_t q_j,
                                  std::uint64_t overlap, bool expect_linked);

// Every delivery order of a 4-node broadcast (t = 1, q = 3) whose broadcaster
// equivocates INIT, ECHO, and READY across recipients; checks that no two honest
// nodes accept different contents. Refuses once more than `state_cap` states are seen.
OracleVerdict oracle_rbc(std::size_t n, std::uint64_t state_cap);

// Instance files are "key = value" lines; `check` selects laws, transfer, blocking,
// quorum, or rbc. Throws ConfigError on malformed instances.
OracleVerdict run_oracle_instance(std::string_view text, std::string_view origin);

std::string format_verdict(const OracleVerdict& v, bool records);

}  // namespace cobalt::harness
