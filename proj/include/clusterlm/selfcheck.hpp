#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "clusterlm/clustering.hpp"
#include "clusterlm/scoring.hpp"

namespace clusterlm::oracle {

// Deliberately naive reference implementations, kept independent of the
// incremental caches they are used to check.

using PlainTable = std::map<std::string, std::map<std::string, std::uint64_t>>;

PlainTable to_plain(const CountTable& t);
void add_sequence(PlainTable& t, const EventSequence& es);
PlainTable merged(const PlainTable& a, const PlainTable& b);

double entropy_bits(const PlainTable& t);
double merge_cost(const PlainTable& a, const PlainTable& b);

// Product of per-event relative frequencies; 0 when any event is unseen.
double sequence_probability(const PlainTable& t, const EventSequence& es);

// Direct sum over clusters of q_k * prod p_{k,i}.
double mixture_probability(const ClusterModel& m, const EventSequence& es);

// Exhaustive enumeration over all 2^(b+c) outcome vectors; b+c <= 24.
double mcnemar_enumeration(std::uint64_t b, std::uint64_t c);

// Exhaustive enumeration over all size-m subsets by bitmask; m+n <= 24.
double wmw_enumeration_p(const std::vector<double>& xs,
                         const std::vector<double>& ys);

struct GreedyCheck {
  std::size_t steps = 0;
  std::size_t decision_mismatches = 0;
  std::size_t value_mismatches = 0;
  double max_entropy_error = 0;
  std::string detail;

  bool ok() const { return decision_mismatches == 0 && value_mismatches == 0; }
};

// Re-simulates incremental_cluster with plain tables, checking every merge
// decision against an exhaustive evaluation of all pair costs. Decision
// identity is required whenever the optimum is unique beyond `tol`;
// otherwise the chosen pair must lie within `tol` of the oracle minimum.
GreedyCheck check_greedy_decisions(const std::vector<EventSequence>& sequences,
                                   int k, std::uint64_t seed,
                                   double tol = 1e-9);

}  // namespace clusterlm::oracle

namespace clusterlm {

// Built-in oracle suites; returns false if any suite fails.
bool run_selftest(std::ostream& out);

}  // namespace clusterlm
