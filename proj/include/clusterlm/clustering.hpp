#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "clusterlm/scoring.hpp"

namespace clusterlm {

// A hard partition of sentences into k clusters. Tables are not stored;
// build_cluster_tables reconstructs them from the event sequences.
struct Clustering {
  int k = 0;
  std::uint64_t seed = 0;
  EventMode mode = EventMode::ngram;
  int order = 1;
  bool fixed_point = true;
  int rounds = 0;  // reassignment rounds that moved something
  double total_entropy_bits = 0;
  std::vector<std::string> ids;  // corpus order
  std::vector<int> assignment;   // parallel to ids, values in [0, k)
};

double cluster_entropy(const CountTable& t);

// Entropy increase of merging the two tables; >= 0 by the log-sum
// inequality, 0 iff they induce identical conditional distributions.
double merge_cost(const CountTable& a, const CountTable& b);

struct MergeStep {
  std::size_t step = 0;  // index into the presentation order
  int left = 0;          // chosen pair, left < right
  int right = 0;
  double cost = 0;
};

std::vector<std::size_t> presentation_order(std::size_t n, std::uint64_t seed);

// Greedy incremental clustering: seed the first k sentences of a random
// presentation order as singletons, then absorb each remaining sentence by
// merging the cheapest pair among the k+1 current clusters. Ties go to the
// lowest (left, right) pair.
Clustering incremental_cluster(const std::vector<EventSequence>& sequences,
                               int k, std::uint64_t seed,
                               std::vector<MergeStep>* trace = nullptr);
Clustering incremental_cluster_ordered(
    const std::vector<EventSequence>& sequences, int k,
    const std::vector<std::size_t>& order, std::uint64_t seed = 0,
    std::vector<MergeStep>* trace = nullptr);

struct ReassignOptions {
  int max_rounds = 100;
  bool leave_one_out = false;
};

// Parallel reassignment to a fixed point: every sentence is scored against
// every cluster's round-start table and all strict improvements move at
// once. Ties keep the sentence in place. Empty clusters persist.
Clustering reassign(const Clustering& c,
                    const std::vector<EventSequence>& sequences,
                    const ReassignOptions& opts = {});

std::vector<CountTable> build_cluster_tables(
    const Clustering& c, const std::vector<EventSequence>& sequences);

double total_entropy(const std::vector<CountTable>& tables);

void save_clustering(std::ostream& out, const Clustering& c);
void save_clustering_file(const std::string& path, const Clustering& c);
Clustering load_clustering(std::istream& in,
                           const std::string& filename = "<clustering>");
Clustering load_clustering_file(const std::string& path);

}  // namespace clusterlm
