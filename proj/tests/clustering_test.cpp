#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "clusterlm/clustering.hpp"
#include "clusterlm/selfcheck.hpp"

using namespace clusterlm;

namespace {

CountTable table_of(std::initializer_list<std::pair<Event, std::uint64_t>> counts) {
  CountTable t;
  for (const auto& [e, n] : counts) t.add(e, n);
  return t;
}

std::vector<EventSequence> sequences_of(
    std::initializer_list<std::vector<std::string>> sentences, int order) {
  std::vector<EventSequence> out;
  int i = 0;
  for (const auto& items : sentences) {
    Sentence s{"s" + std::to_string(++i), items};
    out.push_back(extract_ngram_events(s, order));
  }
  return out;
}

// Groups of sentence indices induced by a clustering, as canonical sets.
std::set<std::set<std::string>> groups_of(const Clustering& c) {
  std::map<int, std::set<std::string>> by_cluster;
  for (std::size_t i = 0; i < c.ids.size(); ++i)
    by_cluster[c.assignment[i]].insert(c.ids[i]);
  std::set<std::set<std::string>> out;
  for (auto& [k, g] : by_cluster) out.insert(std::move(g));
  return out;
}

}  // namespace

TEST_CASE("cluster_entropy on small tables") {
  CHECK(cluster_entropy(table_of({{{"", "a"}, 2}})) == doctest::Approx(0.0));
  CHECK(cluster_entropy(table_of({{{"", "a"}, 2}, {{"", "b"}, 2}})) ==
        doctest::Approx(4.0).epsilon(1e-12));
  CHECK(cluster_entropy(table_of({{{"a", "b"}, 1}, {{"a", "c"}, 1}, {{"b", "d"}, 2}})) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(cluster_entropy(CountTable{}) == 0.0);
}

TEST_CASE("merge_cost on small tables") {
  CHECK(merge_cost(table_of({{{"", "a"}, 2}}), table_of({{{"", "a"}, 3}})) ==
        doctest::Approx(0.0));
  CHECK(merge_cost(table_of({{{"", "a"}, 2}}), table_of({{{"", "b"}, 2}})) ==
        doctest::Approx(4.0).epsilon(1e-12));
  CHECK(merge_cost(table_of({{{"", "a"}, 2}}), CountTable{}) == doctest::Approx(0.0));
}

TEST_CASE("merge_cost is non-negative and matches the direct formula") {
  std::mt19937_64 gen(41);
  const char* words[] = {"a", "b", "c", "d"};
  const char* ctxs[] = {"", "a", "b"};
  for (int rep = 0; rep < 200; ++rep) {
    CountTable a, b;
    for (int i = 0; i < 1 + static_cast<int>(gen() % 8); ++i)
      a.add({ctxs[gen() % 3], words[gen() % 4]}, 1 + gen() % 3);
    for (int i = 0; i < 1 + static_cast<int>(gen() % 8); ++i)
      b.add({ctxs[gen() % 3], words[gen() % 4]}, 1 + gen() % 3);
    const double cost = merge_cost(a, b);
    CHECK(cost >= 0.0);
    const double direct = oracle::merge_cost(oracle::to_plain(a), oracle::to_plain(b));
    CHECK(cost == doctest::Approx(std::max(direct, 0.0)).epsilon(1e-9));
    CHECK(merge_cost(b, a) == doctest::Approx(cost).epsilon(1e-12));
  }
}

TEST_CASE("incremental_cluster separates a separable corpus from every order") {
  // At order 3 the two-template corpus has a unique zero-entropy 2-partition.
  const auto seqs = sequences_of({{"a", "a"}, {"a", "a"}, {"b", "b"}, {"b", "b"}}, 3);
  std::vector<std::size_t> order(seqs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::set<std::set<std::string>> expected = {{"s1", "s2"}, {"s3", "s4"}};
  int checked = 0;
  do {
    const Clustering c = incremental_cluster_ordered(seqs, 2, order);
    CHECK(groups_of(c) == expected);
    CHECK(c.total_entropy_bits == doctest::Approx(0.0));
    ++checked;
  } while (std::next_permutation(order.begin(), order.end()));
  CHECK(checked == 24);
}

TEST_CASE("incremental_cluster degenerate cases") {
  const auto seqs = sequences_of({{"a"}, {"b"}, {"c"}}, 1);
  const Clustering singletons = incremental_cluster(seqs, 3, 5);
  CHECK(groups_of(singletons) ==
        std::set<std::set<std::string>>{{"s1"}, {"s2"}, {"s3"}});

  const Clustering one = incremental_cluster(seqs, 1, 5);
  CHECK(one.assignment == std::vector<int>{0, 0, 0});
  CountTable global;
  for (const auto& es : seqs) global.add(es);
  CHECK(one.total_entropy_bits ==
        doctest::Approx(cluster_entropy(global)).epsilon(1e-12));

  CHECK_THROWS_AS(incremental_cluster(seqs, 4, 5), std::invalid_argument);
}

TEST_CASE("incremental_cluster is deterministic given the seed") {
  std::mt19937_64 gen(43);
  const char* words[] = {"a", "b", "c", "d", "e"};
  std::vector<EventSequence> seqs;
  for (int i = 0; i < 20; ++i) {
    Sentence s{"s" + std::to_string(i + 1), {}};
    for (int j = 0; j < 1 + static_cast<int>(gen() % 5); ++j)
      s.items.push_back(words[gen() % 5]);
    seqs.push_back(extract_ngram_events(s, 2));
  }
  const Clustering a = incremental_cluster(seqs, 4, 99);
  const Clustering b = incremental_cluster(seqs, 4, 99);
  CHECK(a.assignment == b.assignment);
  CHECK(a.total_entropy_bits == b.total_entropy_bits);
  const Clustering other = incremental_cluster(seqs, 4, 100);
  CHECK(other.assignment.size() == a.assignment.size());
}

TEST_CASE("every merge decision matches the exhaustive-pair oracle") {
  std::mt19937_64 gen(47);
  const char* words[] = {"a", "b", "c", "d", "e"};
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<EventSequence> seqs;
    const int n = 2 + static_cast<int>(gen() % 7);
    for (int i = 0; i < n; ++i) {
      Sentence s{"s" + std::to_string(i + 1), {}};
      for (int j = 0; j < 1 + static_cast<int>(gen() % 5); ++j)
        s.items.push_back(words[gen() % 5]);
      seqs.push_back(extract_ngram_events(s, 1 + rep % 2));
    }
    const int k = 1 + static_cast<int>(gen() % std::min(3, n));
    const auto check = oracle::check_greedy_decisions(seqs, k, gen());
    INFO(check.detail);
    CHECK(check.ok());
  }
}

TEST_CASE("reassign leaves a fixed point unchanged") {
  const auto seqs = sequences_of({{"a", "a"}, {"a", "a"}, {"b", "b"}, {"b", "b"}}, 3);
  const Clustering c = incremental_cluster(seqs, 2, 1);
  const Clustering r = reassign(c, seqs);
  CHECK(r.fixed_point);
  CHECK(r.rounds == 0);
  CHECK(r.assignment == c.assignment);
}

TEST_CASE("reassign moves a misplaced sentence in one round") {
  const auto seqs =
      sequences_of({{"a", "a"}, {"a", "a"}, {"b", "b"}, {"b", "b"}, {"a", "a"}}, 3);
  Clustering c;
  c.k = 2;
  c.ids = {"s1", "s2", "s3", "s4", "s5"};
  c.assignment = {0, 0, 1, 1, 1};  // s5 sits with the b-sentences
  const Clustering r = reassign(c, seqs);
  CHECK(r.fixed_point);
  CHECK(r.rounds == 1);
  CHECK(r.assignment == std::vector<int>{0, 0, 1, 1, 0});
  CHECK(r.total_entropy_bits == doctest::Approx(0.0));
}

TEST_CASE("adversarial parallel swap hits max_rounds without a fixed point") {
  // Two identical singletons under leave-one-out scoring: each sees its own
  // cluster as empty and the other as a perfect fit, so they swap forever.
  const auto seqs = sequences_of({{"a", "b"}, {"a", "b"}}, 1);
  Clustering c;
  c.k = 2;
  c.ids = {"s1", "s2"};
  c.assignment = {0, 1};
  const Clustering r = reassign(c, seqs, {7, true});
  CHECK(!r.fixed_point);
  CHECK(r.rounds == 7);
  const Clustering done = reassign(c, seqs, {100, false});
  CHECK(done.fixed_point);  // self-inclusive scoring converges immediately
}

TEST_CASE("reassign keeps empty clusters and the K contract") {
  const auto seqs = sequences_of({{"a"}, {"a"}, {"a"}}, 1);
  Clustering c;
  c.k = 2;
  c.ids = {"s1", "s2", "s3"};
  c.assignment = {0, 0, 1};
  const Clustering r = reassign(c, seqs);
  CHECK(r.k == 2);
  CHECK(*std::max_element(r.assignment.begin(), r.assignment.end()) <= 1);
}

TEST_CASE("converged reassignment satisfies the fixed-point property") {
  std::mt19937_64 gen(53);
  const char* words[] = {"a", "b", "c", "d"};
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<EventSequence> seqs;
    const int n = 4 + static_cast<int>(gen() % 5);
    for (int i = 0; i < n; ++i) {
      Sentence s{"s" + std::to_string(i + 1), {}};
      for (int j = 0; j < 1 + static_cast<int>(gen() % 4); ++j)
        s.items.push_back(words[gen() % 4]);
      seqs.push_back(extract_ngram_events(s, 1));
    }
    const int k = 2 + static_cast<int>(gen() % 2);
    const Clustering r = reassign(incremental_cluster(seqs, k, gen()), seqs);
    if (!r.fixed_point) continue;
    const auto tables = build_cluster_tables(r, seqs);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      const Score own =
          score_sequence(tables[static_cast<std::size_t>(r.assignment[i])], seqs[i]);
      for (int j = 0; j < r.k; ++j) {
        if (j == r.assignment[i]) continue;
        CHECK(!score_less(own, score_sequence(tables[static_cast<std::size_t>(j)],
                                              seqs[i])));
      }
    }
  }
}

TEST_CASE("total entropy equals the sum of cluster entropies") {
  const auto seqs = sequences_of({{"a", "b"}, {"b", "a"}, {"c"}}, 2);
  const Clustering c = incremental_cluster(seqs, 2, 9);
  const auto tables = build_cluster_tables(c, seqs);
  CHECK(c.total_entropy_bits ==
        doctest::Approx(total_entropy(tables)).epsilon(1e-9));
  double direct = 0;
  for (const auto& t : tables) direct += recompute_entropy_bits(t);
  CHECK(c.total_entropy_bits == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("per-item entropy of a uniform two-item table") {
  // Bag-of-words reading of "a a b b", end markers ignored.
  const CountTable t = table_of({{{"", "a"}, 2}, {{"", "b"}, 2}});
  CHECK(cluster_entropy(t) == doctest::Approx(4.0));
  CHECK(cluster_entropy(t) / static_cast<double>(t.event_count()) ==
        doctest::Approx(1.0));
}

TEST_CASE("min-over-seeds entropy is non-increasing in K") {
  std::mt19937_64 gen(59);
  std::vector<EventSequence> seqs;
  const char* themes[3][4] = {{"fly", "to", "boston", "now"},
                              {"fare", "from", "denver", "please"},
                              {"list", "all", "meals", "served"}};
  for (int i = 0; i < 30; ++i) {
    const auto& theme = themes[i % 3];
    Sentence s{"s" + std::to_string(i + 1), {}};
    for (int j = 0; j < 3 + static_cast<int>(gen() % 2); ++j)
      s.items.push_back(theme[gen() % 4]);
    seqs.push_back(extract_ngram_events(s, 1));
  }
  double prev = 1e9;
  for (int k : {1, 2, 3, 4, 6}) {
    double best = 1e9;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Clustering c = reassign(incremental_cluster(seqs, k, seed), seqs);
      best = std::min(best, c.total_entropy_bits);
    }
    CHECK(best <= prev + 1e-9);
    prev = best;
  }
}
