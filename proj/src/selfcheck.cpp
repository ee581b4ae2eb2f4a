#include "clusterlm/selfcheck.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "clusterlm/stats.hpp"

namespace clusterlm::oracle {

PlainTable to_plain(const CountTable& t) {
  PlainTable out;
  for (const auto& [ctx, cc] : t.contexts())
    for (const auto& [item, f] : cc.items) out[ctx][item] = f;
  return out;
}

void add_sequence(PlainTable& t, const EventSequence& es) {
  for (const Event& e : es.events) t[e.context][e.item] += 1;
}

PlainTable merged(const PlainTable& a, const PlainTable& b) {
  PlainTable out = a;
  for (const auto& [ctx, items] : b)
    for (const auto& [item, f] : items) out[ctx][item] += f;
  return out;
}

double entropy_bits(const PlainTable& t) {
  double h = 0;
  for (const auto& [ctx, items] : t) {
    std::uint64_t total = 0;
    for (const auto& [item, f] : items) total += f;
    for (const auto& [item, f] : items)
      h -= static_cast<double>(f) *
           std::log2(static_cast<double>(f) / static_cast<double>(total));
  }
  return h;
}

double merge_cost(const PlainTable& a, const PlainTable& b) {
  return entropy_bits(merged(a, b)) - entropy_bits(a) - entropy_bits(b);
}

double sequence_probability(const PlainTable& t, const EventSequence& es) {
  double p = 1;
  for (const Event& e : es.events) {
    auto ctx = t.find(e.context);
    if (ctx == t.end()) return 0;
    auto item = ctx->second.find(e.item);
    if (item == ctx->second.end()) return 0;
    std::uint64_t total = 0;
    for (const auto& [w, f] : ctx->second) total += f;
    p *= static_cast<double>(item->second) / static_cast<double>(total);
  }
  return p;
}

double mixture_probability(const ClusterModel& m, const EventSequence& es) {
  double sum = 0;
  for (std::size_t k = 0; k < m.tables.size(); ++k) {
    if (m.priors[k] <= 0) continue;
    sum += m.priors[k] * sequence_probability(to_plain(m.tables[k]), es);
  }
  return sum;
}

double mcnemar_enumeration(std::uint64_t b, std::uint64_t c) {
  const std::uint64_t n = b + c;
  if (n == 0 || n > 24) throw std::invalid_argument("enumeration needs 1 <= b+c <= 24");
  const std::uint64_t m = std::min(b, c);
  std::uint64_t hits = 0;
  const std::uint64_t masks = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < masks; ++mask)
    if (static_cast<std::uint64_t>(std::popcount(mask)) <= m) ++hits;
  return std::min(2.0 * static_cast<double>(hits) / static_cast<double>(masks), 1.0);
}

double wmw_enumeration_p(const std::vector<double>& xs,
                         const std::vector<double>& ys) {
  const std::size_t m = xs.size(), n = ys.size(), total = m + n;
  if (m == 0 || n == 0 || total > 24)
    throw std::invalid_argument("enumeration needs 1 <= m+n <= 24");
  std::vector<double> pooled = xs;
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  // Midranks, computed locally.
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pooled[a] < pooled[b];
  });
  std::vector<double> rank(total);
  std::size_t i = 0;
  while (i < total) {
    std::size_t j = i;
    while (j + 1 < total && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t)
      rank[order[t]] = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    i = j + 1;
  }

  auto u_of_ranksum = [&](double rsum) {
    return rsum - static_cast<double>(m) * static_cast<double>(m + 1) / 2.0;
  };
  double r_obs = 0;
  for (std::size_t t = 0; t < m; ++t) r_obs += rank[t];
  const double mid = static_cast<double>(m) * static_cast<double>(n) / 2.0;
  const double dev_obs = std::fabs(u_of_ranksum(r_obs) - mid);

  std::uint64_t hits = 0, count = 0;
  const std::uint64_t masks = std::uint64_t{1} << total;
  for (std::uint64_t mask = 0; mask < masks; ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != m) continue;
    double rsum = 0;
    for (std::size_t t = 0; t < total; ++t)
      if (mask & (std::uint64_t{1} << t)) rsum += rank[t];
    if (std::fabs(u_of_ranksum(rsum) - mid) >= dev_obs - 1e-9) ++hits;
    ++count;
  }
  return static_cast<double>(hits) / static_cast<double>(count);
}

GreedyCheck check_greedy_decisions(const std::vector<EventSequence>& sequences,
                                   int k, std::uint64_t seed, double tol) {
  GreedyCheck check;
  std::vector<MergeStep> trace;
  const Clustering result = incremental_cluster(sequences, k, seed, &trace);
  const auto order = presentation_order(sequences.size(), seed);

  std::vector<PlainTable> tables;
  for (int i = 0; i < k; ++i) {
    PlainTable t;
    add_sequence(t, sequences[order[static_cast<std::size_t>(i)]]);
    tables.push_back(std::move(t));
  }

  std::size_t step_index = 0;
  for (std::size_t t = static_cast<std::size_t>(k); t < order.size(); ++t) {
    PlainTable singleton;
    add_sequence(singleton, sequences[order[t]]);
    tables.push_back(std::move(singleton));

    double min_cost = 0;
    bool first = true;
    std::vector<std::pair<int, int>> near_min;
    std::map<std::pair<int, int>, double> costs;
    for (std::size_t i = 0; i < tables.size(); ++i) {
      for (std::size_t j = i + 1; j < tables.size(); ++j) {
        const double c = merge_cost(tables[i], tables[j]);
        costs[{static_cast<int>(i), static_cast<int>(j)}] = c;
        if (first || c < min_cost) {
          min_cost = c;
          first = false;
        }
      }
    }
    for (const auto& [pair, c] : costs)
      if (c <= min_cost + tol) near_min.push_back(pair);

    const MergeStep& step = trace[step_index++];
    ++check.steps;
    const std::pair<int, int> chosen{step.left, step.right};
    const bool in_tie_set =
        std::find(near_min.begin(), near_min.end(), chosen) != near_min.end();
    const bool unique_min = near_min.size() == 1;
    if (!in_tie_set || (unique_min && chosen != near_min.front())) {
      ++check.decision_mismatches;
      if (check.detail.empty()) {
        std::ostringstream msg;
        msg << "step " << step.step << ": chose (" << chosen.first << ","
            << chosen.second << ") cost " << step.cost << ", oracle min "
            << min_cost;
        check.detail = msg.str();
      }
    }
    if (std::fabs(step.cost - costs[chosen]) > tol) ++check.value_mismatches;

    // Follow the implementation's decision so both states stay aligned.
    auto bi = static_cast<std::size_t>(chosen.first);
    auto bj = static_cast<std::size_t>(chosen.second);
    tables[bi] = merged(tables[bi], tables[bj]);
    if (bj != tables.size() - 1) tables[bj] = std::move(tables.back());
    tables.pop_back();
  }

  // Final entropies: incremental caches against direct recomputation.
  const auto final_tables = build_cluster_tables(result, sequences);
  for (std::size_t i = 0; i < final_tables.size(); ++i) {
    const double err = std::fabs(cluster_entropy(final_tables[i]) -
                                 entropy_bits(to_plain(final_tables[i])));
    check.max_entropy_error = std::max(check.max_entropy_error, err);
  }
  if (check.max_entropy_error > tol) ++check.value_mismatches;
  return check;
}

}  // namespace clusterlm::oracle

namespace clusterlm {

namespace {

std::vector<EventSequence> random_tiny_corpus(std::mt19937_64& gen, int order) {
  std::uniform_int_distribution<int> n_sent(2, 8);
  std::uniform_int_distribution<int> n_len(1, 5);
  std::uniform_int_distribution<int> n_word(0, 4);
  static const char* words[] = {"a", "b", "c", "d", "e"};
  std::vector<EventSequence> out;
  const int n = n_sent(gen);
  for (int i = 0; i < n; ++i) {
    Sentence s;
    s.id = "s" + std::to_string(i + 1);
    const int len = n_len(gen);
    for (int j = 0; j < len; ++j) s.items.push_back(words[n_word(gen)]);
    out.push_back(extract_ngram_events(s, order));
  }
  return out;
}

ClusterModel random_model(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> n_k(1, 3);
  std::uniform_int_distribution<int> n_events(2, 10);
  std::uniform_int_distribution<int> n_word(0, 4);
  std::uniform_int_distribution<std::uint64_t> n_count(1, 6);
  static const char* words[] = {"a", "b", "c", "d", "e"};
  ClusterModel m;
  const int k = n_k(gen);
  double total = 0;
  for (int c = 0; c < k; ++c) {
    CountTable t;
    const int n = n_events(gen);
    for (int i = 0; i < n; ++i)
      t.add({"", words[n_word(gen)]}, n_count(gen));
    m.tables.push_back(std::move(t));
    const double w = 1.0 + static_cast<double>(gen() % 8);
    m.priors.push_back(w);
    total += w;
  }
  for (double& q : m.priors) q /= total;
  return m;
}

struct SuiteResult {
  std::string name;
  std::string status;  // PASS / FAIL / SKIPPED
  std::string note;
};

}  // namespace

bool run_selftest(std::ostream& out) {
  std::vector<SuiteResult> results;
  const double kTol = 1e-9;

  {  // Entropy and merge-cost formulas against direct evaluation.
    std::mt19937_64 gen(101);
    double max_err = 0;
    int cases = 0;
    for (int rep = 0; rep < 40; ++rep) {
      const int order = 1 + rep % 2;
      auto seqs = random_tiny_corpus(gen, order);
      CountTable a, b;
      for (std::size_t i = 0; i < seqs.size(); ++i)
        (i % 2 ? a : b).add(seqs[i]);
      max_err = std::max(max_err, std::fabs(cluster_entropy(a) -
                                            oracle::entropy_bits(oracle::to_plain(a))));
      max_err = std::max(max_err, std::fabs(merge_cost(a, b) -
                                            std::max(oracle::merge_cost(
                                                         oracle::to_plain(a),
                                                         oracle::to_plain(b)),
                                                     0.0)));
      ++cases;
    }
    results.push_back({"entropy/merge-cost oracle",
                       max_err <= kTol ? "PASS" : "FAIL",
                       std::to_string(cases) + " corpora"});
  }

  {  // Greedy merge decisions against exhaustive pair evaluation.
    std::mt19937_64 gen(202);
    std::size_t steps = 0;
    bool ok = true;
    std::string detail;
    for (int rep = 0; rep < 30 && ok; ++rep) {
      const int order = 1 + rep % 2;
      auto seqs = random_tiny_corpus(gen, order);
      const int k = 1 + static_cast<int>(gen() % std::min<std::size_t>(3, seqs.size()));
      auto check = oracle::check_greedy_decisions(seqs, k, gen());
      steps += check.steps;
      if (!check.ok()) {
        ok = false;
        detail = check.detail;
      }
    }
    results.push_back({"greedy merge decisions", ok ? "PASS" : "FAIL",
                       ok ? std::to_string(steps) + " decisions" : detail});
  }

  {  // Entropy caches after clustering plus reassignment.
    std::mt19937_64 gen(303);
    double max_err = 0;
    for (int rep = 0; rep < 20; ++rep) {
      auto seqs = random_tiny_corpus(gen, 1 + rep % 2);
      const int k = 1 + static_cast<int>(gen() % 2);
      auto c = reassign(incremental_cluster(seqs, k, gen()), seqs);
      for (const auto& t : build_cluster_tables(c, seqs))
        max_err = std::max(max_err,
                           std::fabs(t.entropy_bits() - recompute_entropy_bits(t)));
    }
    results.push_back({"entropy cache validator",
                       max_err <= kTol ? "PASS" : "FAIL", ""});
  }

  {  // Mixture scores against the direct probability sum.
    std::mt19937_64 gen(404);
    double max_rel = 0;
    int cases = 0;
    for (int rep = 0; rep < 200; ++rep) {
      ClusterModel m = random_model(gen);
      // Draw the sequence from one cluster so at least one branch succeeds.
      const auto& home =
          m.tables[gen() % m.tables.size()].contexts().at("").items;
      std::vector<std::string> seen;
      for (const auto& [w, f] : home) seen.push_back(w);
      std::sort(seen.begin(), seen.end());
      EventSequence es;
      es.sentence_id = "x";
      const int len = 1 + static_cast<int>(gen() % 5);
      for (int i = 0; i < len; ++i)
        es.events.push_back({"", seen[gen() % seen.size()]});
      const Score s = mixture_score(m, es);
      if (s.failures != 0) continue;
      const double direct = oracle::mixture_probability(m, es);
      max_rel = std::max(max_rel, std::fabs(std::exp2(s.lp) - direct) / direct);
      ++cases;
    }
    results.push_back({"mixture oracle", max_rel <= kTol ? "PASS" : "FAIL",
                       std::to_string(cases) + " cases"});
  }

  {  // Stats against exhaustive enumeration.
    bool ok = true;
    for (std::uint64_t b = 0; b <= 8 && ok; ++b) {
      for (std::uint64_t c = 0; c <= 8 && ok; ++c) {
        if (b + c == 0) continue;
        ok = std::fabs(mcnemar({b, c}) - oracle::mcnemar_enumeration(b, c)) <= 1e-12;
      }
    }
    std::mt19937_64 gen(505);
    for (int rep = 0; rep < 30 && ok; ++rep) {
      std::vector<double> xs, ys;
      const int m = 1 + static_cast<int>(gen() % 5);
      const int n = 1 + static_cast<int>(gen() % 5);
      for (int i = 0; i < m; ++i) xs.push_back(static_cast<double>(gen() % 6));
      for (int i = 0; i < n; ++i) ys.push_back(static_cast<double>(gen() % 6));
      ok = std::fabs(wilcoxon_mann_whitney(xs, ys).p -
                     oracle::wmw_enumeration_p(xs, ys)) <= 1e-12;
    }
    results.push_back({"stats enumeration", ok ? "PASS" : "FAIL", ""});
  }

  {  // Degenerate input: nothing to cluster, nothing to check.
    std::vector<EventSequence> empty;
    bool threw = false;
    try {
      incremental_cluster(empty, 1, 0);
    } catch (const std::exception&) {
      threw = true;
    }
    results.push_back({"empty corpus case", threw ? "SKIPPED" : "FAIL",
                       "no sentences to cluster"});
  }

  bool all_ok = true;
  for (const auto& r : results) {
    char line[160];
    std::snprintf(line, sizeof line, "%-28s %-8s %s", r.name.c_str(),
                  r.status.c_str(), r.note.c_str());
    out << line << "\n";
    if (r.status == "FAIL") all_ok = false;
  }
  out << (all_ok ? "selftest: PASS" : "selftest: FAIL") << "\n";
  return all_ok;
}

}  // namespace clusterlm
