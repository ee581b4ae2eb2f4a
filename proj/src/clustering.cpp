#include "clusterlm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace clusterlm {

namespace {

double xlog2x(std::uint64_t f) {
  return f == 0 ? 0.0 : static_cast<double>(f) * std::log2(static_cast<double>(f));
}

struct ClusterState {
  std::vector<std::size_t> members;  // indices into the sequence list
  CountTable table;
};

void validate_sequences(const std::vector<EventSequence>& sequences) {
  for (const auto& es : sequences) {
    if (es.events.empty())
      throw std::invalid_argument("event sequence " + es.sentence_id +
                                  " is empty");
  }
}

std::unordered_map<std::string, std::size_t> index_by_id(
    const std::vector<EventSequence>& sequences) {
  std::unordered_map<std::string, std::size_t> idx;
  idx.reserve(sequences.size());
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (!idx.emplace(sequences[i].sentence_id, i).second)
      throw std::invalid_argument("duplicate sentence id: " +
                                  sequences[i].sentence_id);
  }
  return idx;
}

}  // namespace

double cluster_entropy(const CountTable& t) { return t.entropy_bits(); }

double merge_cost(const CountTable& a, const CountTable& b) {
  const CountTable* small = &a;
  const CountTable* big = &b;
  if (small->context_count() > big->context_count()) std::swap(small, big);
  // Only contexts present in both tables change their entropy contribution.
  double cost = 0;
  for (const auto& [ctx, cs] : small->contexts()) {
    const ContextCounts* cb = big->find_context(ctx);
    if (!cb) continue;
    double merged_mass = cs.item_log_mass + cb->item_log_mass;
    for (const auto& [item, f] : cs.items) {
      auto it = cb->items.find(item);
      if (it == cb->items.end()) continue;
      merged_mass += xlog2x(f + it->second) - xlog2x(f) - xlog2x(it->second);
    }
    const double h_merged = xlog2x(cs.total + cb->total) - merged_mass;
    cost += h_merged - cs.entropy_bits() - cb->entropy_bits();
  }
  return std::max(cost, 0.0);
}

std::vector<std::size_t> presentation_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Hand-rolled Fisher-Yates: std::shuffle is implementation-defined.
  std::mt19937_64 gen(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

Clustering incremental_cluster(const std::vector<EventSequence>& sequences,
                               int k, std::uint64_t seed,
                               std::vector<MergeStep>* trace) {
  return incremental_cluster_ordered(
      sequences, k, presentation_order(sequences.size(), seed), seed, trace);
}

Clustering incremental_cluster_ordered(
    const std::vector<EventSequence>& sequences, int k,
    const std::vector<std::size_t>& order, std::uint64_t seed,
    std::vector<MergeStep>* trace) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (sequences.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("fewer sequences than clusters");
  if (order.size() != sequences.size())
    throw std::invalid_argument("presentation order has wrong length");
  validate_sequences(sequences);

  std::vector<ClusterState> clusters;
  clusters.reserve(static_cast<std::size_t>(k) + 1);
  auto make_singleton = [&](std::size_t seq_index) {
    ClusterState c;
    c.members.push_back(seq_index);
    c.table.add(sequences[seq_index]);
    return c;
  };
  for (int i = 0; i < k; ++i)
    clusters.push_back(make_singleton(order[static_cast<std::size_t>(i)]));

  // Pair costs are cached: merge_cost is a pure function of the two
  // tables, so only pairs touching a changed slot need recomputation.
  const auto slots = static_cast<std::size_t>(k) + 1;
  std::vector<std::vector<double>> cost(slots, std::vector<double>(slots, 0.0));
  auto cost_at = [&](std::size_t a, std::size_t b) -> double& {
    return a < b ? cost[a][b] : cost[b][a];
  };
  if (order.size() > static_cast<std::size_t>(k)) {
    for (std::size_t i = 0; i + 1 < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j)
        cost[i][j] = merge_cost(clusters[i].table, clusters[j].table);
  }

  std::size_t stale = slots;  // slot whose table changed in the last merge
  for (std::size_t t = static_cast<std::size_t>(k); t < order.size(); ++t) {
    clusters.push_back(make_singleton(order[t]));
    const std::size_t s = clusters.size() - 1;
    for (std::size_t i = 0; i < s; ++i)
      cost[i][s] = merge_cost(clusters[i].table, clusters[s].table);
    if (stale < s) {
      for (std::size_t x = 0; x < s; ++x)
        if (x != stale)
          cost_at(x, stale) = merge_cost(clusters[x].table, clusters[stale].table);
      stale = slots;
    }

    int best_i = 0, best_j = 1;
    double best_cost = cost[0][1];
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        if (cost[i][j] < best_cost) {
          best_cost = cost[i][j];
          best_i = static_cast<int>(i);
          best_j = static_cast<int>(j);
        }
      }
    }
    if (trace) trace->push_back({t, best_i, best_j, best_cost});
    auto bi = static_cast<std::size_t>(best_i);
    auto bj = static_cast<std::size_t>(best_j);
    clusters[bi].table.absorb(clusters[bj].table);
    clusters[bi].members.insert(clusters[bi].members.end(),
                                clusters[bj].members.begin(),
                                clusters[bj].members.end());
    // The merged slot keeps index best_i; the last cluster fills best_j.
    const std::size_t last = clusters.size() - 1;
    if (bj != last) {
      clusters[bj] = std::move(clusters.back());
      for (std::size_t x = 0; x < last; ++x)
        if (x != bj) cost_at(x, bj) = cost_at(x, last);
    }
    clusters.pop_back();
    stale = bi;
  }

  Clustering result;
  result.k = k;
  result.seed = seed;
  result.fixed_point = false;  // only the reassignment pass verifies this
  result.ids.reserve(sequences.size());
  for (const auto& es : sequences) result.ids.push_back(es.sentence_id);
  result.assignment.assign(sequences.size(), 0);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (std::size_t m : clusters[c].members)
      result.assignment[m] = static_cast<int>(c);
    result.total_entropy_bits += clusters[c].table.entropy_bits();
  }
  return result;
}

std::vector<CountTable> build_cluster_tables(
    const Clustering& c, const std::vector<EventSequence>& sequences) {
  if (c.ids.size() != sequences.size())
    throw std::invalid_argument("clustering and sequences differ in size");
  auto idx = index_by_id(sequences);
  std::vector<CountTable> tables(static_cast<std::size_t>(c.k));
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    auto it = idx.find(c.ids[i]);
    if (it == idx.end())
      throw std::runtime_error("no event sequence for sentence id: " + c.ids[i]);
    const int a = c.assignment[i];
    if (a < 0 || a >= c.k)
      throw std::runtime_error("cluster index out of range for id: " + c.ids[i]);
    tables[static_cast<std::size_t>(a)].add(sequences[it->second]);
  }
  return tables;
}

double total_entropy(const std::vector<CountTable>& tables) {
  double h = 0;
  for (const auto& t : tables) h += t.entropy_bits();
  return h;
}

Clustering reassign(const Clustering& c,
                    const std::vector<EventSequence>& sequences,
                    const ReassignOptions& opts) {
  if (opts.max_rounds < 1) throw std::invalid_argument("max_rounds must be >= 1");
  validate_sequences(sequences);
  auto idx = index_by_id(sequences);

  Clustering result = c;
  std::vector<CountTable> tables = build_cluster_tables(result, sequences);

  result.fixed_point = false;
  result.rounds = 0;
  for (int round = 1; round <= opts.max_rounds; ++round) {
    // All moves are decided against the round-start tables, then applied
    // in parallel.
    std::vector<std::pair<std::size_t, int>> moves;
    for (std::size_t i = 0; i < result.ids.size(); ++i) {
      const EventSequence& es = sequences[idx.at(result.ids[i])];
      const int own = result.assignment[i];
      Score best_score =
          opts.leave_one_out
              ? score_sequence_leave_one_out(tables[static_cast<std::size_t>(own)], es)
              : score_sequence(tables[static_cast<std::size_t>(own)], es);
      int best = own;
      for (int j = 0; j < result.k; ++j) {
        if (j == own) continue;
        const Score s = score_sequence(tables[static_cast<std::size_t>(j)], es);
        if (score_less(best_score, s)) {  // strict improvement only
          best_score = s;
          best = j;
        }
      }
      if (best != own) moves.emplace_back(i, best);
    }
    if (moves.empty()) {
      result.fixed_point = true;
      break;
    }
    for (const auto& [i, dest] : moves) result.assignment[i] = dest;
    result.rounds = round;
    tables = build_cluster_tables(result, sequences);
  }
  result.total_entropy_bits = total_entropy(tables);
  return result;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void save_clustering(std::ostream& out, const Clustering& c) {
  out << "# clusterlm clustering 1\n";
  out << "# k " << c.k << "\n";
  out << "# seed " << c.seed << "\n";
  out << "# mode " << to_string(c.mode) << "\n";
  out << "# order " << c.order << "\n";
  out << "# fixed_point " << (c.fixed_point ? 1 : 0) << "\n";
  out << "# rounds " << c.rounds << "\n";
  out << "# total_entropy_bits " << format_double(c.total_entropy_bits) << "\n";
  for (std::size_t i = 0; i < c.ids.size(); ++i)
    out << c.ids[i] << '\t' << c.assignment[i] << '\n';
}

void save_clustering_file(const std::string& path, const Clustering& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_clustering(out, c);
}

Clustering load_clustering(std::istream& in, const std::string& filename) {
  Clustering c;
  c.k = 0;
  std::string line;
  std::size_t lineno = 0;
  bool saw_version = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream h(line.substr(1));
      std::string key;
      h >> key;
      if (key == "clusterlm") saw_version = true;
      else if (key == "k") h >> c.k;
      else if (key == "seed") h >> c.seed;
      else if (key == "mode") {
        std::string v;
        h >> v;
        c.mode = event_mode_from_string(v);
      } else if (key == "order") h >> c.order;
      else if (key == "fixed_point") {
        int v = 0;
        h >> v;
        c.fixed_point = v != 0;
      } else if (key == "rounds") h >> c.rounds;
      else if (key == "total_entropy_bits") h >> c.total_entropy_bits;
      continue;
    }
    if (!saw_version || c.k < 1)
      throw std::runtime_error(filename + ": missing clustering header");
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw std::runtime_error(filename + ":" + std::to_string(lineno) +
                               ": expected `id<TAB>cluster`");
    int a = -1;
    try {
      std::size_t used = 0;
      const std::string field = line.substr(tab + 1);
      a = std::stoi(field, &used);
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw std::runtime_error(filename + ":" + std::to_string(lineno) +
                               ": expected an integer cluster index");
    }
    if (a < 0 || a >= c.k)
      throw std::runtime_error(filename + ":" + std::to_string(lineno) +
                               ": cluster index out of range");
    c.ids.push_back(line.substr(0, tab));
    c.assignment.push_back(a);
  }
  if (!saw_version)
    throw std::runtime_error(filename + ": not a clustering file");
  return c;
}

Clustering load_clustering_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_clustering(in, path);
}

}  // namespace clusterlm
