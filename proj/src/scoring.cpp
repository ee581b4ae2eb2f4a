#include "clusterlm/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "clusterlm/clustering.hpp"

namespace clusterlm {

namespace {

double xlog2x(std::uint64_t f) {
  return f == 0 ? 0.0 : static_cast<double>(f) * std::log2(static_cast<double>(f));
}

}  // namespace

double ContextCounts::entropy_bits() const {
  if (total == 0) return 0.0;
  return xlog2x(total) - item_log_mass;
}

void CountTable::add(const Event& e, std::uint64_t n) {
  if (n == 0) return;
  ContextCounts& cc = contexts_[e.context];
  const double h_old = cc.entropy_bits();
  std::uint64_t& f = cc.items[e.item];
  cc.item_log_mass -= xlog2x(f);
  f += n;
  cc.item_log_mass += xlog2x(f);
  cc.total += n;
  n_events_ += n;
  entropy_bits_ += cc.entropy_bits() - h_old;
}

void CountTable::add(const EventSequence& es) {
  for (const Event& e : es.events) add(e);
}

void CountTable::absorb(const CountTable& other) {
  for (const auto& [ctx, cc] : other.contexts_) {
    for (const auto& [item, f] : cc.items) add({ctx, item}, f);
  }
}

std::optional<double> CountTable::prob(const Event& e) const {
  auto ctx = contexts_.find(e.context);
  if (ctx == contexts_.end()) return std::nullopt;
  auto item = ctx->second.items.find(e.item);
  if (item == ctx->second.items.end()) return std::nullopt;
  return static_cast<double>(item->second) /
         static_cast<double>(ctx->second.total);
}

std::uint64_t CountTable::count(const Event& e) const {
  auto ctx = contexts_.find(e.context);
  if (ctx == contexts_.end()) return 0;
  auto item = ctx->second.items.find(e.item);
  return item == ctx->second.items.end() ? 0 : item->second;
}

const ContextCounts* CountTable::find_context(const std::string& context) const {
  auto it = contexts_.find(context);
  return it == contexts_.end() ? nullptr : &it->second;
}

double recompute_entropy_bits(const CountTable& t) {
  double h = 0;
  for (const auto& [ctx, cc] : t.contexts()) {
    const double total = static_cast<double>(cc.total);
    for (const auto& [item, f] : cc.items)
      h -= static_cast<double>(f) * std::log2(static_cast<double>(f) / total);
  }
  return h;
}

bool score_less(const Score& a, const Score& b) {
  if (a.failures != b.failures) return a.failures > b.failures;
  return a.lp < b.lp;
}

Score score_add(const Score& a, const Score& b) {
  if (a.failures < b.failures) return a;
  if (a.failures > b.failures) return b;
  const double hi = std::max(a.lp, b.lp);
  const double lo = std::min(a.lp, b.lp);
  return {hi + std::log2(1.0 + std::exp2(lo - hi)), a.failures};
}

std::optional<double> mle_prob(const CountTable& t, const Event& e) {
  return t.prob(e);
}

Score score_sequence(const CountTable& t, const EventSequence& es) {
  Score s;
  for (const Event& e : es.events) {
    if (auto p = t.prob(e))
      s.lp += std::log2(*p);
    else
      ++s.failures;
  }
  return s;
}

Score score_sequence_leave_one_out(const CountTable& t,
                                   const EventSequence& es) {
  // Own contribution of the sequence, removed from both f and F.
  std::unordered_map<std::string, std::uint64_t> own_ctx;
  std::map<std::pair<std::string, std::string>, std::uint64_t> own_event;
  for (const Event& e : es.events) {
    ++own_ctx[e.context];
    ++own_event[{e.context, e.item}];
  }
  Score s;
  for (const Event& e : es.events) {
    const std::uint64_t f = t.count(e);
    const std::uint64_t df = own_event[{e.context, e.item}];
    const ContextCounts* cc = t.find_context(e.context);
    const std::uint64_t total = cc ? cc->total : 0;
    const std::uint64_t dt = own_ctx[e.context];
    if (f <= df || total <= dt) {
      ++s.failures;
    } else {
      s.lp += std::log2(static_cast<double>(f - df) /
                        static_cast<double>(total - dt));
    }
  }
  return s;
}

bool normalized_less(const NormalizedScore& a, const NormalizedScore& b) {
  if (a.failures != b.failures) return a.failures > b.failures;
  return a.lp < b.lp;
}

NormalizedScore normalize_by_length(const Score& s, std::size_t n_events) {
  if (n_events == 0) throw std::invalid_argument("cannot normalize by zero length");
  const double n = static_cast<double>(n_events);
  return {s.lp / n, static_cast<double>(s.failures) / n};
}

std::string to_string(PriorKind k) {
  return k == PriorKind::sentences ? "sentences" : "words";
}

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::lp_and_f: return "lp+f";
    case Normalization::lp_only: return "lp";
    default: return "none";
  }
}

PriorKind prior_kind_from_string(const std::string& s) {
  if (s == "sentences") return PriorKind::sentences;
  if (s == "words") return PriorKind::words;
  throw std::runtime_error("unknown prior kind: " + s);
}

Normalization normalization_from_string(const std::string& s) {
  if (s == "lp+f" || s == "both") return Normalization::lp_and_f;
  if (s == "lp") return Normalization::lp_only;
  if (s == "none") return Normalization::none;
  throw std::runtime_error("unknown normalization: " + s);
}

Score mixture_score(const ClusterModel& m, const EventSequence& es) {
  if (m.tables.empty() || m.tables.size() != m.priors.size())
    throw std::invalid_argument("malformed cluster model");
  bool any = false;
  Score acc;
  for (std::size_t k = 0; k < m.tables.size(); ++k) {
    const double q = m.priors[k];
    if (q <= 0) continue;
    Score s = score_sequence(m.tables[k], es);
    s.lp += std::log2(q);
    acc = any ? score_add(acc, s) : s;
    any = true;
  }
  if (!any) throw std::runtime_error("empty model");
  return acc;
}

ClusterModel train_model(const Clustering& c,
                         const std::vector<EventSequence>& sequences,
                         ModelMeta meta, PriorKind prior) {
  if (c.k < 1) throw std::invalid_argument("clustering has no clusters");
  std::unordered_map<std::string, int> assignment;
  assignment.reserve(c.ids.size());
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    if (!assignment.emplace(c.ids[i], c.assignment[i]).second)
      throw std::runtime_error("duplicate sentence id in clustering: " + c.ids[i]);
  }

  ClusterModel m;
  m.meta = meta;
  m.tables.resize(static_cast<std::size_t>(c.k));
  std::vector<double> weights(static_cast<std::size_t>(c.k), 0.0);
  std::size_t matched = 0;
  for (const EventSequence& es : sequences) {
    auto it = assignment.find(es.sentence_id);
    if (it == assignment.end())
      throw std::runtime_error("unassigned sentence id: " + es.sentence_id);
    const auto k = static_cast<std::size_t>(it->second);
    m.tables[k].add(es);
    if (prior == PriorKind::sentences) {
      weights[k] += 1.0;
    } else {
      // Item count: end markers are not items.
      const std::size_t n_items =
          es.n_events() - (meta.mode == EventMode::ngram ? 1 : 0);
      weights[k] += static_cast<double>(n_items);
    }
    ++matched;
  }
  if (matched != c.ids.size())
    throw std::runtime_error("clustering assigns ids with no event sequence");

  double total = 0;
  for (double w : weights) total += w;
  if (total <= 0) throw std::runtime_error("empty model");
  m.priors.resize(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) m.priors[k] = weights[k] / total;
  return m;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t parse_count(const std::string& field, const std::string& filename,
                          std::size_t lineno) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(filename + ":" + std::to_string(lineno) +
                             ": expected an integer, got `" + field + "`");
  }
}

}  // namespace

void save_model(std::ostream& out, const ClusterModel& m) {
  out << "# clusterlm model 1\n";
  out << "# mode " << to_string(m.meta.mode) << "\n";
  out << "# order " << m.meta.order << "\n";
  out << "# k " << m.tables.size() << "\n";
  out << "# priors";
  for (double q : m.priors) out << ' ' << format_double(q);
  out << '\n';
  for (std::size_t k = 0; k < m.tables.size(); ++k) {
    // Sorted for a stable, diffable file.
    std::map<std::string, const ContextCounts*> ordered;
    for (const auto& [ctx, cc] : m.tables[k].contexts()) ordered[ctx] = &cc;
    for (const auto& [ctx, cc] : ordered) {
      std::map<std::string, std::uint64_t> items(cc->items.begin(),
                                                 cc->items.end());
      for (const auto& [item, f] : items)
        out << k << '\t' << ctx << '\t' << item << '\t' << f << '\n';
    }
  }
}

void save_model_file(const std::string& path, const ClusterModel& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_model(out, m);
}

ClusterModel load_model(std::istream& in, const std::string& filename) {
  ClusterModel m;
  std::string line;
  std::size_t lineno = 0;
  bool saw_version = false;
  long k = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream h(line.substr(1));
      std::string key;
      h >> key;
      if (key == "clusterlm") {
        saw_version = true;
      } else if (key == "mode") {
        std::string v;
        h >> v;
        m.meta.mode = event_mode_from_string(v);
      } else if (key == "order") {
        h >> m.meta.order;
      } else if (key == "k") {
        h >> k;
        if (k < 1)
          throw std::runtime_error(filename + ":" + std::to_string(lineno) +
                                   ": k must be >= 1");
        m.tables.resize(static_cast<std::size_t>(k));
      } else if (key == "priors") {
        double q;
        while (h >> q) m.priors.push_back(q);
      }
      continue;
    }
    if (!saw_version || k < 1)
      throw std::runtime_error(filename + ": missing model header");
    // k <TAB> context <TAB> item <TAB> count
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    for (int i = 0; i < 3; ++i) {
      auto tab = line.find('\t', start);
      if (tab == std::string::npos)
        throw std::runtime_error(filename + ":" + std::to_string(lineno) +
                                 ": expected 4 tab-separated fields");
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    fields.push_back(line.substr(start));
    const std::uint64_t cluster = parse_count(fields[0], filename, lineno);
    if (cluster >= m.tables.size())
      throw std::runtime_error(filename + ":" + std::to_string(lineno) +
                               ": cluster index out of range");
    const std::uint64_t f = parse_count(fields[3], filename, lineno);
    if (f == 0 || fields[2].empty())
      throw std::runtime_error(filename + ":" + std::to_string(lineno) +
                               ": bad count line");
    m.tables[cluster].add({fields[1], fields[2]}, f);
  }
  if (!saw_version) throw std::runtime_error(filename + ": not a model file");
  if (m.priors.size() != m.tables.size())
    throw std::runtime_error(filename + ": priors do not match k");
  return m;
}

ClusterModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_model(in, path);
}

}  // namespace clusterlm
