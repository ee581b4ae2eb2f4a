#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "clusterlm/corpus.hpp"

namespace clusterlm {

struct ContextCounts {
  std::unordered_map<std::string, std::uint64_t> items;  // item -> f >= 1
  std::uint64_t total = 0;                               // F = sum of f
  double item_log_mass = 0;                              // sum of f*log2(f)

  // -sum_w f*log2(f/F) for this context, from the cached stats.
  double entropy_bits() const;
};

// Conditional count table with an incrementally maintained entropy cache.
// Only touched contexts are recomputed on update; recompute_entropy_bits
// is the full-recalculation validator.
class CountTable {
 public:
  void add(const Event& e, std::uint64_t n = 1);
  void add(const EventSequence& es);
  void absorb(const CountTable& other);

  std::optional<double> prob(const Event& e) const;  // MLE; nullopt = failure
  std::uint64_t count(const Event& e) const;
  const ContextCounts* find_context(const std::string& context) const;

  std::uint64_t event_count() const { return n_events_; }
  std::size_t context_count() const { return contexts_.size(); }
  bool empty() const { return contexts_.empty(); }
  double entropy_bits() const { return entropy_bits_; }
  const std::unordered_map<std::string, ContextCounts>& contexts() const {
    return contexts_;
  }

  // Test hook for the cache validator's mutation check.
  void debug_set_entropy_bits(double bits) { entropy_bits_ = bits; }

 private:
  std::unordered_map<std::string, ContextCounts> contexts_;
  std::uint64_t n_events_ = 0;
  double entropy_bits_ = 0;
};

double recompute_entropy_bits(const CountTable& t);

// Log probability (base 2) paired with a failure count. Failure differences
// dominate any log-probability difference.
struct Score {
  double lp = 0;
  std::uint64_t failures = 0;

  bool operator==(const Score& o) const {
    return lp == o.lp && failures == o.failures;
  }
};

// (LP1,F1) < (LP2,F2)  <=>  F1 > F2 or (F1 = F2 and LP1 < LP2)
bool score_less(const Score& a, const Score& b);

// Branch on failure counts; on a tie, add the probabilities themselves
// (log-sum-exp in base 2).
Score score_add(const Score& a, const Score& b);

std::optional<double> mle_prob(const CountTable& t, const Event& e);

Score score_sequence(const CountTable& t, const EventSequence& es);

// Scores against the table with the sequence's own counts removed first.
Score score_sequence_leave_one_out(const CountTable& t,
                                   const EventSequence& es);

struct NormalizedScore {
  double lp = 0;
  double failures = 0;
};

bool normalized_less(const NormalizedScore& a, const NormalizedScore& b);

NormalizedScore normalize_by_length(const Score& s, std::size_t n_events);

enum class PriorKind { sentences, words };
enum class Normalization { lp_and_f, lp_only, none };

std::string to_string(PriorKind k);
std::string to_string(Normalization n);
PriorKind prior_kind_from_string(const std::string& s);
Normalization normalization_from_string(const std::string& s);

struct ModelMeta {
  EventMode mode = EventMode::ngram;
  int order = 1;
};

// Frozen per-cluster count tables plus priors, used for scoring/selection.
struct ClusterModel {
  ModelMeta meta;
  std::vector<CountTable> tables;
  std::vector<double> priors;  // sum to 1; q_k = 0 clusters never win

  std::size_t k() const { return tables.size(); }
};

Score mixture_score(const ClusterModel& m, const EventSequence& es);

struct Clustering;  // clustering.hpp

ClusterModel train_model(const Clustering& c,
                         const std::vector<EventSequence>& sequences,
                         ModelMeta meta,
                         PriorKind prior = PriorKind::sentences);

void save_model(std::ostream& out, const ClusterModel& m);
void save_model_file(const std::string& path, const ClusterModel& m);
ClusterModel load_model(std::istream& in,
                        const std::string& filename = "<model>");
ClusterModel load_model_file(const std::string& path);

}  // namespace clusterlm
