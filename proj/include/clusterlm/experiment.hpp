#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "clusterlm/clustering.hpp"
#include "clusterlm/rescore.hpp"

namespace clusterlm {

struct ExperimentConfig {
  EventMode mode = EventMode::ngram;
  int order = 1;
  std::vector<int> k_values = {1};
  int runs_per_k = 10;
  std::uint64_t base_seed = 1;

  std::string corpus_path;      // ngram mode
  std::string class_map_path;   // optional
  std::string rule_path;        // rule mode
  std::string nbest_path;       // optional; enables selection scoring
  std::string hyp_rules_path;   // rule-mode hypothesis analyses
  bool corpus_has_ids = false;

  PriorKind prior = PriorKind::sentences;
  bool leave_one_out = false;
  Normalization normalization = Normalization::lp_and_f;
  bool reassign_enabled = true;
  int max_rounds = 100;
  std::size_t nbest_limit = 10;

  std::vector<std::pair<int, int>> wmw_pairs;  // requested K comparisons
  std::vector<std::string> notes;              // free-text header lines
};

struct RunRow {
  int k = 0;
  int run = 0;
  std::uint64_t seed = 0;
  double total_entropy_bits = 0;
  double per_item_entropy_bits = 0;
  double mixture_per_item_entropy_bits = 0;
  double reduction_vs_k1_percent = 0;
  bool fixed_point = true;
  int rounds = 0;
  bool has_accuracy = false;
  double accuracy_percent = 0;
  bool has_mcnemar = false;  // vs the unclustered reference
  std::uint64_t improved = 0;
  std::uint64_t worsened = 0;
  double mcnemar_p = 1.0;
};

struct KSummary {
  int k = 0;
  double mean_accuracy_percent = 0;
  double mean_per_item_entropy_bits = 0;
  double mean_reduction_percent = 0;
};

struct WmwRow {
  int k1 = 0;
  int k2 = 0;
  double u = 0;
  double p = 1.0;
  bool exact = false;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string version;
  std::size_t n_sequences = 0;
  std::size_t total_events = 0;
  double k1_per_item_entropy_bits = 0;
  bool has_eval = false;
  std::size_t n_lists = 0;
  std::size_t n_evaluable = 0;
  double baseline_percent = 0;
  std::vector<RunRow> rows;
  std::vector<KSummary> summaries;
  std::vector<WmwRow> wmw;
};

// Optional observer invoked once per (k, run) with the final clustering.
using ClusteringSink = std::function<void(int k, int run, const Clustering&)>;

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const ClusteringSink& sink = {});

std::string render_report_text(const ExperimentReport& report);
std::string render_report_tsv(const ExperimentReport& report);

// Per-list detail for a single rescoring pass.
std::string render_eval_tsv(const ExperimentConfig& config,
                            const EvalResult& eval);

}  // namespace clusterlm
