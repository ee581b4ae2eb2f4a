#include "clusterlm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "clusterlm/stats.hpp"
#include "clusterlm/version.hpp"

namespace clusterlm {

namespace {

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string ordash(bool present, const std::string& s) {
  return present ? s : std::string("-");
}

std::string path_or_dash(const std::string& p) { return p.empty() ? "-" : p; }

void validate(const ExperimentConfig& c) {
  if (c.k_values.empty()) throw std::invalid_argument("no K values");
  for (int k : c.k_values)
    if (k < 1) throw std::invalid_argument("K values must be >= 1");
  if (c.runs_per_k < 1) throw std::invalid_argument("runs_per_k must be >= 1");
  if (c.mode == EventMode::ngram) {
    if (c.corpus_path.empty()) throw std::invalid_argument("ngram mode needs a corpus");
    if (c.order < 1) throw std::invalid_argument("order must be >= 1");
  } else {
    if (c.rule_path.empty()) throw std::invalid_argument("rule mode needs a rule file");
    if (c.order != 1 && c.order != 2)
      throw std::invalid_argument("rule order must be 1 or 2");
    if (!c.nbest_path.empty() && c.hyp_rules_path.empty())
      throw std::invalid_argument(
          "rule-mode rescoring needs hypothesis analyses (--hyp-rules)");
  }
}

struct LoadedData {
  std::vector<EventSequence> sequences;
  std::size_t total_events = 0;
  std::vector<NBestList> lists;
  HypAnalyses analyses;
  bool has_analyses = false;
};

LoadedData load_inputs(const ExperimentConfig& c) {
  LoadedData d;
  ClassMap map;
  if (!c.class_map_path.empty()) map = load_class_map_file(c.class_map_path);
  if (c.mode == EventMode::ngram) {
    const Corpus corpus = load_corpus_file(c.corpus_path, map, c.corpus_has_ids);
    d.sequences = extract_corpus_events(corpus, c.order);
  } else {
    d.sequences = load_rule_events_file(c.rule_path, c.order);
    if (d.sequences.empty()) throw std::runtime_error(c.rule_path + ": empty corpus");
  }
  for (const auto& es : d.sequences) d.total_events += es.n_events();
  if (!c.nbest_path.empty()) {
    d.lists = load_nbest_file(c.nbest_path, map, c.nbest_limit);
    if (d.lists.empty()) throw std::runtime_error(c.nbest_path + ": no lists");
    if (!c.hyp_rules_path.empty()) {
      d.analyses = load_hypothesis_analyses_file(c.hyp_rules_path, c.order);
      d.has_analyses = true;
    }
  }
  return d;
}

Clustering trivial_clustering(const std::vector<EventSequence>& sequences) {
  Clustering c;
  c.k = 1;
  for (const auto& es : sequences) {
    c.ids.push_back(es.sentence_id);
    c.assignment.push_back(0);
  }
  CountTable t;
  for (const auto& es : sequences) t.add(es);
  c.total_entropy_bits = t.entropy_bits();
  return c;
}

EvalResult run_eval(const ClusterModel& m, const LoadedData& d,
                    const ExperimentConfig& c) {
  return d.has_analyses ? evaluate(m, d.lists, d.analyses, c.normalization)
                        : evaluate(m, d.lists, c.normalization);
}

// Training-set mixture log likelihood in bits (the soft P_K quantity the
// greedy pass does not itself track).
double mixture_bits(const ClusterModel& m,
                    const std::vector<EventSequence>& sequences) {
  double lp = 0;
  for (const auto& es : sequences) lp += mixture_score(m, es).lp;
  return -lp;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const ClusteringSink& sink) {
  validate(config);
  const LoadedData data = load_inputs(config);

  ExperimentReport report;
  report.config = config;
  report.version = kVersionString;
  report.n_sequences = data.sequences.size();
  report.total_events = data.total_events;
  report.has_eval = !data.lists.empty();

  const ModelMeta meta{config.mode, config.order};
  const double events = static_cast<double>(data.total_events);

  // Unclustered reference: per-item entropy and per-list correctness.
  const Clustering base = trivial_clustering(data.sequences);
  report.k1_per_item_entropy_bits = base.total_entropy_bits / events;
  const ClusterModel base_model = train_model(base, data.sequences, meta, config.prior);
  EvalResult base_eval;
  if (report.has_eval) {
    base_eval = run_eval(base_model, data, config);
    report.n_lists = base_eval.n_lists;
    report.n_evaluable = base_eval.n_evaluable;
    report.baseline_percent = base_eval.baseline_percent;
  }

  std::map<int, std::vector<double>> accuracies_by_k;
  for (int k : config.k_values) {
    for (int run = 0; run < config.runs_per_k; ++run) {
      const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(run);
      Clustering clustering = incremental_cluster(data.sequences, k, seed);
      if (config.reassign_enabled)
        clustering = reassign(clustering, data.sequences,
                              {config.max_rounds, config.leave_one_out});
      clustering.mode = config.mode;
      clustering.order = config.order;
      const ClusterModel model =
          train_model(clustering, data.sequences, meta, config.prior);

      RunRow row;
      row.k = k;
      row.run = run;
      row.seed = seed;
      row.total_entropy_bits = clustering.total_entropy_bits;
      row.per_item_entropy_bits = clustering.total_entropy_bits / events;
      row.mixture_per_item_entropy_bits = mixture_bits(model, data.sequences) / events;
      row.reduction_vs_k1_percent =
          report.k1_per_item_entropy_bits > 0
              ? 100.0 * (1.0 - row.per_item_entropy_bits /
                                   report.k1_per_item_entropy_bits)
              : 0.0;
      row.fixed_point = clustering.fixed_point;
      row.rounds = clustering.rounds;

      if (report.has_eval) {
        const EvalResult eval = run_eval(model, data, config);
        row.has_accuracy = true;
        row.accuracy_percent = eval.accuracy_percent;
        accuracies_by_k[k].push_back(eval.accuracy_percent);
        PairedOutcome po;
        for (std::size_t i = 0; i < eval.lists.size(); ++i) {
          if (!eval.lists[i].evaluable) continue;
          const bool before = base_eval.lists[i].selection.correct;
          const bool after = eval.lists[i].selection.correct;
          if (!before && after) ++po.improved;
          if (before && !after) ++po.worsened;
        }
        if (po.improved + po.worsened > 0) {
          row.has_mcnemar = true;
          row.improved = po.improved;
          row.worsened = po.worsened;
          row.mcnemar_p = mcnemar(po);
        }
      }
      if (sink) sink(k, run, clustering);
      report.rows.push_back(row);
    }
  }

  for (int k : config.k_values) {
    KSummary s;
    s.k = k;
    double acc = 0, ent = 0, red = 0;
    int n = 0;
    for (const RunRow& row : report.rows) {
      if (row.k != k) continue;
      acc += row.accuracy_percent;
      ent += row.per_item_entropy_bits;
      red += row.reduction_vs_k1_percent;
      ++n;
    }
    s.mean_accuracy_percent = report.has_eval ? acc / n : 0.0;
    s.mean_per_item_entropy_bits = ent / n;
    s.mean_reduction_percent = red / n;
    report.summaries.push_back(s);
  }

  for (const auto& [k1, k2] : config.wmw_pairs) {
    auto a = accuracies_by_k.find(k1);
    auto b = accuracies_by_k.find(k2);
    if (a == accuracies_by_k.end() || b == accuracies_by_k.end())
      throw std::invalid_argument("wmw pair references a K not in the sweep");
    const RankTestResult r = wilcoxon_mann_whitney(a->second, b->second);
    report.wmw.push_back({k1, k2, r.u, r.p, r.exact});
  }
  return report;
}

namespace {

void render_header(std::ostringstream& out, const ExperimentReport& r) {
  const ExperimentConfig& c = r.config;
  out << "# clusterlm experiment report\n";
  out << "# version " << r.version << "\n";
  out << "# mode " << to_string(c.mode) << "\n";
  out << "# order " << c.order << "\n";
  out << "# k_values";
  for (int k : c.k_values) out << ' ' << k;
  out << "\n";
  out << "# runs_per_k " << c.runs_per_k << "\n";
  out << "# base_seed " << c.base_seed << "\n";
  out << "# corpus " << path_or_dash(c.corpus_path) << "\n";
  out << "# class_map " << path_or_dash(c.class_map_path) << "\n";
  out << "# rules " << path_or_dash(c.rule_path) << "\n";
  out << "# nbest " << path_or_dash(c.nbest_path) << "\n";
  out << "# hyp_rules " << path_or_dash(c.hyp_rules_path) << "\n";
  out << "# corpus_has_ids " << (c.corpus_has_ids ? 1 : 0) << "\n";
  out << "# prior " << to_string(c.prior) << "\n";
  out << "# leave_one_out " << (c.leave_one_out ? 1 : 0) << "\n";
  out << "# normalization " << to_string(c.normalization) << "\n";
  out << "# reassign " << (c.reassign_enabled ? 1 : 0) << "\n";
  out << "# max_rounds " << c.max_rounds << "\n";
  out << "# nbest_limit " << c.nbest_limit << "\n";
  out << "# wmw_pairs";
  for (const auto& [k1, k2] : c.wmw_pairs) out << ' ' << k1 << ':' << k2;
  out << "\n";
  for (const auto& note : c.notes) out << "# note " << note << "\n";
  out << "# n_sequences " << r.n_sequences << "\n";
  out << "# total_events " << r.total_events << "\n";
  out << "# k1_per_item_entropy_bits "
      << fmt("%.9f", r.k1_per_item_entropy_bits) << "\n";
  if (r.has_eval) {
    out << "# n_lists " << r.n_lists << "\n";
    out << "# n_evaluable " << r.n_evaluable << "\n";
    out << "# baseline_percent " << fmt("%.6f", r.baseline_percent) << "\n";
  }
}

}  // namespace

std::string render_report_tsv(const ExperimentReport& r) {
  std::ostringstream out;
  render_header(out, r);
  out << "[runs]\n";
  out << "k\trun\tseed\ttotal_entropy_bits\tper_item_entropy_bits"
         "\tmixture_per_item_entropy_bits\treduction_vs_k1_percent"
         "\tfixed_point\trounds\taccuracy_percent\timproved\tworsened"
         "\tmcnemar_p\n";
  for (const RunRow& row : r.rows) {
    out << row.k << '\t' << row.run << '\t' << row.seed << '\t'
        << fmt("%.9f", row.total_entropy_bits) << '\t'
        << fmt("%.9f", row.per_item_entropy_bits) << '\t'
        << fmt("%.9f", row.mixture_per_item_entropy_bits) << '\t'
        << fmt("%.6f", row.reduction_vs_k1_percent) << '\t'
        << (row.fixed_point ? 1 : 0) << '\t' << row.rounds << '\t'
        << ordash(row.has_accuracy, fmt("%.6f", row.accuracy_percent)) << '\t'
        << ordash(row.has_mcnemar, std::to_string(row.improved)) << '\t'
        << ordash(row.has_mcnemar, std::to_string(row.worsened)) << '\t'
        << ordash(row.has_mcnemar, fmt("%.9g", row.mcnemar_p)) << '\n';
  }
  out << "[k_summary]\n";
  out << "k\tmean_accuracy_percent\tmean_per_item_entropy_bits"
         "\tmean_reduction_percent\n";
  for (const KSummary& s : r.summaries) {
    out << s.k << '\t'
        << ordash(r.has_eval, fmt("%.6f", s.mean_accuracy_percent)) << '\t'
        << fmt("%.9f", s.mean_per_item_entropy_bits) << '\t'
        << fmt("%.6f", s.mean_reduction_percent) << '\n';
  }
  if (!r.wmw.empty()) {
    out << "[wmw]\n";
    out << "k1\tk2\tu\tp\texact\n";
    for (const WmwRow& w : r.wmw)
      out << w.k1 << '\t' << w.k2 << '\t' << fmt("%.6f", w.u) << '\t'
          << fmt("%.9g", w.p) << '\t' << (w.exact ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string render_report_text(const ExperimentReport& r) {
  std::ostringstream out;
  render_header(out, r);
  out << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%4s %4s %10s %12s %12s %10s %6s %9s %10s\n",
                "K", "run", "entropy/it", "mixture/it", "reduction%",
                "accuracy%", "fixed", "impr/wors", "mcnemar_p");
  out << line;
  for (const RunRow& row : r.rows) {
    std::string pair = row.has_mcnemar
                           ? std::to_string(row.improved) + "/" +
                                 std::to_string(row.worsened)
                           : "-";
    std::snprintf(line, sizeof line,
                  "%4d %4d %10.4f %12.4f %12.2f %10s %6s %9s %10s\n", row.k,
                  row.run, row.per_item_entropy_bits,
                  row.mixture_per_item_entropy_bits,
                  row.reduction_vs_k1_percent,
                  ordash(row.has_accuracy, fmt("%.2f", row.accuracy_percent)).c_str(),
                  row.fixed_point ? "yes" : "no", pair.c_str(),
                  ordash(row.has_mcnemar, fmt("%.4g", row.mcnemar_p)).c_str());
    out << line;
  }
  out << "\n";
  std::snprintf(line, sizeof line, "%4s %14s %14s %12s\n", "K", "mean acc%",
                "mean entropy", "mean red%");
  out << line;
  for (const KSummary& s : r.summaries) {
    std::snprintf(line, sizeof line, "%4d %14s %14.4f %12.2f\n", s.k,
                  ordash(r.has_eval, fmt("%.2f", s.mean_accuracy_percent)).c_str(),
                  s.mean_per_item_entropy_bits, s.mean_reduction_percent);
    out << line;
  }
  if (r.has_eval) {
    std::snprintf(line, sizeof line, "\nbaseline %.2f%% over %zu evaluable lists\n",
                  r.baseline_percent, r.n_evaluable);
    out << line;
  }
  for (const WmwRow& w : r.wmw) {
    std::snprintf(line, sizeof line,
                  "wilcoxon-mann-whitney K=%d vs K=%d: U=%.1f p=%.4g%s\n", w.k1,
                  w.k2, w.u, w.p, w.exact ? " (exact)" : "");
    out << line;
  }
  return out.str();
}

std::string render_eval_tsv(const ExperimentConfig& config,
                            const EvalResult& eval) {
  std::ostringstream out;
  out << "# clusterlm rescore report\n";
  out << "# version " << kVersionString << "\n";
  out << "# mode " << to_string(config.mode) << "\n";
  out << "# order " << config.order << "\n";
  out << "# normalization " << to_string(config.normalization) << "\n";
  out << "# accuracy_percent " << fmt("%.6f", eval.accuracy_percent) << "\n";
  out << "# baseline_percent " << fmt("%.6f", eval.baseline_percent) << "\n";
  out << "# n_lists " << eval.n_lists << "\n";
  out << "# n_evaluable " << eval.n_evaluable << "\n";
  out << "# n_excluded " << eval.n_excluded << "\n";
  out << "id\tevaluable\tn_candidates\tchosen_index\tcorrect\tnorm_lp"
         "\tnorm_failures\n";
  for (const ListResult& l : eval.lists) {
    out << l.id << '\t' << (l.evaluable ? 1 : 0) << '\t' << l.n_candidates;
    if (l.evaluable) {
      const NormalizedScore& s = l.selection.scores[l.selection.chosen_index];
      out << '\t' << l.selection.chosen_index << '\t'
          << (l.selection.correct ? 1 : 0) << '\t' << fmt("%.9f", s.lp) << '\t'
          << fmt("%.9f", s.failures);
    } else {
      out << "\t-\t-\t-\t-";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace clusterlm
