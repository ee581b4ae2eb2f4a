#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clusterlm/experiment.hpp"
#include "clusterlm/selfcheck.hpp"
#include "clusterlm/version.hpp"

namespace {

using namespace clusterlm;

struct CommonArgs {
  std::string mode = "ngram";
  std::string prior = "sentences";
  std::string normalization = "lp+f";
  std::vector<int> k_values = {1};
  std::vector<std::string> wmw;
  ExperimentConfig config;
};

void add_data_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--mode", args.mode, "Event mode: ngram or rule")
      ->check(CLI::IsMember({"ngram", "rule"}));
  cmd->add_option("--order", args.config.order,
                  "Model order (N for N-grams; 1 or 2 for rules)");
  cmd->add_option("--corpus", args.config.corpus_path,
                  "Corpus file, one sentence per line");
  cmd->add_flag("--corpus-ids", args.config.corpus_has_ids,
                "First token of each corpus line is the sentence id");
  cmd->add_option("--class-map", args.config.class_map_path,
                  "Tab-separated class substitution rules");
  cmd->add_option("--rules", args.config.rule_path,
                  "Rule-analysis file (rule mode)");
}

void add_sweep_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--k", args.k_values, "Cluster counts to sweep")
      ->delimiter(',');
  cmd->add_option("--runs", args.config.runs_per_k,
                  "Random presentation orders per K");
  cmd->add_option("--seed", args.config.base_seed,
                  "Base seed; run r uses base_seed + r");
  cmd->add_flag("!--no-reassign", args.config.reassign_enabled,
                "Skip the reassignment pass");
  cmd->add_option("--max-rounds", args.config.max_rounds,
                  "Reassignment round limit");
  cmd->add_flag("--leave-one-out", args.config.leave_one_out,
                "Score a sentence against its own cluster minus itself");
  cmd->add_option("--prior", args.prior, "Cluster prior weights")
      ->check(CLI::IsMember({"sentences", "words"}));
}

void add_rescore_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--nbest", args.config.nbest_path,
                  "N-best file: id<TAB>reference<TAB>hyp1<TAB>hyp2...");
  cmd->add_option("--hyp-rules", args.config.hyp_rules_path,
                  "Rule analyses for hypotheses, ids `<list>#<index>`");
  cmd->add_option("--limit", args.config.nbest_limit,
                  "Keep only the top hypotheses of each list");
  cmd->add_option("--normalization", args.normalization,
                  "Length normalization: lp+f, lp or none")
      ->check(CLI::IsMember({"lp+f", "lp", "none"}));
}

ExperimentConfig finish_config(CommonArgs& args) {
  args.config.mode = event_mode_from_string(args.mode);
  args.config.prior = prior_kind_from_string(args.prior);
  args.config.normalization = normalization_from_string(args.normalization);
  args.config.k_values = args.k_values;
  for (const std::string& pair : args.wmw) {
    auto colon = pair.find(':');
    if (colon == std::string::npos)
      throw CLI::ValidationError("--wmw expects K1:K2");
    args.config.wmw_pairs.emplace_back(std::stoi(pair.substr(0, colon)),
                                       std::stoi(pair.substr(colon + 1)));
  }
  return args.config;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

int cmd_cluster(CommonArgs& args, const std::string& out_dir) {
  const ExperimentConfig config = finish_config(args);
  std::filesystem::create_directories(out_dir);
  ClusteringSink sink = [&](int k, int run, const Clustering& c) {
    std::ostringstream name;
    name << "clustering_k" << k << "_run" << run << ".txt";
    save_clustering_file((std::filesystem::path(out_dir) / name.str()).string(), c);
  };
  const ExperimentReport report = run_experiment(config, sink);
  std::cout << render_report_text(report);
  return 0;
}

int cmd_train(CommonArgs& args, const std::string& clustering_path,
              const std::string& out_path) {
  const ExperimentConfig config = finish_config(args);
  ClassMap map;
  if (!config.class_map_path.empty())
    map = load_class_map_file(config.class_map_path);
  std::vector<EventSequence> sequences;
  if (config.mode == EventMode::ngram) {
    const Corpus corpus =
        load_corpus_file(config.corpus_path, map, config.corpus_has_ids);
    sequences = extract_corpus_events(corpus, config.order);
  } else {
    sequences = load_rule_events_file(config.rule_path, config.order);
  }
  const Clustering clustering = load_clustering_file(clustering_path);
  const ClusterModel model = train_model(
      clustering, sequences, {config.mode, config.order}, config.prior);
  save_model_file(out_path, model);
  std::cout << "wrote " << out_path << " (" << model.k() << " clusters)\n";
  return 0;
}

int cmd_rescore(CommonArgs& args, const std::string& model_path,
                const std::string& tsv_path) {
  ExperimentConfig config = finish_config(args);
  const ClusterModel model = load_model_file(model_path);
  config.mode = model.meta.mode;
  config.order = model.meta.order;
  if (config.nbest_path.empty())
    throw std::runtime_error("rescore needs --nbest");
  if (config.mode == EventMode::rule && config.hyp_rules_path.empty())
    throw std::runtime_error(
        "rule-mode rescoring needs hypothesis analyses (--hyp-rules)");
  ClassMap map;
  if (!config.class_map_path.empty())
    map = load_class_map_file(config.class_map_path);
  const auto lists = load_nbest_file(config.nbest_path, map, config.nbest_limit);
  EvalResult eval;
  if (config.mode == EventMode::rule) {
    const HypAnalyses analyses =
        load_hypothesis_analyses_file(config.hyp_rules_path, config.order);
    eval = evaluate(model, lists, analyses, config.normalization);
  } else {
    eval = evaluate(model, lists, config.normalization);
  }
  char line[160];
  std::snprintf(line, sizeof line,
                "accuracy %.2f%% (baseline %.2f%%), %zu/%zu lists evaluable\n",
                eval.accuracy_percent, eval.baseline_percent, eval.n_evaluable,
                eval.n_lists);
  std::cout << line;
  if (!tsv_path.empty()) write_file(tsv_path, render_eval_tsv(config, eval));
  return 0;
}

int cmd_experiment(CommonArgs& args, const std::string& out_path,
                   const std::string& tsv_path) {
  const ExperimentConfig config = finish_config(args);
  const ExperimentReport report = run_experiment(config);
  const std::string text = render_report_text(report);
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
  if (!tsv_path.empty()) write_file(tsv_path, render_report_tsv(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence clustering by entropy minimization, per-cluster "
               "N-gram/rule language models, and N-best selection"};
  app.set_version_flag("--version", clusterlm::kVersionString);
  app.set_config("--config", "",
                 "Config file; options live in a section per subcommand");
  app.require_subcommand(1);

  CommonArgs args;
  std::string out_dir = ".";
  std::string clustering_path, model_path, out_path, tsv_path;

  CLI::App* cluster = app.add_subcommand(
      "cluster", "Cluster a corpus and write one clustering file per (K, run)");
  add_data_options(cluster, args);
  add_sweep_options(cluster, args);
  cluster->add_option("--out-dir", out_dir, "Directory for clustering files");

  CLI::App* train = app.add_subcommand(
      "train", "Train a cluster model from a corpus and a clustering file");
  add_data_options(train, args);
  train->add_option("--prior", args.prior, "Cluster prior weights")
      ->check(CLI::IsMember({"sentences", "words"}));
  train->add_option("--clustering", clustering_path, "Clustering file")
      ->required();
  train->add_option("--out", out_path, "Model file to write")->required();

  CLI::App* rescore = app.add_subcommand(
      "rescore", "Select hypotheses from N-best lists with a trained model");
  rescore->add_option("--model", model_path, "Model file")->required();
  rescore->add_option("--class-map", args.config.class_map_path,
                      "Class substitution rules for the N-best tokens");
  add_rescore_options(rescore, args);
  rescore->add_option("--tsv", tsv_path, "Per-list report file");

  CLI::App* experiment = app.add_subcommand(
      "experiment", "Sweep K over several runs and report the full table");
  add_data_options(experiment, args);
  add_sweep_options(experiment, args);
  add_rescore_options(experiment, args);
  experiment->add_option("--wmw", args.wmw,
                         "Rank-test accuracy samples of two Ks (K1:K2)");
  experiment->add_option("--note", args.config.notes,
                         "Extra header line for the report");
  experiment->add_option("--out", out_path, "Write the text report here");
  experiment->add_option("--tsv", tsv_path, "Write the delimited report here");

  CLI::App* selftest = app.add_subcommand(
      "selftest", "Run the built-in brute-force oracle suites");
  for (CLI::App* sub : {cluster, train, rescore, experiment, selftest})
    sub->fallthrough();  // lets --config appear after the subcommand name

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(cluster)) {
      if (args.k_values.empty()) args.k_values = {1};
      return cmd_cluster(args, out_dir);
    }
    if (app.got_subcommand(train))
      return cmd_train(args, clustering_path, out_path);
    if (app.got_subcommand(rescore))
      return cmd_rescore(args, model_path, tsv_path);
    if (app.got_subcommand(experiment))
      return cmd_experiment(args, out_path, tsv_path);
    if (app.got_subcommand(selftest))
      return clusterlm::run_selftest(std::cout) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
