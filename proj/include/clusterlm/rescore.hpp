#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "clusterlm/scoring.hpp"

namespace clusterlm {

struct NBestList {
  std::string id;
  std::vector<std::string> reference;
  std::vector<std::vector<std::string>> hypotheses;

  // Evaluable lists carry their reference among the hypotheses.
  bool has_reference() const;
};

NBestList truncate_list(const NBestList& l, std::size_t limit = 10);

struct SelectionResult {
  std::size_t chosen_index = 0;
  bool correct = false;
  std::vector<NormalizedScore> scores;  // parallel to hypotheses
  std::vector<bool> scored;             // false = excluded from selection
};

// Scores every hypothesis with the mixture model, normalizes by its own
// event count, and picks the argmax; ties go to the earliest position.
SelectionResult select_hypothesis(const ClusterModel& m, const NBestList& l,
                                  Normalization norm = Normalization::lp_and_f);

// Caller-supplied event sequences (rule mode); null entries are excluded.
SelectionResult select_hypothesis(const ClusterModel& m, const NBestList& l,
                                  const std::vector<const EventSequence*>& events,
                                  Normalization norm = Normalization::lp_and_f);

struct ListResult {
  std::string id;
  bool evaluable = false;
  std::size_t n_candidates = 0;  // hypotheses that could be scored
  SelectionResult selection;     // meaningful only when evaluable
};

struct EvalResult {
  double accuracy_percent = 0;
  double baseline_percent = 0;  // over evaluable lists, candidate counts
  std::size_t n_lists = 0;
  std::size_t n_evaluable = 0;
  std::size_t n_excluded = 0;
  std::size_t n_correct = 0;
  std::vector<ListResult> lists;
};

EvalResult evaluate(const ClusterModel& m, const std::vector<NBestList>& lists,
                    Normalization norm = Normalization::lp_and_f);

// Rule-mode analyses keyed by "<list id>#<hypothesis index>". Hypotheses
// without an analysis are excluded, mirroring the removal of unanalysable
// hypotheses from the test lists.
using HypAnalyses = std::unordered_map<std::string, EventSequence>;

EvalResult evaluate(const ClusterModel& m, const std::vector<NBestList>& lists,
                    const HypAnalyses& analyses,
                    Normalization norm = Normalization::lp_and_f);

// Expected accuracy of a uniform random choice: mean of 100/len.
double baseline(const std::vector<NBestList>& lists);

// One record per line: id <TAB> reference <TAB> hyp1 <TAB> hyp2 ...
std::vector<NBestList> load_nbest(std::istream& in, const ClassMap& map = {},
                                  std::size_t truncate_limit = 10,
                                  const std::string& filename = "<nbest>");
std::vector<NBestList> load_nbest_file(const std::string& path,
                                       const ClassMap& map = {},
                                       std::size_t truncate_limit = 10);

HypAnalyses load_hypothesis_analyses(std::istream& in, int order,
                                     const std::string& filename = "<analyses>");
HypAnalyses load_hypothesis_analyses_file(const std::string& path, int order);

}  // namespace clusterlm
