#include "clusterlm/rescore.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace clusterlm {

namespace {

std::vector<std::string> split_ws(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

NormalizedScore as_selection_score(const Score& s, std::size_t n_events,
                                   Normalization norm) {
  switch (norm) {
    case Normalization::lp_and_f:
      return normalize_by_length(s, n_events);
    case Normalization::lp_only:
      return {s.lp / static_cast<double>(n_events),
              static_cast<double>(s.failures)};
    default:
      return {s.lp, static_cast<double>(s.failures)};
  }
}

SelectionResult select_scored(const NBestList& l,
                              const std::vector<NormalizedScore>& scores,
                              const std::vector<bool>& scored) {
  SelectionResult r;
  r.scores = scores;
  r.scored = scored;
  bool any = false;
  for (std::size_t i = 0; i < l.hypotheses.size(); ++i) {
    if (!scored[i]) continue;
    if (!any || normalized_less(r.scores[r.chosen_index], scores[i])) {
      r.chosen_index = i;
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("no scorable hypothesis in list " + l.id);
  r.correct = l.hypotheses[r.chosen_index] == l.reference;
  return r;
}

}  // namespace

bool NBestList::has_reference() const {
  return std::find(hypotheses.begin(), hypotheses.end(), reference) !=
         hypotheses.end();
}

NBestList truncate_list(const NBestList& l, std::size_t limit) {
  if (limit < 1) throw std::invalid_argument("limit must be >= 1");
  NBestList out = l;
  if (out.hypotheses.size() > limit) out.hypotheses.resize(limit);
  return out;
}

SelectionResult select_hypothesis(const ClusterModel& m, const NBestList& l,
                                  Normalization norm) {
  if (l.hypotheses.empty())
    throw std::invalid_argument("empty hypothesis list " + l.id);
  if (m.meta.mode != EventMode::ngram)
    throw std::invalid_argument(
        "model mode mismatch: token hypotheses need an ngram model");
  std::vector<NormalizedScore> scores(l.hypotheses.size());
  std::vector<bool> scored(l.hypotheses.size(), true);
  for (std::size_t i = 0; i < l.hypotheses.size(); ++i) {
    Sentence hyp{l.id + "#" + std::to_string(i), l.hypotheses[i]};
    const EventSequence es = extract_ngram_events(hyp, m.meta.order);
    scores[i] = as_selection_score(mixture_score(m, es), es.n_events(), norm);
  }
  return select_scored(l, scores, scored);
}

SelectionResult select_hypothesis(const ClusterModel& m, const NBestList& l,
                                  const std::vector<const EventSequence*>& events,
                                  Normalization norm) {
  if (l.hypotheses.empty())
    throw std::invalid_argument("empty hypothesis list " + l.id);
  if (events.size() != l.hypotheses.size())
    throw std::invalid_argument("hypothesis events size mismatch in list " + l.id);
  std::vector<NormalizedScore> scores(l.hypotheses.size());
  std::vector<bool> scored(l.hypotheses.size(), false);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!events[i] || events[i]->events.empty()) continue;
    scores[i] =
        as_selection_score(mixture_score(m, *events[i]), events[i]->n_events(), norm);
    scored[i] = true;
  }
  return select_scored(l, scores, scored);
}

namespace {

EvalResult evaluate_impl(const ClusterModel& m,
                         const std::vector<NBestList>& lists,
                         const HypAnalyses* analyses, Normalization norm) {
  if (lists.empty()) throw std::invalid_argument("no hypothesis lists");
  EvalResult r;
  r.n_lists = lists.size();
  double baseline_sum = 0;
  for (const NBestList& l : lists) {
    ListResult lr;
    lr.id = l.id;
    std::vector<const EventSequence*> events;
    std::vector<EventSequence> storage;
    bool ref_scorable = false;
    if (analyses) {
      storage.reserve(l.hypotheses.size());
      for (std::size_t i = 0; i < l.hypotheses.size(); ++i) {
        auto it = analyses->find(l.id + "#" + std::to_string(i));
        if (it == analyses->end()) {
          storage.push_back({});
          continue;
        }
        storage.push_back(it->second);
      }
      for (std::size_t i = 0; i < storage.size(); ++i) {
        const bool ok = !storage[i].events.empty();
        events.push_back(ok ? &storage[i] : nullptr);
        if (ok) {
          ++lr.n_candidates;
          if (l.hypotheses[i] == l.reference) ref_scorable = true;
        }
      }
    } else {
      lr.n_candidates = l.hypotheses.size();
      ref_scorable = l.has_reference();
    }
    lr.evaluable = ref_scorable && lr.n_candidates > 0;
    if (lr.evaluable) {
      lr.selection = analyses ? select_hypothesis(m, l, events, norm)
                              : select_hypothesis(m, l, norm);
      ++r.n_evaluable;
      if (lr.selection.correct) ++r.n_correct;
      baseline_sum += 100.0 / static_cast<double>(lr.n_candidates);
    } else {
      ++r.n_excluded;
    }
    r.lists.push_back(std::move(lr));
  }
  if (r.n_evaluable > 0) {
    r.accuracy_percent = 100.0 * static_cast<double>(r.n_correct) /
                         static_cast<double>(r.n_evaluable);
    r.baseline_percent = baseline_sum / static_cast<double>(r.n_evaluable);
  }
  return r;
}

}  // namespace

EvalResult evaluate(const ClusterModel& m, const std::vector<NBestList>& lists,
                    Normalization norm) {
  return evaluate_impl(m, lists, nullptr, norm);
}

EvalResult evaluate(const ClusterModel& m, const std::vector<NBestList>& lists,
                    const HypAnalyses& analyses, Normalization norm) {
  return evaluate_impl(m, lists, &analyses, norm);
}

double baseline(const std::vector<NBestList>& lists) {
  if (lists.empty()) throw std::invalid_argument("no hypothesis lists");
  double sum = 0;
  for (const NBestList& l : lists) {
    if (l.hypotheses.empty())
      throw std::invalid_argument("empty hypothesis list " + l.id);
    sum += 100.0 / static_cast<double>(l.hypotheses.size());
  }
  return sum / static_cast<double>(lists.size());
}

std::vector<NBestList> load_nbest(std::istream& in, const ClassMap& map,
                                  std::size_t truncate_limit,
                                  const std::string& filename) {
  std::vector<NBestList> lists;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    auto fail = [&](const std::string& what) -> void {
      throw std::runtime_error(filename + ":" + std::to_string(lineno) + ": " +
                               what);
    };
    if (fields.size() < 3) fail("expected id, reference and hypotheses");
    NBestList l;
    l.id = fields[0];
    if (l.id.empty()) fail("empty list id");
    if (!seen_ids.insert(l.id).second) fail("duplicate list id: " + l.id);
    l.reference = apply_class_map(split_ws(fields[1]), map);
    if (l.reference.empty()) fail("empty reference");
    for (std::size_t i = 2; i < fields.size(); ++i) {
      auto tokens = apply_class_map(split_ws(fields[i]), map);
      if (tokens.empty()) fail("empty hypothesis field");
      l.hypotheses.push_back(std::move(tokens));
    }
    lists.push_back(truncate_list(l, truncate_limit));
  }
  return lists;
}

std::vector<NBestList> load_nbest_file(const std::string& path,
                                       const ClassMap& map,
                                       std::size_t truncate_limit) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_nbest(in, map, truncate_limit, path);
}

HypAnalyses load_hypothesis_analyses(std::istream& in, int order,
                                     const std::string& filename) {
  HypAnalyses out;
  for (auto& es : load_rule_events(in, order, nullptr, filename)) {
    auto id = es.sentence_id;
    if (!out.emplace(std::move(id), std::move(es)).second)
      throw std::runtime_error(filename + ": duplicate hypothesis analysis id");
  }
  return out;
}

HypAnalyses load_hypothesis_analyses_file(const std::string& path, int order) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_hypothesis_analyses(in, order, path);
}

}  // namespace clusterlm
