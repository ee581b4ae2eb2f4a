#include "clusterlm/corpus.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace clusterlm {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] void fail_at(const std::string& filename, std::size_t lineno,
                          const std::string& what) {
  throw std::runtime_error(filename + ":" + std::to_string(lineno) + ": " +
                           what);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

}  // namespace

std::string to_string(EventMode mode) {
  return mode == EventMode::ngram ? "ngram" : "rule";
}

EventMode event_mode_from_string(const std::string& s) {
  if (s == "ngram") return EventMode::ngram;
  if (s == "rule") return EventMode::rule;
  throw std::runtime_error("unknown event mode: " + s);
}

std::string join_context(const std::vector<std::string>& tokens,
                         std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> apply_class_map(const std::vector<std::string>& tokens,
                                         const ClassMap& map) {
  if (map.empty()) return tokens;
  std::vector<std::string> out;
  out.reserve(tokens.size());
  std::size_t i = 0;
  while (i < tokens.size()) {
    const ClassRule* best = nullptr;
    std::size_t best_len = 0;
    for (const ClassRule& rule : map.rules) {
      const std::size_t len = rule.pattern.size();
      if (len <= best_len || i + len > tokens.size()) continue;
      bool match = true;
      for (std::size_t j = 0; j < len; ++j) {
        if (tokens[i + j] != rule.pattern[j]) {
          match = false;
          break;
        }
      }
      if (match) {
        best = &rule;
        best_len = len;
      }
    }
    if (best) {
      out.push_back(best->class_name);
      i += best_len;
    } else {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  return out;
}

ClassMap load_class_map(std::istream& in, const std::string& filename) {
  ClassMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() < 2)
      fail_at(filename, lineno, "expected pattern and class name");
    ClassRule rule;
    rule.class_name = fields.back();
    for (std::size_t i = 0; i + 1 < fields.size(); ++i) {
      for (auto& tok : split_ws(fields[i])) rule.pattern.push_back(tok);
    }
    if (rule.pattern.empty()) fail_at(filename, lineno, "empty pattern");
    if (rule.class_name.empty() || split_ws(rule.class_name).size() != 1)
      fail_at(filename, lineno, "class name must be a single token");
    map.rules.push_back(std::move(rule));
  }
  return map;
}

ClassMap load_class_map_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_class_map(in, path);
}

Corpus load_corpus(std::istream& in, const ClassMap& map, bool has_ids,
                   std::vector<std::string>* warnings,
                   const std::string& filename) {
  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tokens = split_ws(line);
    Sentence s;
    if (has_ids && !tokens.empty()) {
      s.id = tokens.front();
      tokens.erase(tokens.begin());
    } else {
      s.id = std::to_string(lineno);
    }
    if (tokens.empty()) {
      if (warnings)
        warnings->push_back(filename + ":" + std::to_string(lineno) +
                            ": skipped line with no tokens");
      continue;
    }
    if (!seen_ids.insert(s.id).second)
      fail_at(filename, lineno, "duplicate sentence id: " + s.id);
    s.items = apply_class_map(tokens, map);
    corpus.total_items += s.items.size();
    for (const auto& item : s.items) corpus.vocabulary.insert(item);
    corpus.sentences.push_back(std::move(s));
  }
  if (corpus.sentences.empty())
    throw std::runtime_error(filename + ": empty corpus");
  return corpus;
}

Corpus load_corpus_file(const std::string& path, const ClassMap& map,
                        bool has_ids, std::vector<std::string>* warnings) {
  auto in = open_or_throw(path);
  return load_corpus(in, map, has_ids, warnings, path);
}

EventSequence extract_ngram_events(const Sentence& s, int order) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  const std::size_t ctx_len = static_cast<std::size_t>(order) - 1;
  // Padded token stream: order-1 start markers, the items, one end marker.
  std::vector<std::string> padded;
  padded.reserve(ctx_len + s.items.size() + 1);
  padded.insert(padded.end(), ctx_len, kStartMarker);
  padded.insert(padded.end(), s.items.begin(), s.items.end());
  padded.push_back(kEndMarker);

  EventSequence es;
  es.sentence_id = s.id;
  es.events.reserve(s.items.size() + 1);
  for (std::size_t i = ctx_len; i < padded.size(); ++i) {
    es.events.push_back({join_context(padded, i - ctx_len, i), padded[i]});
  }
  return es;
}

std::vector<EventSequence> extract_corpus_events(const Corpus& c, int order) {
  std::vector<EventSequence> out;
  out.reserve(c.sentences.size());
  for (const auto& s : c.sentences) out.push_back(extract_ngram_events(s, order));
  return out;
}

std::vector<EventSequence> load_rule_events(std::istream& in, int order,
                                            std::vector<std::string>* warnings,
                                            const std::string& filename) {
  if (order != 1 && order != 2)
    throw std::invalid_argument("rule order must be 1 or 2");
  std::vector<EventSequence> out;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    EventSequence es;
    es.sentence_id = tokens.front();
    if (tokens.size() == 1) {
      if (warnings)
        warnings->push_back(filename + ":" + std::to_string(lineno) +
                            ": skipped line with no rule pairs");
      continue;
    }
    if (!seen_ids.insert(es.sentence_id).second)
      fail_at(filename, lineno, "duplicate sentence id: " + es.sentence_id);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      auto sep = tokens[i].find('>');
      if (sep == std::string::npos || sep == 0 || sep + 1 == tokens[i].size())
        fail_at(filename, lineno, "malformed parent>rule pair: " + tokens[i]);
      Event e;
      e.item = tokens[i].substr(sep + 1);
      if (order == 2) e.context = tokens[i].substr(0, sep);
      es.events.push_back(std::move(e));
    }
    out.push_back(std::move(es));
  }
  return out;
}

std::vector<EventSequence> load_rule_events_file(
    const std::string& path, int order, std::vector<std::string>* warnings) {
  auto in = open_or_throw(path);
  return load_rule_events(in, order, warnings, path);
}

}  // namespace clusterlm
