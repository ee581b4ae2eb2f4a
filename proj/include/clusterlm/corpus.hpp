#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <vector>

namespace clusterlm {

// Reserved boundary markers; never part of a corpus vocabulary.
inline constexpr const char* kStartMarker = "<s>";
inline constexpr const char* kEndMarker = "</s>";

enum class EventMode { ngram, rule };

std::string to_string(EventMode mode);
EventMode event_mode_from_string(const std::string& s);

struct ClassRule {
  std::vector<std::string> pattern;  // 1..j literal tokens
  std::string class_name;
};

// Ordered token rewrite rules. Matching is left-to-right, longest match
// first, earlier rule wins on equal length.
struct ClassMap {
  std::vector<ClassRule> rules;
  bool empty() const { return rules.empty(); }
};

struct Sentence {
  std::string id;
  std::vector<std::string> items;  // post-substitution tokens, non-empty
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::unordered_set<std::string> vocabulary;
  std::size_t total_items = 0;
};

// One counted occurrence: `item` in `context`. The context is the
// space-joined conditioning tuple; "" means no context (unigram, 1-rule).
struct Event {
  std::string context;
  std::string item;

  bool operator==(const Event& o) const {
    return context == o.context && item == o.item;
  }
};

struct EventSequence {
  std::string sentence_id;
  std::vector<Event> events;

  std::size_t n_events() const { return events.size(); }
};

std::string join_context(const std::vector<std::string>& tokens,
                         std::size_t begin, std::size_t end);

std::vector<std::string> apply_class_map(const std::vector<std::string>& tokens,
                                         const ClassMap& map);

ClassMap load_class_map(std::istream& in,
                        const std::string& filename = "<class map>");
ClassMap load_class_map_file(const std::string& path);

// One sentence per non-blank line. When `has_ids` is set the first token of
// each line is the sentence id; otherwise ids are 1-based line ordinals.
Corpus load_corpus(std::istream& in, const ClassMap& map = {},
                   bool has_ids = false,
                   std::vector<std::string>* warnings = nullptr,
                   const std::string& filename = "<corpus>");
Corpus load_corpus_file(const std::string& path, const ClassMap& map = {},
                        bool has_ids = false,
                        std::vector<std::string>* warnings = nullptr);

// One event per token plus one end-marker event; contexts are the previous
// order-1 tokens, left-padded with start markers.
EventSequence extract_ngram_events(const Sentence& s, int order);
std::vector<EventSequence> extract_corpus_events(const Corpus& c, int order);

// Rule-analysis lines: sentence id followed by space-separated
// `parent>rule` pairs. Order 1 discards parents; order 2 keeps them.
std::vector<EventSequence> load_rule_events(
    std::istream& in, int order, std::vector<std::string>* warnings = nullptr,
    const std::string& filename = "<rule file>");
std::vector<EventSequence> load_rule_events_file(
    const std::string& path, int order,
    std::vector<std::string>* warnings = nullptr);

}  // namespace clusterlm
