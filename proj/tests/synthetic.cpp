#include "synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

namespace synth {

namespace {

std::string token(int subpop, const std::string& kind, int i) {
  return "s" + std::to_string(subpop) + kind + std::to_string(i);
}

struct Template {
  // Fixed tokens; a slot index s means "filler position s".
  std::vector<std::string> fixed;  // empty string marks a slot
  std::vector<int> slot_of;        // slot index per position, -1 = fixed
};

struct Subpop {
  std::vector<Template> templates;
  std::vector<std::vector<std::string>> fillers;  // per slot
  std::vector<std::string> vocabulary;
};

std::vector<Subpop> build_subpops(const Spec& spec, std::mt19937_64& gen) {
  std::vector<Subpop> subpops;
  for (int s = 0; s < spec.n_subpops; ++s) {
    Subpop sub;
    for (int slot = 0; slot < spec.slots_per_template; ++slot) {
      std::vector<std::string> fillers;
      for (int f = 0; f < spec.fillers_per_slot; ++f)
        fillers.push_back(token(s, "f" + std::to_string(slot) + "x", f));
      for (const auto& w : fillers) sub.vocabulary.push_back(w);
      sub.fillers.push_back(std::move(fillers));
    }
    for (int t = 0; t < spec.templates_per_subpop; ++t) {
      Template tpl;
      // Slot positions vary per template so unigram sentences differ.
      std::set<int> slot_positions;
      while (static_cast<int>(slot_positions.size()) < spec.slots_per_template)
        slot_positions.insert(1 + static_cast<int>(gen() % (spec.template_len - 1)));
      int next_slot = 0;
      for (int pos = 0; pos < spec.template_len; ++pos) {
        if (slot_positions.count(pos)) {
          tpl.fixed.push_back("");
          tpl.slot_of.push_back(next_slot++ % spec.slots_per_template);
        } else {
          const std::string w = token(s, "t" + std::to_string(t) + "w", pos);
          tpl.fixed.push_back(w);
          tpl.slot_of.push_back(-1);
          sub.vocabulary.push_back(w);
        }
      }
      sub.templates.push_back(std::move(tpl));
    }
    subpops.push_back(std::move(sub));
  }
  return subpops;
}

std::vector<std::string> realize(const Subpop& sub, const Template& tpl,
                                 std::mt19937_64& gen) {
  std::vector<std::string> out;
  out.reserve(tpl.fixed.size());
  for (std::size_t pos = 0; pos < tpl.fixed.size(); ++pos) {
    if (tpl.slot_of[pos] >= 0) {
      const auto& fillers = sub.fillers[static_cast<std::size_t>(tpl.slot_of[pos])];
      out.push_back(fillers[gen() % fillers.size()]);
    } else {
      out.push_back(tpl.fixed[pos]);
    }
  }
  return out;
}

}  // namespace

Data generate(const Spec& spec) {
  std::mt19937_64 gen(spec.seed);
  const auto subpops = build_subpops(spec, gen);

  Data data;
  for (int s = 0; s < spec.n_subpops; ++s) {
    for (int i = 0; i < spec.train_per_subpop; ++i) {
      const Subpop& sub = subpops[static_cast<std::size_t>(s)];
      data.train.push_back(
          realize(sub, sub.templates[gen() % sub.templates.size()], gen));
    }
  }
  std::shuffle(data.train.begin(), data.train.end(), gen);
  for (const auto& s : data.train)
    data.max_sentence_len =
        std::max(data.max_sentence_len, static_cast<int>(s.size()));

  for (int l = 0; l < spec.n_lists; ++l) {
    Data::List list;
    list.id = "u" + std::to_string(l + 1);
    const int home = static_cast<int>(gen() % spec.n_subpops);
    const Subpop& sub = subpops[static_cast<std::size_t>(home)];
    list.reference = realize(sub, sub.templates[gen() % sub.templates.size()], gen);
    data.max_sentence_len =
        std::max(data.max_sentence_len, static_cast<int>(list.reference.size()));

    std::set<std::vector<std::string>> used{list.reference};
    std::vector<std::vector<std::string>> distractors;
    int oov_counter = 0;
    while (static_cast<int>(distractors.size()) < spec.hyps_per_list - 1) {
      std::vector<std::string> hyp = list.reference;
      for (int sub_i = 0; sub_i < spec.substitutions; ++sub_i) {
        const std::size_t pos = gen() % hyp.size();
        if (spec.oov_substitutions) {
          hyp[pos] = "oov" + std::to_string(l) + "x" + std::to_string(oov_counter++);
        } else {
          int other = static_cast<int>(gen() % spec.n_subpops);
          if (other == home) other = (other + 1) % spec.n_subpops;
          const auto& vocab = subpops[static_cast<std::size_t>(other)].vocabulary;
          hyp[pos] = vocab[gen() % vocab.size()];
        }
      }
      if (used.insert(hyp).second) distractors.push_back(std::move(hyp));
    }
    const std::size_t ref_pos =
        (static_cast<std::size_t>(l) * 7) % static_cast<std::size_t>(spec.hyps_per_list);
    for (std::size_t i = 0, d = 0; i < static_cast<std::size_t>(spec.hyps_per_list); ++i) {
      if (i == ref_pos)
        list.hypotheses.push_back(list.reference);
      else
        list.hypotheses.push_back(distractors[d++]);
    }
    data.lists.push_back(std::move(list));
  }

  std::ostringstream params;
  params << "synthetic corpus: subpops=" << spec.n_subpops
         << " templates=" << spec.templates_per_subpop
         << " len=" << spec.template_len << " slots=" << spec.slots_per_template
         << " fillers=" << spec.fillers_per_slot
         << " train_per_subpop=" << spec.train_per_subpop
         << " lists=" << spec.n_lists << " hyps=" << spec.hyps_per_list
         << " substitutions=" << spec.substitutions
         << (spec.oov_substitutions ? " (oov)" : "") << " seed=" << spec.seed;
  data.params = params.str();
  return data;
}

std::string Data::corpus_text() const {
  std::ostringstream out;
  for (const auto& sent : train) {
    for (std::size_t i = 0; i < sent.size(); ++i)
      out << (i ? " " : "") << sent[i];
    out << "\n";
  }
  return out.str();
}

std::string Data::nbest_text() const {
  std::ostringstream out;
  for (const auto& list : lists) {
    out << list.id << '\t';
    for (std::size_t i = 0; i < list.reference.size(); ++i)
      out << (i ? " " : "") << list.reference[i];
    for (const auto& hyp : list.hypotheses) {
      out << '\t';
      for (std::size_t i = 0; i < hyp.size(); ++i) out << (i ? " " : "") << hyp[i];
    }
    out << "\n";
  }
  return out.str();
}

std::vector<std::vector<std::string>> separable_corpus(std::uint64_t seed) {
  const std::vector<std::string> a = {"alpha", "beta", "gamma", "delta"};
  const std::vector<std::string> b = {"omega", "psi", "chi", "phi"};
  std::vector<std::vector<std::string>> corpus;
  for (int i = 0; i < 100; ++i) corpus.push_back(a);
  for (int i = 0; i < 100; ++i) corpus.push_back(b);
  std::mt19937_64 gen(seed);
  std::shuffle(corpus.begin(), corpus.end(), gen);
  return corpus;
}

}  // namespace synth
