#pragma once

#include <string>
#include <utility>
#include <vector>

#include "phrasematch/corpus/features.hpp"
#include "phrasematch/matcher.hpp"

namespace phrasematch::harness {

/// One sentence pair as the trainer sees it.
struct Example {
  std::string id;
  Sentence first;
  Sentence second;
  std::size_t label = 0;
  std::vector<double> extra;
};

/// Examples of one task. AS examples are flattened question/candidate pairs;
/// `groups` holds the [begin, end) example range of each question.
struct Dataset {
  Task task = Task::TE;
  std::vector<Example> examples;
  std::vector<std::pair<std::size_t, std::size_t>> groups;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }
};

/// Extra features come from `precomputed` when given, otherwise from the
/// built-in [len_a, len_b, negation_a, negation_b].
inline Dataset make_te_dataset(const std::vector<corpus::LabeledPair>& pairs,
                               const corpus::ExtraFeatureFile* precomputed = nullptr) {
  Dataset d;
  d.task = Task::TE;
  d.examples.reserve(pairs.size());
  for (const auto& p : pairs) {
    Example e{p.id, p.first, p.second, static_cast<std::size_t>(p.label), {}};
    e.extra = precomputed ? precomputed->at(p.id) : corpus::te_extra_features(p.first, p.second);
    d.examples.push_back(std::move(e));
  }
  return d;
}

/// Extra features: [len_q, len_c, WordCnt, WgtWordCnt] with `idf`, or the
/// precomputed file keyed by `<question_id>/<candidate index>`.
inline Dataset make_as_dataset(const std::vector<corpus::QuestionGroup>& groups,
                               const corpus::IdfTable& idf,
                               const corpus::ExtraFeatureFile* precomputed = nullptr) {
  Dataset d;
  d.task = Task::AS;
  for (const auto& g : groups) {
    const std::size_t begin = d.examples.size();
    for (std::size_t i = 0; i < g.candidates.size(); ++i) {
      const auto& c = g.candidates[i];
      Example e{corpus::candidate_key(g, i), g.question, c.answer,
                static_cast<std::size_t>(c.label), {}};
      e.extra = precomputed ? precomputed->at(e.id)
                            : corpus::as_extra_features(g.question, c.answer, idf);
      d.examples.push_back(std::move(e));
    }
    d.groups.emplace_back(begin, d.examples.size());
  }
  return d;
}

inline void index_all(Dataset& d, const corpus::EmbeddingTable& emb) {
  for (auto& e : d.examples) {
    emb.index(e.first);
    emb.index(e.second);
  }
}

inline void collect_vocabulary(const Dataset& d, std::set<std::string>& vocab) {
  for (const auto& e : d.examples) {
    corpus::collect_vocabulary(e.first, vocab);
    corpus::collect_vocabulary(e.second, vocab);
  }
}

/// Concatenation, with group ranges of `b` shifted past `a`.
inline Dataset merge(const Dataset& a, const Dataset& b) {
  require(a.task == b.task, "merge: datasets belong to different tasks");
  Dataset out = a;
  const std::size_t shift = a.examples.size();
  out.examples.insert(out.examples.end(), b.examples.begin(), b.examples.end());
  for (auto [lo, hi] : b.groups) out.groups.emplace_back(lo + shift, hi + shift);
  return out;
}

}  // namespace phrasematch::harness
