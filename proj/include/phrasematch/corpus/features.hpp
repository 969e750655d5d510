#pragma once

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "phrasematch/corpus/datasets.hpp"

namespace phrasematch::corpus {

inline const std::set<std::string>& negation_lexicon() {
  static const std::set<std::string> words{"no",   "not",     "n't",     "never", "none",
                                           "nobody", "nothing", "neither", "nor"};
  return words;
}

inline double negation_flag(const Sentence& s) {
  for (const auto& t : s.tokens)
    if (negation_lexicon().count(t)) return 1.0;
  return 0.0;
}

/// English function words excluded from WordCnt.
inline const std::set<std::string>& stopwords() {
  static const std::set<std::string> words{
      "a",    "an",    "the",   "and",  "or",   "but",   "if",    "of",    "at",   "by",
      "for",  "with",  "about", "to",   "from", "in",    "on",    "into",  "as",   "is",
      "are",  "was",   "were",  "be",   "been", "being", "am",    "do",    "does", "did",
      "have", "has",   "had",   "it",   "its",  "this",  "that",  "these", "those", "what",
      "which", "who",  "whom",  "when", "where", "why",  "how",   "i",     "you",  "he",
      "she",  "we",    "they",  "there", "than", "so",   "can",   "will",  "?",    ".",
      ",",    "'s"};
  return words;
}

/// Smoothed inverse document frequency over a question collection:
/// idf(w) = max(0, ln(N / (1 + df(w)))). Unseen words get ln N.
class IdfTable {
 public:
  IdfTable() = default;
  explicit IdfTable(const std::vector<const Sentence*>& documents) : docs_(documents.size()) {
    for (const auto* d : documents) {
      const std::set<std::string> uniq(d->tokens.begin(), d->tokens.end());
      for (const auto& w : uniq) ++df_[w];
    }
  }

  /// idf of 1 for every word.
  static IdfTable uniform() {
    IdfTable t;
    t.uniform_ = true;
    return t;
  }

  double operator()(const std::string& w) const {
    if (uniform_) return 1.0;
    if (docs_ == 0) return 0.0;
    auto it = df_.find(w);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::max(0.0, std::log(static_cast<double>(docs_) / (1.0 + df)));
  }

  std::size_t documents() const noexcept { return docs_; }
  friend bool operator==(const IdfTable&, const IdfTable&) = default;

 private:
  std::size_t docs_ = 0;
  std::map<std::string, std::size_t> df_;
  bool uniform_ = false;
};

inline IdfTable build_idf(const std::vector<QuestionGroup>& training_groups) {
  std::vector<const Sentence*> docs;
  docs.reserve(training_groups.size());
  for (const auto& g : training_groups) docs.push_back(&g.question);
  return IdfTable(docs);
}

struct WordCounts {
  double word_cnt = 0.0;
  double weighted_word_cnt = 0.0;
};

/// Distinct non-stopword question words that also occur in the candidate,
/// plain and IDF-weighted.
inline WordCounts word_count_features(const Sentence& question, const Sentence& candidate,
                                      const IdfTable& idf,
                                      const std::set<std::string>& stop = stopwords()) {
  const std::unordered_set<std::string> in_candidate(candidate.tokens.begin(),
                                                     candidate.tokens.end());
  std::set<std::string> seen;
  WordCounts out;
  for (const auto& w : question.tokens) {
    if (stop.count(w) || !in_candidate.count(w) || !seen.insert(w).second) continue;
    out.word_cnt += 1.0;
    out.weighted_word_cnt += idf(w);
  }
  return out;
}

inline constexpr std::size_t kTeExtraWidth = 4;
inline constexpr std::size_t kAsExtraWidth = 4;

/// [len_a, len_b, negation_a, negation_b]
inline std::vector<double> te_extra_features(const Sentence& a, const Sentence& b) {
  return {static_cast<double>(a.size()), static_cast<double>(b.size()), negation_flag(a),
          negation_flag(b)};
}

/// [len_q, len_c, WordCnt, WgtWordCnt]
inline std::vector<double> as_extra_features(const Sentence& q, const Sentence& c,
                                             const IdfTable& idf) {
  const auto wc = word_count_features(q, c, idf);
  return {static_cast<double>(q.size()), static_cast<double>(c.size()), wc.word_cnt,
          wc.weighted_word_cnt};
}

/// Precomputed per-pair features: TSV with header `pair_id <name>...`.
/// TE rows are keyed by pair_ID; AS rows by `<question_id>/<candidate index>`.
struct ExtraFeatureFile {
  std::vector<std::string> names;
  std::unordered_map<std::string, std::vector<double>> rows;

  const std::vector<double>& at(const std::string& id) const {
    auto it = rows.find(id);
    if (it == rows.end()) throw ConfigError("no precomputed extra features for pair '" + id + "'");
    return it->second;
  }
};

inline ExtraFeatureFile load_extra_features(const std::string& path) {
  auto in = detail::open(path);
  std::string line;
  if (!detail::read_line(in, line)) throw LoadError(path + ":1: empty file, header expected");
  ExtraFeatureFile out;
  const std::string header = line;
  const auto h = detail::split_tabs(header);
  if (h.size() < 2) throw LoadError(path + ":1: need a pair id column and at least one feature");
  for (std::size_t i = 1; i < h.size(); ++i) out.names.emplace_back(h[i]);
  std::size_t line_no = 1;
  while (detail::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_tabs(line);
    const std::string where = path + ":" + std::to_string(line_no);
    if (f.size() != h.size())
      throw LoadError(where + ": expected " + std::to_string(h.size()) + " columns, found " +
                      std::to_string(f.size()));
    std::vector<double> values;
    for (std::size_t i = 1; i < f.size(); ++i) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
      if (ec != std::errc() || p != f[i].data() + f[i].size() || !std::isfinite(v))
        throw LoadError(where + ": unparsable real '" + std::string(f[i]) + "'");
      values.push_back(v);
    }
    if (!out.rows.emplace(std::string(f[0]), std::move(values)).second)
      throw LoadError(where + ": duplicate pair id '" + std::string(f[0]) + "'");
  }
  return out;
}

inline std::string candidate_key(const QuestionGroup& g, std::size_t candidate) {
  return g.question_id + "/" + std::to_string(candidate);
}

}  // namespace phrasematch::corpus
