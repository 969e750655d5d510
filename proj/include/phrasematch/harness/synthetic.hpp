#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "phrasematch/harness/train.hpp"

namespace phrasematch::harness {

/// Generated corpus with its own embedding table and a suggested model
/// configuration (d = 8, small hidden sizes).
struct SyntheticCorpus {
  corpus::EmbeddingTable embeddings;
  Dataset train;
  Dataset dev;
  TaskConfig config;
};

inline constexpr std::size_t kSyntheticDim = 8;

namespace detail {

class SyntheticVocab {
 public:
  explicit SyntheticVocab(std::uint64_t seed) : rng_(seed), table_(kSyntheticDim, seed) {}

  /// Adds `count` tokens `<stem>0 .. <stem>{count-1}` with U[-1, 1] vectors
  /// whose first `zero_prefix` coordinates are 0.
  std::vector<std::string> words(const std::string& stem, std::size_t count,
                                 std::size_t zero_prefix = 0) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) {
      Matrix e = random_uniform(1, kSyntheticDim, -1.0, 1.0, rng_);
      for (std::size_t j = 0; j < zero_prefix; ++j) e[j] = 0.0;
      out.push_back(word(stem + std::to_string(i), e.row(0)));
    }
    return out;
  }
  std::string word(const std::string& token, std::span<const double> vec) {
    table_.add(token, vec);
    return token;
  }
  const std::string& pick(const std::vector<std::string>& from) {
    return from[uniform_index(rng_, from.size())];
  }
  std::vector<std::string> draw(const std::vector<std::string>& from, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(pick(from));
    return out;
  }
  std::size_t index(std::size_t n) { return uniform_index(rng_, n); }
  Sentence sentence(std::vector<std::string> tokens) const {
    Sentence s{std::move(tokens), {}};
    table_.index(s);
    return s;
  }
  corpus::EmbeddingTable& table() { return table_; }

 private:
  std::mt19937_64 rng_;
  corpus::EmbeddingTable table_;
};

inline Example te_example(const SyntheticVocab& v, std::string id, std::vector<std::string> a,
                          std::vector<std::string> b, std::size_t label) {
  Example e{std::move(id), v.sentence(std::move(a)), v.sentence(std::move(b)), label, {}};
  e.extra = corpus::te_extra_features(e.first, e.second);
  return e;
}

}  // namespace detail

/// Twenty TE pairs: the first sentence is four filler tokens, the second is
/// the same sentence with one position replaced by the class token of the
/// label. Class token c has value 2 in embedding coordinate c and 0 elsewhere;
/// fillers are zero in those coordinates. All feature segments on, hidden
/// sizes 8/8, k-min-max with k = 5.
inline SyntheticCorpus capacity_te_corpus(std::uint64_t seed, std::size_t pairs = 20,
                                          std::size_t hidden = 8) {
  detail::SyntheticVocab v(seed);
  const auto fillers = v.words("f", 10, corpus::kTeClasses);
  std::vector<std::string> classes;
  for (std::size_t k = 0; k < corpus::kTeClasses; ++k) {
    std::vector<double> e(kSyntheticDim, 0.0);
    e[k] = 2.0;
    classes.push_back(v.word("c" + std::to_string(k), e));
  }
  SyntheticCorpus c;
  c.config = TaskConfig::defaults(Task::TE);
  c.config.embedding_dim = kSyntheticDim;
  c.config.hidden1 = c.config.hidden2 = hidden;
  c.train.task = c.dev.task = Task::TE;
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t label = i % corpus::kTeClasses;
    auto a = v.draw(fillers, 4);
    auto b = a;
    b[v.index(b.size())] = classes[label];
    c.train.examples.push_back(
        detail::te_example(v, "cap" + std::to_string(i), std::move(a), std::move(b), label));
  }
  c.embeddings = std::move(v.table());
  return c;
}

struct ContrastOptions {
  std::size_t train_size = 60;  ///< TE pairs or AS question groups
  std::size_t dev_size = 30;
  std::size_t sentence_length = 5;
  std::size_t k = 2;
  std::size_t hidden = 8;
};

/// TE-like corpus whose signal lives in the unaligned remainder: the second
/// sentence repeats the first except at one position, which holds a token of
/// the label's class. Exactly matching phrases align with score 1 and carry
/// no label information. Only the rep segment feeds the classifier.
inline SyntheticCorpus te_contrast_corpus(std::uint64_t seed, const ContrastOptions& opts = {}) {
  detail::SyntheticVocab v(seed);
  const auto noise = v.words("x", 12);
  std::vector<std::vector<std::string>> markers;
  for (std::size_t c = 0; c < corpus::kTeClasses; ++c)
    markers.push_back(v.words("y" + std::to_string(c) + "_", 2));
  SyntheticCorpus c;
  c.config = TaskConfig::defaults(Task::TE);
  c.config.embedding_dim = kSyntheticDim;
  c.config.hidden1 = c.config.hidden2 = opts.hidden;
  c.config.pooling.k = opts.k;
  c.config.features = {true, false, false, false};
  c.train.task = c.dev.task = Task::TE;
  auto fill = [&](Dataset& d, std::size_t n, const std::string& tag) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t label = v.index(corpus::kTeClasses);
      auto a = v.draw(noise, opts.sentence_length);
      auto b = a;
      b[v.index(b.size())] = v.pick(markers[label]);
      d.examples.push_back(
          detail::te_example(v, tag + std::to_string(i), std::move(a), std::move(b), label));
    }
  };
  fill(c.train, opts.train_size, "tr");
  fill(c.dev, opts.dev_size, "dv");
  c.embeddings = std::move(v.table());
  return c;
}

/// AS-like corpus whose signal lives in the aligned phrases: a question holds
/// filler tokens, one "good" key and two "bad" keys; each of its three
/// candidates holds its own fillers plus one of those keys, and the candidate
/// sharing the good key is the correct one. Only the rep segment feeds the
/// classifier.
inline SyntheticCorpus as_contrast_corpus(std::uint64_t seed, const ContrastOptions& opts = {}) {
  detail::SyntheticVocab v(seed);
  const auto q_fill = v.words("q", 12);
  const auto a_fill = v.words("a", 12);
  const auto good = v.words("g", 4);
  const auto bad = v.words("b", 4);
  SyntheticCorpus c;
  c.config = TaskConfig::defaults(Task::AS);
  c.config.embedding_dim = kSyntheticDim;
  c.config.hidden1 = c.config.hidden2 = opts.hidden;
  c.config.pooling.k = opts.k;
  c.config.features = {true, false, false, false};
  c.train.task = c.dev.task = Task::AS;
  const std::size_t fillers = opts.sentence_length > 3 ? opts.sentence_length - 3 : 1;
  auto insert_at_random = [&](std::vector<std::string>& s, const std::string& tok) {
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(v.index(s.size() + 1)), tok);
  };
  auto fill = [&](Dataset& d, std::size_t n, const std::string& tag) {
    for (std::size_t g = 0; g < n; ++g) {
      const std::string key_good = v.pick(good);
      const std::string key_bad1 = v.pick(bad);
      std::string key_bad2 = v.pick(bad);
      while (key_bad2 == key_bad1) key_bad2 = v.pick(bad);
      auto q = v.draw(q_fill, fillers);
      for (const std::string& key : {key_good, key_bad1, key_bad2}) insert_at_random(q, key);
      const Sentence question = v.sentence(q);
      const std::size_t begin = d.examples.size();
      const std::size_t positive = v.index(3);
      std::size_t next_bad = 0;
      for (std::size_t i = 0; i < 3; ++i) {
        auto a = v.draw(a_fill, fillers + 1);
        const bool correct = i == positive;
        insert_at_random(a, correct ? key_good : (next_bad++ == 0 ? key_bad1 : key_bad2));
        const std::size_t label = correct ? 1 : 0;
        d.examples.push_back({tag + std::to_string(g) + "/" + std::to_string(i), question,
                              v.sentence(std::move(a)), label, {}});
      }
      d.groups.emplace_back(begin, d.examples.size());
    }
  };
  fill(c.train, opts.train_size, "tr");
  fill(c.dev, opts.dev_size, "dv");
  c.embeddings = std::move(v.table());
  return c;
}

inline constexpr std::size_t kContrastEpochs = 10;
inline constexpr double kContrastLearningRate = 1e-2;

/// Training setup for comparing pooling modes on a contrast corpus: the
/// corpus configuration with `kind` swapped in, a fixed epoch budget and no
/// regularisation.
inline TrainConfig contrast_train_config(const SyntheticCorpus& c, PoolingKind kind,
                                         std::uint64_t seed) {
  TrainConfig cfg;
  cfg.model = c.config;
  cfg.model.pooling.kind = kind;
  cfg.epochs = kContrastEpochs;
  cfg.seed = seed;
  cfg.learning_rate = kContrastLearningRate;
  cfg.l2 = 0.0;
  cfg.diversity = 0.0;
  return cfg;
}

}  // namespace phrasematch::harness
