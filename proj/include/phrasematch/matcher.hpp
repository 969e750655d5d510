#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "phrasematch/alignpool.hpp"
#include "phrasematch/corpus/features.hpp"
#include "phrasematch/encoder.hpp"

namespace phrasematch {

enum class Task { TE, AS };

constexpr std::string_view task_name(Task t) { return t == Task::TE ? "te" : "as"; }

inline Task parse_task(std::string_view s) {
  if (s == "te") return Task::TE;
  if (s == "as") return Task::AS;
  throw ConfigError("unknown task '" + std::string(s) + "' (te|as)");
}

/// Which classifier input segments are present. `rep` is s1, s2, s_p;
/// `addition` is the two embedding sums; `simi` and `extra` as usual.
struct FeatureSet {
  bool rep = true;
  bool addition = true;
  bool simi = true;
  bool extra = true;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

inline FeatureSet parse_feature_set(std::string_view list) {
  FeatureSet f{false, false, false, false};
  std::size_t b = 0;
  while (b <= list.size()) {
    const auto e = std::min(list.find(',', b), list.size());
    const auto name = list.substr(b, e - b);
    if (name == "rep") f.rep = true;
    else if (name == "add") f.addition = true;
    else if (name == "simi") f.simi = true;
    else if (name == "extra") f.extra = true;
    else throw ConfigError("unknown feature segment '" + std::string(name) + "' (rep|add|simi|extra)");
    b = e + 1;
  }
  if (!(f.rep || f.addition || f.simi || f.extra))
    throw ConfigError("at least one feature segment is required");
  return f;
}

inline std::string feature_set_name(const FeatureSet& f) {
  std::string out;
  auto put = [&out](bool on, const char* n) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += n;
  };
  put(f.rep, "rep");
  put(f.addition, "add");
  put(f.simi, "simi");
  put(f.extra, "extra");
  return out;
}

struct TaskConfig {
  Task task = Task::TE;
  PoolingMode pooling{PoolingKind::KMinMax, 5};
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 256;
  std::size_t embedding_dim = corpus::kDefaultEmbeddingDim;
  std::size_t max_phrase_len = kDefaultMaxPhraseLength;
  FeatureSet features;
  std::size_t extra_width = corpus::kTeExtraWidth;

  /// Hyperparameter defaults per task.
  static TaskConfig defaults(Task task) {
    TaskConfig c;
    c.task = task;
    if (task == Task::TE) {
      c.pooling = {PoolingKind::KMinMax, 5};
      c.hidden1 = c.hidden2 = 256;
      c.extra_width = corpus::kTeExtraWidth;
    } else {
      c.pooling = {PoolingKind::KMaxMax, 6};
      c.hidden1 = c.hidden2 = 50;
      c.extra_width = corpus::kAsExtraWidth;
    }
    return c;
  }

  /// Number of class labels: 3 for TE, 2 for AS.
  std::size_t classes() const noexcept { return task == Task::TE ? corpus::kTeClasses : 2; }
  /// Classifier outputs: a 3-way softmax for TE, one sigmoid logit for AS.
  std::size_t outputs() const noexcept { return task == Task::TE ? corpus::kTeClasses : 1; }
  std::size_t simi_width() const noexcept { return task == Task::TE ? 4 : 2; }

  std::size_t feature_width() const noexcept {
    std::size_t w = 0;
    if (features.rep) w += 3 * hidden2;
    if (features.addition) w += 2 * embedding_dim;
    if (features.simi) w += simi_width();
    if (features.extra) w += extra_width;
    return w;
  }

  friend bool operator==(const TaskConfig&, const TaskConfig&) = default;
};

/// GRU1 over phrases, GRU2 over pooled feature maps, and an affine classifier.
struct Model {
  TaskConfig config;
  std::uint64_t seed = 0;
  GruParams gru1;
  GruParams gru2;
  Parameter classifier_w;  // feature_width x outputs
  Parameter classifier_b;  // 1 x outputs

  Model() = default;
  Model(const TaskConfig& cfg, std::uint64_t init_seed)
      : config(cfg), seed(init_seed), gru1("gru1", cfg.embedding_dim, cfg.hidden1),
        gru2("gru2", cfg.hidden1, cfg.hidden2),
        classifier_w("classifier.w", Matrix(cfg.feature_width(), cfg.outputs())),
        classifier_b("classifier.b", Matrix(1, cfg.outputs())) {
    require(cfg.hidden1 >= 1 && cfg.hidden2 >= 1, "hidden dimensions must be >= 1");
    require(cfg.max_phrase_len >= 1, "max phrase length must be >= 1");
    require(cfg.pooling.kind == PoolingKind::Full || cfg.pooling.k >= 1, "k must be >= 1");
    require(cfg.feature_width() >= 1, "classifier needs at least one input feature");
    randomize(kInitRange);
  }

  /// Redraws every trainable matrix from U[-range, range] using `seed`.
  void randomize(double range) {
    std::mt19937_64 rng(seed);
    for (auto* p : parameters())
      for (auto& x : p->value.data()) x = uniform(rng, -range, range);
  }

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    for (auto* p : gru1.parameters()) out.push_back(p);
    for (auto* p : gru2.parameters()) out.push_back(p);
    out.push_back(&classifier_w);
    out.push_back(&classifier_b);
    return out;
  }
  std::vector<const Parameter*> parameters() const {
    std::vector<const Parameter*> out;
    for (const auto* p : gru1.parameters()) out.push_back(p);
    for (const auto* p : gru2.parameters()) out.push_back(p);
    out.push_back(&classifier_w);
    out.push_back(&classifier_b);
    return out;
  }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : parameters()) n += p->value.size();
    return n;
  }
};

/// Intermediate values of one pair's forward pass.
struct PairForward {
  PhraseSequence phrases1, phrases2;
  Matrix alignment;
  AttentionVectors attention;
  std::vector<std::size_t> selected1, selected2;
  Matrix s1, s2, sp;          // 1 x hidden2
  Matrix s1_add, s2_add;      // 1 x embedding_dim
};

struct Prediction {
  std::vector<double> logits;
  /// TE: softmax over (entailment, contradiction, neutral). AS: {P(correct)}.
  std::vector<double> probabilities;

  /// Argmax; ties go to the lower class index. AS: 1 iff P > 0.5.
  std::size_t predicted_class() const {
    if (probabilities.size() == 1) return probabilities[0] > 0.5 ? 1 : 0;
    std::size_t best = 0;
    for (std::size_t i = 1; i < probabilities.size(); ++i)
      if (probabilities[i] > probabilities[best]) best = i;
    return best;
  }
  /// Ranking score for AS.
  double score() const { return probabilities.back(); }
};

inline Prediction make_prediction(Task task, std::span<const double> logits) {
  Prediction p;
  p.logits.assign(logits.begin(), logits.end());
  if (task == Task::TE)
    p.probabilities = softmax(logits);
  else
    p.probabilities = {1.0 / (1.0 + std::exp(-logits[0]))};
  return p;
}

inline Matrix embedding_sum(const Sentence& s, const corpus::EmbeddingTable& emb) {
  Matrix out(1, emb.dim());
  for (auto id : s.token_ids) {
    auto r = emb.row(id);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j];
  }
  return out;
}

/// TE: [cos(s1,s2), 1/(1+|s1-s2|), cos(add1,add2), 1/(1+|add1-add2|)]
/// AS: [cos(s1,s2), cos(add1,add2)]
inline std::vector<double> simi_features(const PairForward& fw, Task task) {
  auto inv = [](const Matrix& a, const Matrix& b) {
    double sq = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sq += (a[j] - b[j]) * (a[j] - b[j]);
    return 1.0 / (1.0 + std::sqrt(sq));
  };
  const double c = cosine(fw.s1.data(), fw.s2.data());
  const double c_add = cosine(fw.s1_add.data(), fw.s2_add.data());
  if (task == Task::AS) return {c, c_add};
  return {c, inv(fw.s1, fw.s2), c_add, inv(fw.s1_add, fw.s2_add)};
}

struct ForwardPass {
  PairForward info;
  Var features;
  Var logits;
};

/// Full pair forward on `tape`: phrase encoding with GRU1, alignment and
/// attentive pooling, GRU2 over each pooled map and over their concatenation,
/// feature assembly, classifier.
inline ForwardPass forward(Tape& tape, Model& model, const Sentence& first, const Sentence& second,
                           const corpus::EmbeddingTable& emb, std::span<const double> extra) {
  const TaskConfig& cfg = model.config;
  require(!first.empty() && !second.empty(), "forward: both sentences must be non-empty");
  if (cfg.features.extra && extra.size() != cfg.extra_width)
    throw ConfigError("forward: " + std::to_string(extra.size()) + " extra features given, model expects " +
                      std::to_string(cfg.extra_width));
  if (emb.dim() != cfg.embedding_dim)
    throw ConfigError("forward: embedding dim " + std::to_string(emb.dim()) +
                      " does not match model " + std::to_string(cfg.embedding_dim));

  ForwardPass out;
  PairForward& info = out.info;
  const BoundGru g1 = bind(tape, model.gru1);
  const BoundGru g2 = bind(tape, model.gru2);

  const PhraseEncoding e1 = encode_phrases(g1, first, emb, cfg.max_phrase_len);
  const PhraseEncoding e2 = encode_phrases(g1, second, emb, cfg.max_phrase_len);
  info.phrases1 = e1.phrases;
  info.phrases2 = e2.phrases;
  info.alignment = alignment_matrix(tape.value(e1.reps), tape.value(e2.reps));
  info.attention = attention_vectors(info.alignment);
  info.selected1 = select_phrases(info.attention.first, cfg.pooling);
  info.selected2 = select_phrases(info.attention.second, cfg.pooling);

  Var map1 = attentive_pool(e1.reps, info.selected1);
  Var map2 = attentive_pool(e2.reps, info.selected2);
  Var s1 = encode_sequence(g2, map1).back();
  Var s2 = encode_sequence(g2, map2).back();
  Var sp = encode_sequence(g2, concat_feature_maps(map1, map2)).back();
  info.s1 = tape.value(s1);
  info.s2 = tape.value(s2);
  info.sp = tape.value(sp);
  info.s1_add = embedding_sum(first, emb);
  info.s2_add = embedding_sum(second, emb);

  std::vector<Var> parts;
  if (cfg.features.rep) parts.insert(parts.end(), {s1, s2, sp});
  Var add1 = tape.constant(info.s1_add);
  Var add2 = tape.constant(info.s2_add);
  if (cfg.features.addition) parts.insert(parts.end(), {add1, add2});
  if (cfg.features.simi) {
    parts.push_back(cosine(s1, s2));
    if (cfg.task == Task::TE) parts.push_back(inverse_distance(s1, s2));
    parts.push_back(cosine(add1, add2));
    if (cfg.task == Task::TE) parts.push_back(inverse_distance(add1, add2));
  }
  if (cfg.features.extra) parts.push_back(tape.constant(Matrix::row_vector(extra)));
  out.features = concat_cols(parts);
  out.logits = add_row_broadcast(matmul(out.features, tape.param(model.classifier_w)),
                                 tape.param(model.classifier_b));
  return out;
}

/// Cross-entropy of the classifier output: softmax for TE (label 0..2),
/// sigmoid for AS (label 0/1).
inline Var task_loss(Var logits, Task task, std::size_t label) {
  if (task == Task::TE) {
    require(label < corpus::kTeClasses, "loss: TE label must be 0, 1 or 2");
    return softmax_cross_entropy(logits, label);
  }
  require(label <= 1, "loss: AS label must be 0 or 1");
  return sigmoid_cross_entropy(logits, static_cast<int>(label));
}

/// Loss from an already computed prediction.
inline double loss(const Prediction& pred, Task task, std::size_t label) {
  if (task == Task::TE) {
    require(label < corpus::kTeClasses && pred.probabilities.size() == corpus::kTeClasses,
            "loss: TE label must be 0, 1 or 2");
    return -std::log(pred.probabilities[label]);
  }
  require(label <= 1, "loss: AS label must be 0 or 1");
  const double p = pred.probabilities[0];
  return label == 1 ? -std::log(p) : -std::log1p(-p);
}

struct PairEvaluation {
  PairForward info;
  Matrix features;
  Prediction prediction;
};

/// Forward pass without keeping the tape; safe to run concurrently on a
/// model whose parameters are not being modified.
inline PairEvaluation evaluate_pair(Model& model, const Sentence& first, const Sentence& second,
                                    const corpus::EmbeddingTable& emb,
                                    std::span<const double> extra) {
  Tape tape;
  ForwardPass fp = forward(tape, model, first, second, emb, extra);
  PairEvaluation ev{std::move(fp.info), tape.value(fp.features), {}};
  ev.prediction = make_prediction(model.config.task, tape.value(fp.logits).data());
  return ev;
}

}  // namespace phrasematch
