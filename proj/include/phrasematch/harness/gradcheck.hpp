#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "phrasematch/harness/train.hpp"

namespace phrasematch::harness {

/// A model plus the examples whose summed loss is differentiated.
struct GradCheckProblem {
  Model model;
  corpus::EmbeddingTable embeddings;
  Dataset data;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Relative errors are taken against max(|analytic|, |numeric|, floor).
  double floor = 1e-6;
  double l2 = 0.0006;
  double diversity = 0.06;
  std::optional<OpKind> fault;
};

struct ParameterCheck {
  std::string name;
  Matrix analytic;
  Matrix numeric;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  bool passed = false;
  std::set<OpKind> gradient_kinds;
  std::vector<ParameterCheck> parameters;
};

inline constexpr std::size_t kGradCheckDim = 8;
inline constexpr std::size_t kGradCheckHidden = 8;
inline constexpr std::size_t kGradCheckK = 2;
inline constexpr double kGradCheckInitRange = 0.5;

/// Tiny problem: d = 8, h = [8, 8], k = 2, sentences of 3..5 tokens drawn
/// from a 20-word vocabulary with U[-1, 1] embeddings, three examples (TE:
/// one per class; AS: one question with one correct and two wrong answers).
/// Parameters come from U[-0.5, 0.5] so that gradients are well above the
/// finite-difference noise.
inline GradCheckProblem tiny_problem(Task task, std::uint64_t seed) {
  TaskConfig cfg = TaskConfig::defaults(task);
  cfg.embedding_dim = kGradCheckDim;
  cfg.hidden1 = cfg.hidden2 = kGradCheckHidden;
  cfg.pooling.k = kGradCheckK;

  std::mt19937_64 rng(seed);
  GradCheckProblem p{Model(cfg, seed), corpus::EmbeddingTable(kGradCheckDim, seed), {}};
  corpus::EmbeddingTable& emb = p.embeddings;
  constexpr std::size_t kVocab = 20;
  std::vector<std::string> words;
  for (std::size_t i = 0; i < kVocab; ++i) {
    words.push_back("w" + std::to_string(i));
    emb.add(words.back(), random_uniform(1, kGradCheckDim, -1.0, 1.0, rng).row(0));
  }
  // First sentences draw from the lower half of the vocabulary and second
  // sentences from the upper half, so no phrase aligns perfectly and the
  // cosine features stay differentiable.
  auto sentence = [&](std::size_t half) {
    Sentence s;
    const std::size_t n = 3 + uniform_index(rng, 3);
    for (std::size_t i = 0; i < n; ++i)
      s.tokens.push_back(words[half * kVocab / 2 + uniform_index(rng, kVocab / 2)]);
    emb.index(s);
    return s;
  };
  auto extra = [&] {
    auto v = random_uniform(1, cfg.extra_width, 0.0, 1.0, rng);
    return std::vector<double>(v.data().begin(), v.data().end());
  };

  p.data.task = task;
  if (task == Task::TE) {
    for (std::size_t label = 0; label < corpus::kTeClasses; ++label)
      p.data.examples.push_back({"p" + std::to_string(label), sentence(0), sentence(1), label, extra()});
  } else {
    const Sentence q = sentence(0);
    for (std::size_t i = 0; i < 3; ++i)
      p.data.examples.push_back({"q/" + std::to_string(i), q, sentence(1), i == 0 ? 1u : 0u, extra()});
    p.data.groups.emplace_back(0, 3);
  }
  p.model.randomize(kGradCheckInitRange);
  return p;
}

/// Summed task loss over all examples plus the regulariser once.
inline double total_loss(GradCheckProblem& p, double l2, double diversity) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    Tape tape;
    const bool first = i == 0;
    Var loss = example_loss(tape, p.model, p.data.examples[i], p.embeddings, first ? l2 : 0.0,
                            first ? diversity : 0.0);
    sum += tape.value(loss)[0];
  }
  return sum;
}

/// Reverse-mode gradients of total_loss; also reports which operation kinds
/// carried gradient.
inline std::vector<Matrix> analytic_gradients(GradCheckProblem& p, const GradCheckOptions& opts,
                                              std::set<OpKind>* kinds = nullptr) {
  auto params = p.model.parameters();
  zero_grads(params);
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    Tape tape;
    tape.inject_fault(opts.fault);
    const bool first = i == 0;
    Var loss = example_loss(tape, p.model, p.data.examples[i], p.embeddings,
                            first ? opts.l2 : 0.0, first ? opts.diversity : 0.0);
    tape.backward(loss);
    if (kinds) kinds->insert(tape.gradient_kinds().begin(), tape.gradient_kinds().end());
  }
  std::vector<Matrix> out;
  for (auto* prm : params) out.push_back(prm->grad);
  zero_grads(params);
  return out;
}

/// Central differences over every trainable entry.
inline std::vector<Matrix> numeric_gradients(GradCheckProblem& p, const GradCheckOptions& opts) {
  std::vector<Matrix> out;
  for (auto* prm : p.model.parameters()) {
    Matrix g(prm->value.rows(), prm->value.cols());
    if (prm->trainable) {
      for (std::size_t i = 0; i < prm->value.size(); ++i) {
        const double orig = prm->value[i];
        prm->value[i] = orig + opts.step;
        const double up = total_loss(p, opts.l2, opts.diversity);
        prm->value[i] = orig - opts.step;
        const double down = total_loss(p, opts.l2, opts.diversity);
        prm->value[i] = orig;
        g[i] = (up - down) / (2.0 * opts.step);
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::fabs(analytic), std::fabs(numeric), floor});
  return std::fabs(analytic - numeric) / scale;
}

inline GradCheckReport compare_gradients(const GradCheckProblem& p,
                                         const std::vector<Matrix>& analytic,
                                         const std::vector<Matrix>& numeric,
                                         const GradCheckOptions& opts) {
  GradCheckReport r;
  const auto params = p.model.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    ParameterCheck pc{params[k]->name, analytic[k], numeric[k], 0.0};
    if (params[k]->trainable) {
      for (std::size_t i = 0; i < analytic[k].size(); ++i) {
        const double e = relative_error(analytic[k][i], numeric[k][i], opts.floor);
        ++r.checked;
        pc.max_rel_error = std::max(pc.max_rel_error, e);
        if (r.worst_parameter.empty() || e > r.max_rel_error) {
          r.max_rel_error = e;
          r.worst_parameter = pc.name;
          r.worst_index = i;
        }
      }
    }
    r.parameters.push_back(std::move(pc));
  }
  r.passed = r.checked > 0 && r.max_rel_error < opts.tolerance;
  return r;
}

inline GradCheckReport grad_check(GradCheckProblem& p, const GradCheckOptions& opts = {}) {
  std::set<OpKind> kinds;
  const auto analytic = analytic_gradients(p, opts, &kinds);
  const auto numeric = numeric_gradients(p, opts);
  GradCheckReport r = compare_gradients(p, analytic, numeric, opts);
  r.gradient_kinds = std::move(kinds);
  return r;
}

inline GradCheckReport grad_check(Task task, std::uint64_t seed, const GradCheckOptions& opts = {}) {
  GradCheckProblem p = tiny_problem(task, seed);
  return grad_check(p, opts);
}

struct MutationResult {
  OpKind kind;
  double max_rel_error = 0.0;
  bool detected = false;
};

/// Injects a fault into each gradient-carrying operation kind in turn and
/// records whether the check notices.
inline std::vector<MutationResult> mutation_sweep(GradCheckProblem& p,
                                                  const GradCheckOptions& base = {}) {
  std::set<OpKind> kinds;
  GradCheckOptions clean = base;
  clean.fault.reset();
  analytic_gradients(p, clean, &kinds);
  const auto numeric = numeric_gradients(p, clean);
  std::vector<MutationResult> out;
  for (OpKind kind : kinds) {
    GradCheckOptions faulty = clean;
    faulty.fault = kind;
    const auto analytic = analytic_gradients(p, faulty);
    const auto r = compare_gradients(p, analytic, numeric, faulty);
    out.push_back({kind, r.max_rel_error, !r.passed});
  }
  return out;
}

}  // namespace phrasematch::harness
