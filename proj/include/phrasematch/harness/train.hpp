#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "phrasematch/harness/dataset.hpp"
#include "phrasematch/harness/metrics.hpp"
#include "phrasematch/numcore/adam.hpp"
#include "phrasematch/numcore/regularize.hpp"

namespace phrasematch::harness {

struct TrainConfig {
  TaskConfig model;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  double learning_rate = 1e-4;
  std::size_t batch_size = 1;
  double l2 = 0.0006;
  double diversity = 0.06;

  static TrainConfig defaults(Task task) {
    TrainConfig c;
    c.model = TaskConfig::defaults(task);
    return c;
  }
};

struct EvalReport {
  Task task = Task::TE;
  double accuracy = 0.0;  ///< TE
  double map = 0.0;       ///< AS
  double mrr = 0.0;       ///< AS
  std::vector<Prediction> predictions;
  double seconds = 0.0;

  /// Model-selection metric: accuracy for TE, MAP for AS.
  double primary() const noexcept { return task == Task::TE ? accuracy : map; }
};

inline EvalReport evaluate(Model& model, const Dataset& data, const corpus::EmbeddingTable& emb) {
  require(!data.empty(), "evaluate: empty dataset");
  require(data.task == model.config.task, "evaluate: dataset task does not match the model");
  const auto t0 = std::chrono::steady_clock::now();
  EvalReport r;
  r.task = data.task;
  r.predictions.reserve(data.size());
  for (const auto& e : data.examples)
    r.predictions.push_back(evaluate_pair(model, e.first, e.second, emb, e.extra).prediction);
  if (data.task == Task::TE) {
    std::vector<std::size_t> pred, gold;
    for (std::size_t i = 0; i < data.size(); ++i) {
      pred.push_back(r.predictions[i].predicted_class());
      gold.push_back(data.examples[i].label);
    }
    r.accuracy = accuracy(pred, gold);
  } else {
    std::vector<std::vector<double>> scores;
    std::vector<std::vector<int>> labels;
    for (auto [lo, hi] : data.groups) {
      scores.emplace_back();
      labels.emplace_back();
      for (std::size_t i = lo; i < hi; ++i) {
        scores.back().push_back(r.predictions[i].score());
        labels.back().push_back(static_cast<int>(data.examples[i].label));
      }
    }
    const auto m = ranking_metrics(scores, labels);
    r.map = m.map;
    r.mrr = m.mrr;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Accuracy on TE pairs (argmax, ties to the lower class index).
inline double evaluate_te(Model& model, const Dataset& pairs, const corpus::EmbeddingTable& emb) {
  return evaluate(model, pairs, emb).accuracy;
}

/// MAP and MRR over AS question groups.
inline RankingMetrics evaluate_as(Model& model, const Dataset& groups,
                                  const corpus::EmbeddingTable& emb) {
  const auto r = evaluate(model, groups, emb);
  return {r.map, r.mrr};
}

/// Task loss of one example, plus the regulariser when either coefficient is
/// non-zero.
inline Var example_loss(Tape& tape, Model& model, const Example& e,
                        const corpus::EmbeddingTable& emb, double l2, double diversity) {
  ForwardPass fp = forward(tape, model, e.first, e.second, emb, e.extra);
  Var loss = task_loss(fp.logits, model.config.task, e.label);
  if (l2 > 0.0 || diversity > 0.0) {
    auto params = model.parameters();
    loss = add(loss, regularization_loss(tape, params, l2, diversity));
  }
  return loss;
}

struct EpochReport {
  std::size_t epoch = 0;  ///< 1-based
  double train_loss = 0.0;
  EvalReport dev;
};

struct TrainResult {
  Model model;  ///< parameters of the best epoch
  std::vector<EpochReport> epochs;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
};

using EpochCallback = std::function<void(const EpochReport&)>;

/// Example-by-example ADAM training. Every epoch visits the training set in
/// an order drawn from the run seed, then scores `dev` (the training set when
/// `dev` is null); the best-scoring epoch's parameters are returned, the
/// earliest one on ties.
inline TrainResult train(const TrainConfig& cfg, const Dataset& train_set, const Dataset* dev,
                         const corpus::EmbeddingTable& emb, const EpochCallback& on_epoch = {}) {
  require(!train_set.empty(), "train: empty training set");
  require(cfg.batch_size >= 1, "train: batch size must be >= 1");
  require(train_set.task == cfg.model.task, "train: dataset task does not match the config");
  const Dataset& selection = dev ? *dev : train_set;

  Model model(cfg.model, cfg.seed);
  auto params = model.parameters();
  AdamState adam(params, {cfg.learning_rate});
  std::mt19937_64 order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[uniform_index(order_rng, i)]);

    double total = 0.0;
    zero_grads(params);
    std::size_t in_batch = 0;
    for (std::size_t n = 0; n < order.size(); ++n) {
      const Example& e = train_set.examples[order[n]];
      Tape tape;
      const bool first_in_batch = in_batch == 0;
      Var loss = example_loss(tape, model, e, emb, first_in_batch ? cfg.l2 : 0.0,
                              first_in_batch ? cfg.diversity : 0.0);
      const double value = tape.value(loss)[0];
      if (!std::isfinite(value))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " on example '" +
                           e.id + "'");
      total += value;
      tape.backward(loss);
      if (++in_batch == cfg.batch_size || n + 1 == order.size()) {
        adam.step(params);
        zero_grads(params);
        in_batch = 0;
      }
    }

    EpochReport rep{epoch, total / static_cast<double>(train_set.size()),
                    evaluate(model, selection, emb)};
    if (epoch == 1 || rep.dev.primary() > result.best_metric) {
      result.best_metric = rep.dev.primary();
      result.best_epoch = epoch;
      result.model = model;
    }
    if (on_epoch) on_epoch(rep);
    result.epochs.push_back(std::move(rep));
  }
  if (cfg.epochs == 0) result.model = model;
  return result;
}

}  // namespace phrasematch::harness
