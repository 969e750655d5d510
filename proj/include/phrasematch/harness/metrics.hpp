#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "phrasematch/errors.hpp"

namespace phrasematch::harness {

/// Candidate positions ordered by score descending; ties keep input order.
inline std::vector<std::size_t> rank_candidates(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

/// Mean over correct candidates of precision at that candidate's rank.
inline double average_precision(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), "average_precision: scores and labels differ in length");
  const auto order = rank_candidates(scores);
  double hits = 0.0, sum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]] != 1) continue;
    hits += 1.0;
    sum += hits / static_cast<double>(r + 1);
  }
  require(hits > 0.0, "average_precision: no correct candidate");
  return sum / hits;
}

/// 1 / rank of the first correct candidate.
inline double reciprocal_rank(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), "reciprocal_rank: scores and labels differ in length");
  const auto order = rank_candidates(scores);
  for (std::size_t r = 0; r < order.size(); ++r)
    if (labels[order[r]] == 1) return 1.0 / static_cast<double>(r + 1);
  throw ContractError("reciprocal_rank: no correct candidate");
}

struct RankingMetrics {
  double map = 0.0;
  double mrr = 0.0;
};

inline RankingMetrics ranking_metrics(const std::vector<std::vector<double>>& scores,
                                      const std::vector<std::vector<int>>& labels) {
  require(scores.size() == labels.size() && !scores.empty(),
          "ranking_metrics: need one label list per question");
  RankingMetrics m;
  for (std::size_t q = 0; q < scores.size(); ++q) {
    m.map += average_precision(scores[q], labels[q]);
    m.mrr += reciprocal_rank(scores[q], labels[q]);
  }
  m.map /= static_cast<double>(scores.size());
  m.mrr /= static_cast<double>(scores.size());
  return m;
}

inline double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> gold) {
  require(predicted.size() == gold.size() && !gold.empty(), "accuracy: size mismatch or empty");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hit += predicted[i] == gold[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

}  // namespace phrasematch::harness
