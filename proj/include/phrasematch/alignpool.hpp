#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "phrasematch/numcore/ops.hpp"

namespace phrasematch {

/// A(i, j) = cos(row i of `a`, row j of `b`); zero-norm rows give 0.
inline Matrix alignment_matrix(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw ContractError("alignment_matrix: representation widths differ (" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.cols()) + ")");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = cosine(a.row(i), b.row(j));
  return out;
}

struct AttentionVectors {
  std::vector<double> first;   ///< row maxima: best alignment of each phrase of sentence 1
  std::vector<double> second;  ///< column maxima: same for sentence 2
};

inline AttentionVectors attention_vectors(const Matrix& alignment) {
  require(alignment.rows() > 0 && alignment.cols() > 0, "attention_vectors: empty alignment");
  AttentionVectors out;
  out.first.assign(alignment.rows(), alignment(0, 0));
  out.second.assign(alignment.cols(), alignment(0, 0));
  for (std::size_t i = 0; i < alignment.rows(); ++i)
    for (std::size_t j = 0; j < alignment.cols(); ++j) {
      const double v = alignment(i, j);
      if (j == 0 || v > out.first[i]) out.first[i] = v;
      if (i == 0 || v > out.second[j]) out.second[j] = v;
    }
  return out;
}

enum class PoolingKind {
  KMinMax,  ///< keep the k worst-aligned phrases
  KMaxMax,  ///< keep the k best-aligned phrases
  Full,     ///< keep every phrase
};

struct PoolingMode {
  PoolingKind kind = PoolingKind::KMinMax;
  std::size_t k = 5;

  friend bool operator==(const PoolingMode&, const PoolingMode&) = default;
};

constexpr std::string_view pooling_name(PoolingKind kind) {
  switch (kind) {
    case PoolingKind::KMinMax: return "kmin";
    case PoolingKind::KMaxMax: return "kmax";
    case PoolingKind::Full: return "full";
  }
  return "?";
}

inline PoolingKind parse_pooling(std::string_view name) {
  if (name == "kmin") return PoolingKind::KMinMax;
  if (name == "kmax") return PoolingKind::KMaxMax;
  if (name == "full") return PoolingKind::Full;
  throw ConfigError("unknown pooling mode '" + std::string(name) + "' (kmin|kmax|full)");
}

/// Positions kept by the second pooling stage, ascending. Among equal
/// attention values the earlier position wins.
inline std::vector<std::size_t> select_phrases(std::span<const double> attention,
                                               PoolingMode mode) {
  if (mode.kind != PoolingKind::Full) require(mode.k >= 1, "attentive pooling needs k >= 1");
  std::vector<std::size_t> idx(attention.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (mode.kind == PoolingKind::Full || mode.k >= idx.size()) return idx;
  const auto before = [&](std::size_t a, std::size_t b) {
    if (attention[a] != attention[b])
      return mode.kind == PoolingKind::KMinMax ? attention[a] < attention[b]
                                               : attention[a] > attention[b];
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(mode.k), idx.end(),
                    before);
  idx.resize(mode.k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct SelectedPhrases {
  std::vector<std::size_t> indices;
  Matrix feature_map;  ///< selected representation rows, in index order
};

inline SelectedPhrases attentive_pool(const Matrix& reps, std::span<const double> attention,
                                      PoolingMode mode) {
  require(reps.rows() == attention.size(),
          "attentive_pool: " + std::to_string(attention.size()) + " attention values for " +
              std::to_string(reps.rows()) + " phrases");
  SelectedPhrases out{select_phrases(attention, mode), {}};
  out.feature_map = Matrix(out.indices.size(), reps.cols());
  for (std::size_t i = 0; i < out.indices.size(); ++i) {
    auto src = reps.row(out.indices[i]);
    std::copy(src.begin(), src.end(), out.feature_map.row(i).begin());
  }
  return out;
}

/// Taped selection: gradients reach only the selected representation rows.
inline Var attentive_pool(Var reps, std::span<const std::size_t> indices) {
  std::vector<RowRef> refs;
  refs.reserve(indices.size());
  for (auto i : indices) refs.push_back({reps, i});
  return pick_rows(refs);
}

/// Rows of `a` followed by rows of `b`.
inline Matrix concat_feature_maps(const Matrix& a, const Matrix& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.cols() != b.cols())
    throw ContractError("concat_feature_maps: widths differ (" + std::to_string(a.cols()) +
                        " vs " + std::to_string(b.cols()) + ")");
  Matrix out(a.rows() + b.rows(), a.cols());
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  std::copy(b.data().begin(), b.data().end(), out.data().begin() + a.size());
  return out;
}

inline Var concat_feature_maps(Var a, Var b) { return concat_rows(a, b); }

}  // namespace phrasematch
