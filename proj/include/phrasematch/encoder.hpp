#pragma once

#include <array>
#include <random>
#include <string>
#include <vector>

#include "phrasematch/corpus/embeddings.hpp"
#include "phrasematch/numcore/ops.hpp"
#include "phrasematch/phrasebank.hpp"

namespace phrasematch {

inline constexpr double kInitRange = 0.01;

/// GRU weights with the row-vector convention
///   z   = sigmoid(x Uz + s Wz)
///   r   = sigmoid(x Ur + s Wr)
///   h   = tanh(x Uh + (s o r) Wh)
///   s'  = (1 - z) o h + z o s
/// There are no bias terms.
struct GruParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Parameter Uz, Ur, Uh;  // input_dim x hidden_dim
  Parameter Wz, Wr, Wh;  // hidden_dim x hidden_dim, diversity-regularised

  GruParams() = default;
  GruParams(const std::string& prefix, std::size_t in, std::size_t hidden)
      : input_dim(in), hidden_dim(hidden),
        Uz(prefix + ".Uz", Matrix(in, hidden)), Ur(prefix + ".Ur", Matrix(in, hidden)),
        Uh(prefix + ".Uh", Matrix(in, hidden)),
        Wz(prefix + ".Wz", Matrix(hidden, hidden), true, true),
        Wr(prefix + ".Wr", Matrix(hidden, hidden), true, true),
        Wh(prefix + ".Wh", Matrix(hidden, hidden), true, true) {}

  /// Fills every matrix uniformly from [-range, range], in parameter order.
  void randomize(std::mt19937_64& rng, double range = kInitRange) {
    for (auto* p : parameters())
      for (auto& x : p->value.data()) x = uniform(rng, -range, range);
  }

  std::array<Parameter*, 6> parameters() { return {&Uz, &Ur, &Uh, &Wz, &Wr, &Wh}; }
  std::array<const Parameter*, 6> parameters() const { return {&Uz, &Ur, &Uh, &Wz, &Wr, &Wh}; }
};

/// GruParams bound to one tape; bind once per forward pass and reuse.
struct BoundGru {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Var Uz, Ur, Uh, Wz, Wr, Wh;
};

inline BoundGru bind(Tape& tape, GruParams& p) {
  return {p.input_dim,     p.hidden_dim,    tape.param(p.Uz), tape.param(p.Ur),
          tape.param(p.Uh), tape.param(p.Wz), tape.param(p.Wr), tape.param(p.Wh)};
}

/// One step for a batch of independent rows: x is m x input_dim, s_prev is
/// m x hidden_dim. Rows never interact.
inline Var gru_step(const BoundGru& g, Var x, Var s_prev) {
  const Tape& t = *x.tape;
  if (t.value(x).cols() != g.input_dim)
    throw DimensionError("gru_step: input width " + std::to_string(t.value(x).cols()) +
                         " but GRU expects " + std::to_string(g.input_dim));
  if (t.value(s_prev).cols() != g.hidden_dim || t.value(s_prev).rows() != t.value(x).rows())
    throw DimensionError("gru_step: state shape " + t.value(s_prev).shape() +
                         " does not match input " + t.value(x).shape() + " / hidden " +
                         std::to_string(g.hidden_dim));
  Var z = sigmoid(add(matmul(x, g.Uz), matmul(s_prev, g.Wz)));
  Var r = sigmoid(add(matmul(x, g.Ur), matmul(s_prev, g.Wr)));
  Var h = tanh(add(matmul(x, g.Uh), matmul(hadamard(s_prev, r), g.Wh)));
  return add(hadamard(one_minus(z), h), hadamard(z, s_prev));
}

/// Runs the GRU over the rows of `xs` (T x input_dim) from a zero state and
/// returns the T states s_1 .. s_T, each 1 x hidden_dim.
inline std::vector<Var> encode_sequence(const BoundGru& g, Var xs) {
  Tape& t = *xs.tape;
  const std::size_t steps = t.value(xs).rows();
  require(steps >= 1, "encode_sequence: empty input");
  std::vector<Var> states;
  states.reserve(steps);
  Var s = t.constant(Matrix(1, g.hidden_dim));
  for (std::size_t i = 0; i < steps; ++i) {
    const RowRef ref{xs, i};
    s = gru_step(g, pick_rows(std::span(&ref, 1)), s);
    states.push_back(s);
  }
  return states;
}

/// Representations for every phrase of a sentence, one row per span in
/// reformatted order.
struct PhraseEncoding {
  PhraseSequence phrases;
  Var reps;
};

/// Phrase representations from the rotation layout. Column c of the layout
/// holds the states of all phrases of length c; the rows still inside the
/// sentence at column c are exactly rows 0 .. n - c, so each column is one
/// batched GRU step over a shrinking prefix of rows. Wrap-around cells are
/// never computed.
inline PhraseEncoding encode_phrases(const BoundGru& g, const Sentence& s,
                                     const corpus::EmbeddingTable& emb,
                                     std::size_t max_len = kDefaultMaxPhraseLength) {
  require(!s.empty(), "encode_phrases: empty sentence");
  require(s.indexed(), "encode_phrases: sentence has not been indexed against the embeddings");
  require(emb.dim() == g.input_dim,
          "encode_phrases: embedding dim " + std::to_string(emb.dim()) +
              " does not match GRU input " + std::to_string(g.input_dim));
  Tape& t = *g.Uz.tape;
  const std::size_t n = s.size();
  const std::size_t cols = std::min(max_len, n);

  std::vector<Var> column_states(cols + 1);
  column_states[0] = t.constant(Matrix(n, g.hidden_dim));
  std::vector<std::size_t> ids;
  for (std::size_t c = 1; c <= cols; ++c) {
    const std::size_t active = n - c + 1;
    ids.clear();
    for (std::size_t r = 0; r < active; ++r) ids.push_back(s.token_ids[r + c - 1]);
    Var x = t.constant(emb.gather(ids));
    Var prev = c == 1 ? column_states[0] : top_rows(column_states[c - 1], active);
    column_states[c] = gru_step(g, x, prev);
  }

  PhraseEncoding out{enumerate_phrases(n, max_len), {}};
  std::vector<RowRef> refs;
  refs.reserve(out.phrases.size());
  for (const auto& span : out.phrases.spans) {
    const LayoutCell cell = span_to_cell(span, n);
    refs.push_back({column_states[cell.col], cell.row});
  }
  out.reps = pick_rows(refs);
  return out;
}

// Tape-free conveniences. Each builds and discards a private tape, so they
// are safe to call concurrently on shared, unchanging parameters.

inline Matrix gru_step(GruParams& p, const Matrix& x, const Matrix& s_prev) {
  Tape t;
  const BoundGru g = bind(t, p);
  return t.value(gru_step(g, t.constant(x), t.constant(s_prev)));
}

inline std::vector<Matrix> encode_sequence(GruParams& p, const Matrix& xs) {
  Tape t;
  const BoundGru g = bind(t, p);
  std::vector<Matrix> out;
  for (Var v : encode_sequence(g, t.constant(xs))) out.push_back(t.value(v));
  return out;
}

inline Matrix encode_phrases(GruParams& p, const Sentence& s, const corpus::EmbeddingTable& emb,
                             std::size_t max_len = kDefaultMaxPhraseLength) {
  Tape t;
  const BoundGru g = bind(t, p);
  return t.value(encode_phrases(g, s, emb, max_len).reps);
}

}  // namespace phrasematch
