#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "phrasematch/numcore/tape.hpp"

namespace phrasematch {

namespace detail {

inline Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw ContractError("variable is not bound to a tape");
  return *a.tape;
}

inline Tape& common_tape(Var a, Var b) {
  if (a.tape != b.tape) throw ContractError("operands live on different tapes");
  return tape_of(a);
}

template <class F>
Matrix map(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

template <class F>
Matrix zip(const Matrix& a, const Matrix& b, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace detail

// Linear algebra ---------------------------------------------------------

inline Var matmul(Var a, Var b) {
  Tape& t = detail::common_tape(a, b);
  Matrix out = multiply(t.value(a), t.value(b));
  const std::array in{a, b};
  return t.record(OpKind::MatMul, std::move(out), in, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate(a, multiply(g, transpose(t.value(b))));
    if (t.needs_grad(b)) t.accumulate(b, multiply(transpose(t.value(a)), g));
  });
}

inline Var add(Var a, Var b) {
  Tape& t = detail::common_tape(a, b);
  require_same_shape(t.value(a), t.value(b), "add");
  Matrix out = detail::zip(t.value(a), t.value(b), [](double x, double y) { return x + y; });
  const std::array in{a, b};
  return t.record(OpKind::Add, std::move(out), in, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

inline Var sub(Var a, Var b) {
  Tape& t = detail::common_tape(a, b);
  require_same_shape(t.value(a), t.value(b), "sub");
  Matrix out = detail::zip(t.value(a), t.value(b), [](double x, double y) { return x - y; });
  const std::array in{a, b};
  return t.record(OpKind::Sub, std::move(out), in, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, detail::map(g, [](double x) { return -x; }));
  });
}

inline Var hadamard(Var a, Var b) {
  Tape& t = detail::common_tape(a, b);
  require_same_shape(t.value(a), t.value(b), "hadamard");
  Matrix out = detail::zip(t.value(a), t.value(b), [](double x, double y) { return x * y; });
  const std::array in{a, b};
  return t.record(OpKind::Hadamard, std::move(out), in, [a, b](Tape& t, const Matrix& g) {
    auto mul = [](double x, double y) { return x * y; };
    if (t.needs_grad(a)) t.accumulate(a, detail::zip(g, t.value(b), mul));
    if (t.needs_grad(b)) t.accumulate(b, detail::zip(g, t.value(a), mul));
  });
}

inline Var sigmoid(Var a) {
  Tape& t = detail::tape_of(a);
  Matrix out = detail::map(t.value(a), detail::sigmoid);
  const std::array in{a};
  Matrix y = out;
  return t.record(OpKind::Sigmoid, std::move(out), in,
                  [a, y = std::move(y)](Tape& t, const Matrix& g) {
                    t.accumulate(a, detail::zip(g, y, [](double gi, double s) {
                                   return gi * s * (1.0 - s);
                                 }));
                  });
}

inline Var tanh(Var a) {
  Tape& t = detail::tape_of(a);
  Matrix out = detail::map(t.value(a), [](double x) { return std::tanh(x); });
  const std::array in{a};
  Matrix y = out;
  return t.record(OpKind::Tanh, std::move(out), in,
                  [a, y = std::move(y)](Tape& t, const Matrix& g) {
                    t.accumulate(a, detail::zip(g, y, [](double gi, double h) {
                                   return gi * (1.0 - h * h);
                                 }));
                  });
}

/// 1 - a, entrywise.
inline Var one_minus(Var a) {
  Tape& t = detail::tape_of(a);
  Matrix out = detail::map(t.value(a), [](double x) { return 1.0 - x; });
  const std::array in{a};
  return t.record(OpKind::OneMinus, std::move(out), in, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, detail::map(g, [](double x) { return -x; }));
  });
}

inline Var scale(Var a, double c) {
  Tape& t = detail::tape_of(a);
  Matrix out = detail::map(t.value(a), [c](double x) { return c * x; });
  const std::array in{a};
  return t.record(OpKind::Scale, std::move(out), in, [a, c](Tape& t, const Matrix& g) {
    t.accumulate(a, detail::map(g, [c](double x) { return c * x; }));
  });
}

/// a (m x n) plus row vector b (1 x n) added to every row.
inline Var add_row_broadcast(Var a, Var b) {
  Tape& t = detail::common_tape(a, b);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (bv.rows() != 1 || bv.cols() != av.cols())
    throw DimensionError("add_row_broadcast: shape mismatch " + av.shape() + " + " + bv.shape());
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
  const std::array in{a, b};
  return t.record(OpKind::AddRowBroadcast, std::move(out), in,
                  [a, b](Tape& t, const Matrix& g) {
                    t.accumulate(a, g);
                    Matrix gb(1, g.cols());
                    for (std::size_t i = 0; i < g.rows(); ++i)
                      for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
                    t.accumulate(b, gb);
                  });
}

// Row plumbing -------------------------------------------------------------

/// First `count` rows of `a`.
inline Var top_rows(Var a, std::size_t count) {
  Tape& t = detail::tape_of(a);
  const Matrix& av = t.value(a);
  if (count > av.rows())
    throw DimensionError("top_rows: " + std::to_string(count) + " rows requested from " +
                         av.shape());
  Matrix out(count, av.cols());
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j);
  const std::array in{a};
  return t.record(OpKind::TopRows, std::move(out), in, [a](Tape& t, const Matrix& g) {
    const Matrix& av = t.value(a);
    Matrix ga(av.rows(), av.cols());
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) = g(i, j);
    t.accumulate(a, ga);
  });
}

/// A source node and a row index within it.
struct RowRef {
  Var source;
  std::size_t row = 0;
};

/// Stacks the referenced rows, in order, into a new matrix. All sources must
/// share one column count.
inline Var pick_rows(std::span<const RowRef> refs) {
  if (refs.empty()) throw ContractError("pick_rows: no rows requested");
  Tape& t = detail::tape_of(refs.front().source);
  const std::size_t width = t.value(refs.front().source).cols();
  Matrix out(refs.size(), width);
  std::vector<Var> inputs;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i].source.tape != &t) throw ContractError("pick_rows: rows from different tapes");
    const Matrix& src = t.value(refs[i].source);
    if (src.cols() != width)
      throw DimensionError("pick_rows: width " + std::to_string(src.cols()) + " vs " +
                           std::to_string(width));
    if (refs[i].row >= src.rows())
      throw DimensionError("pick_rows: row " + std::to_string(refs[i].row) + " outside " +
                           src.shape());
    for (std::size_t j = 0; j < width; ++j) out(i, j) = src(refs[i].row, j);
    inputs.push_back(refs[i].source);
  }
  std::vector<RowRef> saved(refs.begin(), refs.end());
  return t.record(OpKind::PickRows, std::move(out), inputs,
                  [saved = std::move(saved)](Tape& t, const Matrix& g) {
                    for (std::size_t i = 0; i < saved.size(); ++i) {
                      const Var src = saved[i].source;
                      if (!t.needs_grad(src)) continue;
                      const Matrix& sv = t.value(src);
                      Matrix gs(sv.rows(), sv.cols());
                      for (std::size_t j = 0; j < g.cols(); ++j) gs(saved[i].row, j) = g(i, j);
                      t.accumulate(src, gs);
                    }
                  });
}

/// Rows of `a` followed by rows of `b`. Either may have zero rows.
inline Var concat_rows(Var a, Var b) {
  Tape& t = detail::common_tape(a, b);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.cols() != bv.cols() && !av.empty() && !bv.empty())
    throw DimensionError("concat_rows: width mismatch " + av.shape() + " vs " + bv.shape());
  const std::size_t width = av.empty() ? bv.cols() : av.cols();
  Matrix out(av.rows() + bv.rows(), width);
  std::copy(av.data().begin(), av.data().end(), out.data().begin());
  std::copy(bv.data().begin(), bv.data().end(), out.data().begin() + av.size());
  const std::array in{a, b};
  return t.record(OpKind::ConcatRows, std::move(out), in, [a, b](Tape& t, const Matrix& g) {
    const Matrix& av = t.value(a);
    const Matrix& bv = t.value(b);
    Matrix ga(av.rows(), av.cols()), gb(bv.rows(), bv.cols());
    std::copy(g.data().begin(), g.data().begin() + ga.size(), ga.data().begin());
    std::copy(g.data().begin() + ga.size(), g.data().end(), gb.data().begin());
    t.accumulate(a, ga);
    t.accumulate(b, gb);
  });
}

/// Horizontal concatenation of row vectors into one 1 x sum(cols) row.
inline Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: nothing to concatenate");
  Tape& t = detail::tape_of(parts.front());
  std::size_t width = 0;
  for (const auto& p : parts) {
    if (p.tape != &t) throw ContractError("concat_cols: parts from different tapes");
    if (t.value(p).rows() != 1)
      throw DimensionError("concat_cols: expected row vectors, got " + t.value(p).shape());
    width += t.value(p).cols();
  }
  Matrix out(1, width);
  std::size_t off = 0;
  for (const auto& p : parts)
    for (double x : t.value(p).data()) out[off++] = x;
  std::vector<Var> saved(parts.begin(), parts.end());
  return t.record(OpKind::ConcatCols, std::move(out), saved,
                  [saved](Tape& t, const Matrix& g) {
                    std::size_t off = 0;
                    for (const auto& p : saved) {
                      const std::size_t n = t.value(p).cols();
                      if (t.needs_grad(p)) {
                        Matrix gp(1, n);
                        for (std::size_t j = 0; j < n; ++j) gp[j] = g[off + j];
                        t.accumulate(p, gp);
                      }
                      off += n;
                    }
                  });
}

// Similarities -------------------------------------------------------------

/// Cosine of two row vectors as a 1x1 node; 0 with zero gradient when either
/// vector is zero.
inline Var cosine(Var a, Var b) {
  Tape& t = detail::common_tape(a, b);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require_same_shape(av, bv, "cosine");
  if (av.rows() != 1) throw DimensionError("cosine: expected row vectors, got " + av.shape());
  Matrix out(1, 1, phrasematch::cosine(av.row(0), bv.row(0)));
  const std::array in{a, b};
  return t.record(OpKind::Cosine, std::move(out), in, [a, b](Tape& t, const Matrix& g) {
    const Matrix& av = t.value(a);
    const Matrix& bv = t.value(b);
    const double na = norm(av.data()), nb = norm(bv.data());
    if (na == 0.0 || nb == 0.0) return;
    const double c = dot(av.data(), bv.data()) / (na * nb);
    const double g0 = g[0];
    Matrix ga(1, av.cols()), gb(1, av.cols());
    for (std::size_t j = 0; j < av.cols(); ++j) {
      ga[j] = g0 * (bv[j] / (na * nb) - c * av[j] / (na * na));
      gb[j] = g0 * (av[j] / (na * nb) - c * bv[j] / (nb * nb));
    }
    t.accumulate(a, ga);
    t.accumulate(b, gb);
  });
}

/// 1 / (1 + ||a - b||) of two row vectors as a 1x1 node. At a == b the
/// distance is not differentiable; the gradient there is taken as 0.
inline Var inverse_distance(Var a, Var b) {
  Tape& t = detail::common_tape(a, b);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  require_same_shape(av, bv, "inverse_distance");
  if (av.rows() != 1)
    throw DimensionError("inverse_distance: expected row vectors, got " + av.shape());
  double sq = 0.0;
  for (std::size_t j = 0; j < av.cols(); ++j) sq += (av[j] - bv[j]) * (av[j] - bv[j]);
  const double dist = std::sqrt(sq);
  Matrix out(1, 1, 1.0 / (1.0 + dist));
  const std::array in{a, b};
  return t.record(OpKind::InverseDistance, std::move(out), in,
                  [a, b, dist](Tape& t, const Matrix& g) {
                    if (dist == 0.0) return;
                    const Matrix& av = t.value(a);
                    const Matrix& bv = t.value(b);
                    const double coef = -g[0] / ((1.0 + dist) * (1.0 + dist) * dist);
                    Matrix ga(1, av.cols()), gb(1, av.cols());
                    for (std::size_t j = 0; j < av.cols(); ++j) {
                      ga[j] = coef * (av[j] - bv[j]);
                      gb[j] = -ga[j];
                    }
                    t.accumulate(a, ga);
                    t.accumulate(b, gb);
                  });
}

// Losses and penalties -----------------------------------------------------

inline std::vector<double> softmax(std::span<const double> logits) {
  double mx = logits[0];
  for (double x : logits) mx = std::max(mx, x);
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (p[i] = std::exp(logits[i] - mx));
  for (auto& x : p) x /= z;
  return p;
}

/// -log softmax(logits)[label] for a 1 x C logit row.
inline Var softmax_cross_entropy(Var logits, std::size_t label) {
  Tape& t = detail::tape_of(logits);
  const Matrix& lv = t.value(logits);
  if (lv.rows() != 1) throw DimensionError("softmax_cross_entropy: logits must be a row");
  require(label < lv.cols(), "softmax_cross_entropy: label " + std::to_string(label) +
                                 " outside " + std::to_string(lv.cols()) + " classes");
  double mx = lv[0];
  for (double x : lv.data()) mx = std::max(mx, x);
  double z = 0.0;
  for (double x : lv.data()) z += std::exp(x - mx);
  Matrix out(1, 1, mx + std::log(z) - lv[label]);
  const std::array in{logits};
  return t.record(OpKind::SoftmaxCrossEntropy, std::move(out), in,
                  [logits, label](Tape& t, const Matrix& g) {
                    auto p = softmax(t.value(logits).data());
                    Matrix gl(1, p.size());
                    for (std::size_t j = 0; j < p.size(); ++j)
                      gl[j] = g[0] * (p[j] - (j == label ? 1.0 : 0.0));
                    t.accumulate(logits, gl);
                  });
}

/// Binary cross-entropy of sigmoid(logit) against a 0/1 label, 1x1 input.
inline Var sigmoid_cross_entropy(Var logit, int label) {
  Tape& t = detail::tape_of(logit);
  const Matrix& lv = t.value(logit);
  if (lv.size() != 1) throw DimensionError("sigmoid_cross_entropy: logit must be 1x1");
  require(label == 0 || label == 1, "sigmoid_cross_entropy: label must be 0 or 1");
  const double x = lv[0];
  // softplus(x) - y x, evaluated without overflow
  const double softplus = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  Matrix out(1, 1, softplus - label * x);
  const std::array in{logit};
  return t.record(OpKind::SigmoidCrossEntropy, std::move(out), in,
                  [logit, label](Tape& t, const Matrix& g) {
                    const double p = detail::sigmoid(t.value(logit)[0]);
                    t.accumulate(logit, Matrix(1, 1, g[0] * (p - label)));
                  });
}

/// Squared Frobenius norm as a 1x1 node.
inline Var sum_squares(Var a) {
  Tape& t = detail::tape_of(a);
  double s = 0.0;
  for (double x : t.value(a).data()) s += x * x;
  const std::array in{a};
  return t.record(OpKind::SumSquares, Matrix(1, 1, s), in, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, detail::map(t.value(a), [g0 = g[0]](double x) { return 2.0 * g0 * x; }));
  });
}

/// Sum over row pairs i < j of cos^2(row_i, row_j). Pairs involving a
/// zero-norm row contribute 0.
inline double row_cosine_squares_value(const Matrix& m) {
  std::vector<double> norms(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) norms[i] = norm(m.row(i));
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (norms[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < m.rows(); ++j) {
      if (norms[j] == 0.0) continue;
      const double c = dot(m.row(i), m.row(j)) / (norms[i] * norms[j]);
      s += c * c;
    }
  }
  return s;
}

inline Var row_cosine_squares(Var a) {
  Tape& t = detail::tape_of(a);
  const std::array in{a};
  return t.record(
      OpKind::RowCosineSquares, Matrix(1, 1, row_cosine_squares_value(t.value(a))), in,
      [a](Tape& t, const Matrix& g) {
        const Matrix& m = t.value(a);
        const std::size_t rows = m.rows(), cols = m.cols();
        std::vector<double> norms(rows);
        for (std::size_t i = 0; i < rows; ++i) norms[i] = norm(m.row(i));
        Matrix ga(rows, cols);
        // d cos^2(u_i,u_j) / d u_i = 2 c (u_j/(n_i n_j) - c u_i / n_i^2)
        for (std::size_t i = 0; i < rows; ++i) {
          if (norms[i] == 0.0) continue;
          for (std::size_t j = i + 1; j < rows; ++j) {
            if (norms[j] == 0.0) continue;
            const double ninj = norms[i] * norms[j];
            const double c = dot(m.row(i), m.row(j)) / ninj;
            const double w = 2.0 * g[0] * c;
            for (std::size_t q = 0; q < cols; ++q) {
              ga(i, q) += w * (m(j, q) / ninj - c * m(i, q) / (norms[i] * norms[i]));
              ga(j, q) += w * (m(i, q) / ninj - c * m(j, q) / (norms[j] * norms[j]));
            }
          }
        }
        t.accumulate(a, ga);
      });
}

}  // namespace phrasematch
