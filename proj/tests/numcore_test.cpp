#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace phrasematch;
using namespace testing_support;

namespace {

Matrix triple_loop(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Matrix value_of(Var v) { return v.tape->value(v); }

}  // namespace

TEST(Matrix, ConstructionChecksDataLength) {
  EXPECT_THROW(Matrix(2, 3, std::vector<double>(5)), DimensionError);
  Matrix m(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m.size(), m.rows() * m.cols());
  EXPECT_EQ(m(1, 0), 4.0);
  EXPECT_THROW((Matrix{{1, 2}, {3}}), DimensionError);
}

TEST(Matrix, IdentityTimesMatrixIsMatrix) {
  Tape t;
  const Matrix m{{1.5, -2}, {0.25, 7}};
  EXPECT_EQ(value_of(matmul(t.constant(Matrix::identity(2)), t.constant(m))), m);
}

TEST(Matrix, HandProduct) {
  Tape t;
  Var c = matmul(t.constant(Matrix{{1, 2}}), t.constant(Matrix{{3}, {4}}));
  EXPECT_EQ(value_of(c), (Matrix{{11}}));
}

TEST(Matrix, ProductMatchesTripleLoopOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_matrix(rng, 3, 4), b = random_matrix(rng, 4, 2);
    Tape t;
    const Matrix c = value_of(matmul(t.constant(a), t.constant(b)));
    const Matrix o = triple_loop(a, b);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], o[i], 1e-14);
  }
}

TEST(Matrix, BatchedRowsEqualSingleRowProducts) {
  std::mt19937_64 rng(2);
  const Matrix a = random_matrix(rng, 5, 6), b = random_matrix(rng, 6, 3);
  const Matrix full = multiply(a, b);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const Matrix one = multiply(Matrix::row_vector(a.row(r)), b);
    for (std::size_t j = 0; j < b.cols(); ++j) EXPECT_EQ(one(0, j), full(r, j));
  }
}

TEST(Matrix, ShapeMismatchNamesBothShapes) {
  Tape t;
  try {
    matmul(t.constant(Matrix(2, 3)), t.constant(Matrix(2, 3)));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3 x 2x3"), std::string::npos) << msg;
  }
  EXPECT_THROW(add(t.constant(Matrix(2, 2)), t.constant(Matrix(2, 3))), DimensionError);
  EXPECT_THROW(sub(t.constant(Matrix(1, 2)), t.constant(Matrix(2, 1))), DimensionError);
  EXPECT_THROW(hadamard(t.constant(Matrix(1, 2)), t.constant(Matrix(1, 3))), DimensionError);
}

TEST(Elementwise, SigmoidAndTanhAtZero) {
  Tape t;
  const Matrix z(2, 3);
  const Matrix s = value_of(sigmoid(t.constant(z)));
  const Matrix h = value_of(tanh(t.constant(z)));
  for (double x : s.data()) EXPECT_EQ(x, 0.5);
  for (double x : h.data()) EXPECT_EQ(x, 0.0);
}

TEST(Elementwise, MatchScalarOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 2, 3, -4, 4), b = random_matrix(rng, 2, 3, -4, 4);
    Tape t;
    Var va = t.constant(a), vb = t.constant(b);
    const Matrix h = value_of(hadamard(va, vb)), s = value_of(add(va, vb)),
                 d = value_of(sub(va, vb)), om = value_of(one_minus(va)),
                 sg = value_of(sigmoid(va)), th = value_of(tanh(va)), sc = value_of(scale(va, 2.5));
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(h[i], a[i] * b[i]);
      EXPECT_EQ(s[i], a[i] + b[i]);
      EXPECT_EQ(d[i], a[i] - b[i]);
      EXPECT_EQ(om[i], 1.0 - a[i]);
      EXPECT_NEAR(sg[i], 1.0 / (1.0 + std::exp(-a[i])), 1e-15);
      EXPECT_NEAR(th[i], std::tanh(a[i]), 1e-15);
      EXPECT_EQ(sc[i], 2.5 * a[i]);
    }
  }
}

TEST(Elementwise, OutputsStayFinite) {
  Tape t;
  Var big = t.constant(Matrix{{-800, 800, 0}});
  EXPECT_TRUE(value_of(sigmoid(big)).all_finite());
  EXPECT_TRUE(value_of(tanh(big)).all_finite());
  EXPECT_TRUE(value_of(sigmoid_cross_entropy(t.constant(Matrix{{800}}), 0)).all_finite());
  EXPECT_TRUE(value_of(softmax_cross_entropy(big, 0)).all_finite());
}

TEST(Cosine, SelfSimilarityIsExactlyOne) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const Matrix v = random_matrix(rng, 1, 1 + trial % 9, -3, 3);
    EXPECT_EQ(cosine(v.row(0), v.row(0)), 1.0);
  }
  const Matrix z(1, 4);
  const Matrix v{{1, 2, 3, 4}};
  EXPECT_EQ(cosine(z.row(0), v.row(0)), 0.0);
}

// Every differentiable op, checked against central differences.
TEST(Gradients, EachOpMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  auto p = [&](const char* name, std::size_t r, std::size_t c) {
    return Parameter(name, random_matrix(rng, r, c));
  };
  using Leaves = const std::vector<Var>&;
  struct Case {
    const char* name;
    std::vector<Parameter> params;
    std::function<Var(Tape&, Leaves)> build;
  };
  std::vector<Case> cases;
  cases.push_back({"matmul", {p("a", 3, 4), p("b", 4, 2)}, [](Tape&, Leaves v) { return matmul(v[0], v[1]); }});
  cases.push_back({"add", {p("a", 2, 3), p("b", 2, 3)}, [](Tape&, Leaves v) { return add(v[0], v[1]); }});
  cases.push_back({"sub", {p("a", 2, 3), p("b", 2, 3)}, [](Tape&, Leaves v) { return sub(v[0], v[1]); }});
  cases.push_back({"hadamard", {p("a", 2, 3), p("b", 2, 3)}, [](Tape&, Leaves v) { return hadamard(v[0], v[1]); }});
  cases.push_back({"sigmoid", {p("a", 2, 3)}, [](Tape&, Leaves v) { return sigmoid(v[0]); }});
  cases.push_back({"tanh", {p("a", 2, 3)}, [](Tape&, Leaves v) { return tanh(v[0]); }});
  cases.push_back({"one_minus", {p("a", 2, 3)}, [](Tape&, Leaves v) { return one_minus(v[0]); }});
  cases.push_back({"scale", {p("a", 2, 3)}, [](Tape&, Leaves v) { return scale(v[0], -1.7); }});
  cases.push_back({"add_row_broadcast", {p("a", 3, 2), p("b", 1, 2)},
                   [](Tape&, Leaves v) { return add_row_broadcast(v[0], v[1]); }});
  cases.push_back({"top_rows", {p("a", 4, 3)}, [](Tape&, Leaves v) { return top_rows(v[0], 2); }});
  cases.push_back({"pick_rows", {p("a", 3, 2), p("b", 2, 2)}, [](Tape&, Leaves v) {
                     const std::vector<RowRef> refs{{v[0], 2}, {v[1], 0}, {v[0], 2}, {v[0], 0}};
                     return pick_rows(refs);
                   }});
  cases.push_back({"concat_rows", {p("a", 2, 3), p("b", 1, 3)},
                   [](Tape&, Leaves v) { return concat_rows(v[0], v[1]); }});
  cases.push_back({"concat_cols", {p("a", 1, 3), p("b", 1, 2)},
                   [](Tape& t, Leaves v) {
                     const std::vector<Var> parts{v[0], t.constant(Matrix{{9}}), v[1]};
                     return concat_cols(parts);
                   }});
  cases.push_back({"cosine", {p("a", 1, 5), p("b", 1, 5)}, [](Tape&, Leaves v) { return cosine(v[0], v[1]); }});
  cases.push_back({"inverse_distance", {p("a", 1, 5), p("b", 1, 5)},
                   [](Tape&, Leaves v) { return inverse_distance(v[0], v[1]); }});
  cases.push_back({"softmax_cross_entropy", {p("a", 1, 3)},
                   [](Tape&, Leaves v) { return softmax_cross_entropy(v[0], 2); }});
  cases.push_back({"sigmoid_cross_entropy_pos", {p("a", 1, 1)},
                   [](Tape&, Leaves v) { return sigmoid_cross_entropy(v[0], 1); }});
  cases.push_back({"sigmoid_cross_entropy_neg", {p("a", 1, 1)},
                   [](Tape&, Leaves v) { return sigmoid_cross_entropy(v[0], 0); }});
  cases.push_back({"sum_squares", {p("a", 3, 3)}, [](Tape&, Leaves v) { return sum_squares(v[0]); }});
  cases.push_back({"row_cosine_squares", {p("a", 4, 3)},
                   [](Tape&, Leaves v) { return row_cosine_squares(v[0]); }});
  for (auto& c : cases) EXPECT_LT(op_gradient_error(c.params, c.build), 1e-6) << c.name;
}

TEST(Gradients, SharedInputAccumulates) {
  Parameter a("a", Matrix{{2.0}});
  Tape t;
  Var x = t.param(a);
  Var y = add(hadamard(x, x), x);  // x^2 + x
  t.backward(y);
  EXPECT_EQ(a.grad[0], 5.0);
}

TEST(Tape, BackwardVisitsNodesInReverseOrder) {
  Parameter a("a", Matrix{{1.0}});
  Tape t;
  std::vector<int> visited;
  Var cur = t.param(a);
  for (int i = 0; i < 6; ++i) {
    const std::array in{cur};
    cur = t.record(OpKind::Custom, t.value(cur), in, [i, prev = cur, &visited](Tape& tp, const Matrix& g) {
      visited.push_back(i);
      tp.accumulate(prev, g);
    });
  }
  t.backward(cur);
  EXPECT_EQ(visited, (std::vector<int>{5, 4, 3, 2, 1, 0}));
  EXPECT_EQ(a.grad[0], 1.0);
}

TEST(Tape, BackwardContracts) {
  Parameter a("a", Matrix{{1.0, 2.0}});
  Tape t, other;
  Var x = t.param(a);
  EXPECT_THROW(t.backward(x), ContractError);  // not a scalar
  Var s = sum_squares(x);
  EXPECT_THROW(other.backward(s), ContractError);  // foreign tape
  t.backward(s);
  EXPECT_THROW(t.backward(s), ContractError);  // replayed
  EXPECT_THROW(add(s, other.constant(Matrix(1, 1))), ContractError);
}

TEST(Tape, FrozenParametersReceiveNoGradient) {
  Parameter a("a", Matrix{{1.0, 2.0}}, false);
  Parameter b("b", Matrix{{3.0, 4.0}});
  Tape t;
  Var loss = sum_squares(hadamard(t.param(a), t.param(b)));
  t.backward(loss);
  EXPECT_EQ(a.grad, Matrix(1, 2));
  EXPECT_NE(b.grad, Matrix(1, 2));
}

TEST(Tape, FaultInjectionScalesOneRule) {
  Parameter a("a", Matrix{{1.5}});
  for (bool faulty : {false, true}) {
    a.zero_grad();
    Tape t;
    if (faulty) t.inject_fault(OpKind::SumSquares);
    t.backward(sum_squares(t.param(a)));
    EXPECT_EQ(a.grad[0], (faulty ? Tape::fault_scale : 1.0) * 3.0);
  }
}

TEST(Parameter, GradShapeAndZeroing) {
  std::mt19937_64 rng(6);
  std::vector<Parameter> ps{Parameter("a", random_matrix(rng, 2, 3)), Parameter("b", random_matrix(rng, 4, 1))};
  std::vector<Parameter*> ptrs{&ps[0], &ps[1]};
  Tape t;
  t.backward(add(sum_squares(t.param(ps[0])), sum_squares(t.param(ps[1]))));
  for (auto& p : ps) EXPECT_TRUE(p.grad.same_shape(p.value));
  zero_grads(ptrs);
  for (auto& p : ps)
    for (double g : p.grad.data()) EXPECT_EQ(g, 0.0);
}

TEST(Adam, MomentsStartAtZeroAndStepsCount) {
  Parameter a("a", Matrix{{1.0, -2.0}});
  std::vector<Parameter*> ps{&a};
  AdamState adam(ps);
  EXPECT_EQ(adam.steps(), 0u);
  EXPECT_EQ(adam.first_moment(0), Matrix(1, 2));
  EXPECT_EQ(adam.second_moment(0), Matrix(1, 2));
  EXPECT_EQ(adam.options().beta1, 0.9);
  EXPECT_EQ(adam.options().beta2, 0.999);
  for (std::uint64_t i = 1; i <= 3; ++i) {
    a.grad = Matrix{{0.5, -0.25}};
    adam.step(ps);
    EXPECT_EQ(adam.steps(), i);
  }
}

TEST(Adam, MatchesScalarOracle) {
  const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Parameter a("a", Matrix{{0.3}});
  std::vector<Parameter*> ps{&a};
  AdamState adam(ps, {lr, b1, b2, eps});
  double x = 0.3, m = 0.0, v = 0.0;
  const double grads[] = {0.5, -1.0, 2.0, 0.0, 0.1};
  for (int t = 1; t <= 5; ++t) {
    const double g = grads[t - 1];
    a.grad = Matrix{{g}};
    adam.step(ps);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    x -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    EXPECT_NEAR(a.value[0], x, 1e-15);
  }
  // First bias-corrected step moves by lr regardless of gradient scale.
  Parameter b("b", Matrix{{0.0}});
  std::vector<Parameter*> pb{&b};
  AdamState fresh(pb, {lr});
  b.grad = Matrix{{1234.5}};
  fresh.step(pb);
  EXPECT_NEAR(b.value[0], -lr, 1e-12);
}

TEST(Adam, SkipsFrozenAndRejectsChangedLists) {
  Parameter a("a", Matrix{{1.0}}, false);
  Parameter b("b", Matrix{{1.0}});
  std::vector<Parameter*> ps{&a, &b};
  AdamState adam(ps);
  a.grad = Matrix{{1.0}};
  b.grad = Matrix{{1.0}};
  adam.step(ps);
  EXPECT_EQ(a.value[0], 1.0);
  EXPECT_NE(b.value[0], 1.0);
  std::vector<Parameter*> fewer{&b};
  EXPECT_THROW(adam.step(fewer), ContractError);
}

TEST(Regularization, MatchesIndependentOracle) {
  std::mt19937_64 rng(7);
  Parameter w("w", random_matrix(rng, 4, 3), true, true);
  Parameter u("u", random_matrix(rng, 2, 3));
  Parameter frozen("f", random_matrix(rng, 2, 2), false, true);
  std::vector<Parameter*> ps{&w, &u, &frozen};
  const double l2 = 0.0006, div = 0.06;
  double sq = 0.0;
  for (auto* p : {&w, &u})
    for (double x : p->value.data()) sq += x * x;
  double cs = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) {
      double d = 0, ni = 0, nj = 0;
      for (std::size_t c = 0; c < 3; ++c) {
        d += w.value(i, c) * w.value(j, c);
        ni += w.value(i, c) * w.value(i, c);
        nj += w.value(j, c) * w.value(j, c);
      }
      cs += d * d / (ni * nj);
    }
  EXPECT_NEAR(regularization_value(ps, l2, div), l2 * sq + div * cs, 1e-14);
  EXPECT_EQ(regularization_value(ps, 0.0, 0.0), 0.0);
  EXPECT_THROW(regularization_value(ps, -1.0, 0.0), ContractError);
}

TEST(Regularization, OrthogonalRowsHaveNoDiversityPenalty) {
  Parameter w("w", Matrix{{2, 0, 0}, {0, -3, 0}, {0, 0, 0.5}}, true, true);
  std::vector<Parameter*> ps{&w};
  EXPECT_EQ(regularization_value(ps, 0.0, 1.0), 0.0);
  Parameter v("v", Matrix{{1, 1}, {2, 2}}, true, true);
  std::vector<Parameter*> pv{&v};
  EXPECT_NEAR(regularization_value(pv, 0.0, 1.0), 1.0, 1e-15);
}

TEST(Regularization, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  std::vector<Parameter> ps{Parameter("w", random_matrix(rng, 3, 3), true, true),
                            Parameter("u", random_matrix(rng, 2, 3))};
  const double err = op_gradient_error(ps, [&](Tape& t, const std::vector<Var>&) {
    std::vector<Parameter*> ptrs{&ps[0], &ps[1]};
    return regularization_loss(t, ptrs, 0.01, 0.5);
  });
  EXPECT_LT(err, 1e-6);
}

TEST(Random, UniformDrawsAreDeterministicAndInRange) {
  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = uniform01(a);
    EXPECT_EQ(x, uniform01(b));
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  std::mt19937_64 r(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(uniform_index(r, 7), 7u);
}
