#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "test_support.hpp"

using namespace phrasematch;
using namespace testing_support;

namespace {

struct Fixture {
  corpus::EmbeddingTable emb;
  Sentence a, b;
};

Fixture make_fixture(std::uint64_t seed, std::size_t d, std::size_t na, std::size_t nb) {
  std::mt19937_64 rng(seed);
  Fixture f{random_embeddings(rng, 10, d), {}, {}};
  f.a = indexed(random_sentence(rng, na, 10), f.emb);
  f.b = indexed(random_sentence(rng, nb, 10), f.emb);
  return f;
}

std::vector<double> extras(std::size_t n) { return std::vector<double>(n, 0.5); }

}  // namespace

TEST(FeatureWidth, SegmentArithmetic) {
  TaskConfig te = tiny_config(Task::TE, 4, 3, 3);
  EXPECT_EQ(te.feature_width(), 3 * 3 + 2 * 4 + 4 + 4u);
  TaskConfig as = tiny_config(Task::AS, 4, 3, 3);
  EXPECT_EQ(as.feature_width(), 3 * 3 + 2 * 4 + 2 + 4u);
  te.features = {true, false, false, false};
  EXPECT_EQ(te.feature_width(), 9u);
  te.features = {false, false, true, false};
  EXPECT_EQ(te.feature_width(), 4u);
  EXPECT_EQ(Model(tiny_config(Task::TE), 1).classifier_w.value.rows(), 25u);
  EXPECT_EQ(Model(tiny_config(Task::AS), 1).classifier_w.value.cols(), 1u);
}

TEST(FeatureWidth, ParseFeatureSetNames) {
  EXPECT_EQ(parse_feature_set("rep,simi"), (FeatureSet{true, false, true, false}));
  EXPECT_EQ(feature_set_name(parse_feature_set("extra,add")), "add,extra");
  EXPECT_THROW(parse_feature_set("rep,bogus"), ConfigError);
  EXPECT_THROW(parse_feature_set(""), ConfigError);
}

TEST(Simi, IdenticalAndOrthogonalRepresentations) {
  PairForward fw;
  fw.s1 = fw.s2 = Matrix(1, 2, std::vector<double>{0.3, -0.4});
  fw.s1_add = fw.s2_add = Matrix(1, 2, std::vector<double>{1, 2});
  const auto same = simi_features(fw, Task::TE);
  EXPECT_EQ(same, (std::vector<double>{1.0, 1.0, 1.0, 1.0}));
  fw.s1 = Matrix(1, 2, std::vector<double>{1, 0});
  fw.s2 = Matrix(1, 2, std::vector<double>{0, 1});
  const auto orth = simi_features(fw, Task::TE);
  EXPECT_EQ(orth[0], 0.0);
  EXPECT_DOUBLE_EQ(orth[1], 1.0 / (1.0 + std::sqrt(2.0)));
  EXPECT_EQ(simi_features(fw, Task::AS).size(), 2u);
}

TEST(Simi, TapedSegmentAgreesWithPlainFeatures) {
  auto f = make_fixture(2, 4, 4, 5);
  Model m(tiny_config(Task::TE), 3);
  m.randomize(0.5);
  const auto ev = evaluate_pair(m, f.a, f.b, f.emb, extras(4));
  const auto simi = simi_features(ev.info, Task::TE);
  const std::size_t offset = 3 * 3 + 2 * 4;
  for (std::size_t i = 0; i < simi.size(); ++i) EXPECT_NEAR(ev.features[offset + i], simi[i], 1e-12);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(ev.features[offset + 4 + i], 0.5);
}

TEST(Loss, UniformPredictionsAndLabelChecks) {
  Tape t;
  Var te = t.constant(Matrix(1, 3));
  EXPECT_NEAR(t.value(task_loss(te, Task::TE, 2))[0], std::log(3.0), 1e-15);
  Var as = t.constant(Matrix(1, 1));
  EXPECT_NEAR(t.value(task_loss(as, Task::AS, 1))[0], std::log(2.0), 1e-15);
  EXPECT_NEAR(t.value(task_loss(as, Task::AS, 0))[0], std::log(2.0), 1e-15);
  EXPECT_THROW(task_loss(te, Task::TE, 3), ContractError);
  EXPECT_THROW(task_loss(as, Task::AS, 2), ContractError);
  const Prediction p = make_prediction(Task::TE, std::vector<double>{0, 0, 0});
  EXPECT_NEAR(loss(p, Task::TE, 0), std::log(3.0), 1e-15);
  const Prediction q = make_prediction(Task::AS, std::vector<double>{0.0});
  EXPECT_EQ(q.probabilities[0], 0.5);
  EXPECT_EQ(q.predicted_class(), 0u);
}

TEST(Forward, OneTokenSentencesWithLargeK) {
  auto f = make_fixture(4, 4, 1, 1);
  TaskConfig cfg = tiny_config(Task::TE);
  cfg.pooling.k = 5;
  Model m(cfg, 5);
  m.randomize(0.5);
  const auto ev = evaluate_pair(m, f.a, f.b, f.emb, extras(4));
  EXPECT_EQ(ev.info.selected1, (std::vector<std::size_t>{0}));
  EXPECT_EQ(ev.info.selected2, (std::vector<std::size_t>{0}));
  // sp runs over the two-row concatenation of the pooled maps.
  const Matrix reps1 = encode_phrases(m.gru1, f.a, f.emb);
  const Matrix reps2 = encode_phrases(m.gru1, f.b, f.emb);
  EXPECT_EQ(ev.info.sp, encode_sequence(m.gru2, concat_feature_maps(reps1, reps2)).back());
  EXPECT_EQ(ev.info.s1, encode_sequence(m.gru2, reps1).back());
}

TEST(Forward, SelectionSizesFollowPoolingMode) {
  auto f = make_fixture(6, 4, 5, 3);
  for (auto kind : {PoolingKind::KMinMax, PoolingKind::KMaxMax, PoolingKind::Full}) {
    TaskConfig cfg = tiny_config(Task::AS);
    cfg.pooling = {kind, 4};
    Model m(cfg, 7);
    const auto ev = evaluate_pair(m, f.a, f.b, f.emb, extras(4));
    EXPECT_EQ(ev.info.selected1.size(), kind == PoolingKind::Full ? 15u : 4u);
    EXPECT_EQ(ev.info.selected2.size(), kind == PoolingKind::Full ? 6u : 4u);
    EXPECT_EQ(ev.features.cols(), cfg.feature_width());
  }
}

TEST(Forward, SwappingSentencesSwapsSentenceRepresentations) {
  auto f = make_fixture(8, 4, 4, 6);
  Model m(tiny_config(Task::TE), 9);
  m.randomize(0.5);
  const auto ab = evaluate_pair(m, f.a, f.b, f.emb, extras(4));
  const auto ba = evaluate_pair(m, f.b, f.a, f.emb, extras(4));
  EXPECT_EQ(ab.info.s1, ba.info.s2);
  EXPECT_EQ(ab.info.s2, ba.info.s1);
  EXPECT_EQ(ab.info.alignment, transpose(ba.info.alignment));
  EXPECT_EQ(ab.info.selected1, ba.info.selected2);
}

TEST(Forward, DeterministicAndNormalised) {
  auto f = make_fixture(10, 4, 5, 4);
  Model m1(tiny_config(Task::TE), 11), m2(tiny_config(Task::TE), 11);
  const auto e1 = evaluate_pair(m1, f.a, f.b, f.emb, extras(4));
  const auto e2 = evaluate_pair(m2, f.a, f.b, f.emb, extras(4));
  EXPECT_EQ(e1.prediction.logits, e2.prediction.logits);
  const auto& p = e1.prediction.probabilities;
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-15);
  Model other(tiny_config(Task::TE), 12);
  EXPECT_NE(evaluate_pair(other, f.a, f.b, f.emb, extras(4)).prediction.logits,
            e1.prediction.logits);
}

TEST(Forward, RejectsMismatchedInputs) {
  auto f = make_fixture(12, 4, 3, 3);
  Model m(tiny_config(Task::TE), 1);
  EXPECT_THROW(evaluate_pair(m, f.a, f.b, f.emb, extras(3)), ConfigError);
  auto g = make_fixture(12, 5, 3, 3);
  EXPECT_THROW(evaluate_pair(m, g.a, g.b, g.emb, extras(4)), ConfigError);
  EXPECT_THROW(evaluate_pair(m, Sentence{}, f.b, f.emb, extras(4)), ContractError);
  TaskConfig bad = tiny_config(Task::TE);
  bad.pooling.k = 0;
  EXPECT_THROW(Model(bad, 1), ContractError);
}

TEST(Forward, ParametersSeededDeterministically) {
  Model a(tiny_config(Task::AS), 3), b(tiny_config(Task::AS), 3);
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  ASSERT_EQ(pa.size(), 14u);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i]->value, pb[i]->value);
    for (double v : pa[i]->value.data()) EXPECT_LE(std::fabs(v), kInitRange);
  }
  EXPECT_EQ(pa[0]->name, "gru1.Uz");
  EXPECT_EQ(pa[13]->name, "classifier.b");
}
