#include <gtest/gtest.h>

#include <sstream>

#include "test_support.hpp"

using namespace phrasematch;
using namespace testing_support;

TEST(Checkpoint, RoundTripIsBitExact) {
  TaskConfig cfg = tiny_config(Task::AS, 5, 4, 3, 3);
  cfg.pooling.kind = PoolingKind::Full;
  cfg.features = {true, false, true, true};
  Model m(cfg, 42);
  m.randomize(0.7);
  m.classifier_b.value[0] = 1.0 / 3.0;
  std::stringstream ss;
  save_checkpoint(ss, m, {{"epoch", "3"}, {"note", "two words"}});
  const std::string first = ss.str();
  const Checkpoint ck = load_checkpoint(ss);
  EXPECT_EQ(ck.model.config, cfg);
  EXPECT_EQ(ck.model.seed, 42u);
  EXPECT_EQ(ck.metadata.at("note"), "two words");
  const auto pa = m.parameters();
  const auto pb = ck.model.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
  std::stringstream again;
  save_checkpoint(again, ck.model, ck.metadata);
  EXPECT_EQ(again.str(), first);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = scratch_dir("checkpoint");
  Model m(tiny_config(Task::TE), 8);
  save_checkpoint((dir / "m.ckpt").string(), m);
  EXPECT_EQ(load_checkpoint((dir / "m.ckpt").string()).model.classifier_w.value,
            m.classifier_w.value);
  EXPECT_THROW(load_checkpoint((dir / "missing.ckpt").string()), IoError);
  EXPECT_THROW(save_checkpoint((dir / "no" / "such" / "m.ckpt").string(), m), IoError);
}

TEST(Checkpoint, RejectsCorruptInput) {
  Model m(tiny_config(Task::TE), 8);
  std::stringstream ss;
  save_checkpoint(ss, m);
  const std::string good = ss.str();
  auto load = [](const std::string& text) {
    std::stringstream in(text);
    return load_checkpoint(in);
  };
  EXPECT_THROW(load("not-a-checkpoint 1\n"), LoadError);
  EXPECT_THROW(load("phrasematch-checkpoint 2\n"), LoadError);
  EXPECT_THROW(load(good.substr(0, good.size() / 2)), LoadError);
  std::string no_end = good.substr(0, good.rfind("end"));
  EXPECT_THROW(load(no_end), LoadError);
  std::string bad_field = good;
  bad_field.replace(bad_field.find("seed"), 4, "sped");
  EXPECT_THROW(load(bad_field), LoadError);
  std::string bad_shape = good;
  bad_shape.replace(bad_shape.find("hidden 3 3"), 10, "hidden 3 4");
  EXPECT_THROW(load(bad_shape), LoadError);
  EXPECT_THROW(save_checkpoint(ss, m, {{"bad key", "x"}}), ContractError);
}
