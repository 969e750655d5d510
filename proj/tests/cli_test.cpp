#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>

#include "test_support.hpp"

using namespace testing_support;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

/// Runs the CLI with `args`, capturing stdout and stderr in `dir`.
RunResult run_cli(const std::filesystem::path& dir, const std::string& args) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + PHRASEMATCH_CLI + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out.string());
  r.err = read_file(err.string());
  return r;
}

/// Data flags only; `eval` takes the model configuration from the checkpoint.
std::string te_files() {
  return "--emb " + data_path("toy_emb4.txt") + " --train " + data_path("toy_sick_train.tsv") +
         " --dev " + data_path("toy_sick_dev.tsv") + " --test " + data_path("toy_sick_dev.tsv");
}

std::string te_data_args() { return "--task te --emb-dim 4 --hidden 3,3 --k 2 " + te_files(); }

std::string as_data_args() {
  return "--task as --emb " + data_path("toy_emb4.txt") + " --emb-dim 4 --hidden 3,3 --k 2" +
         " --train " + data_path("toy_wikiqa_train.tsv") + " --dev " +
         data_path("toy_wikiqa_dev.tsv") + " --test " + data_path("toy_wikiqa_dev.tsv");
}

bool is_error_line(const std::string& err, const std::string& kind) {
  const auto pos = err.find("error\t" + kind + "\t");
  return pos != std::string::npos && err.find('\n', pos) == err.size() - 1;
}

}  // namespace

TEST(Cli, TrainTwiceGivesIdenticalOutputs) {
  const auto dir = scratch_dir("cli_train");
  std::string tsv[2], ckpt[2], preds[2];
  for (int i = 0; i < 2; ++i) {
    const auto sub = dir / std::to_string(i);
    std::filesystem::create_directories(sub);
    const auto r = run_cli(sub, "train " + te_data_args() + " --epochs 2 --lr 0.01 --checkpoint " +
                                    (sub / "m.ckpt").string() + " --out " +
                                    (sub / "pred.tsv").string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    tsv[i] = r.out;
    ckpt[i] = read_file((sub / "m.ckpt").string());
    preds[i] = read_file((sub / "pred.tsv").string());
  }
  EXPECT_EQ(tsv[0], tsv[1]);
  EXPECT_EQ(ckpt[0], ckpt[1]);
  EXPECT_EQ(preds[0], preds[1]);
  EXPECT_FALSE(ckpt[0].empty());
  EXPECT_NE(tsv[0].find("epoch\t1\t"), std::string::npos) << tsv[0];
  EXPECT_NE(tsv[0].find("best\t"), std::string::npos);
  EXPECT_NE(tsv[0].find("test\t"), std::string::npos);

  const auto eval = run_cli(dir, "eval " + te_files() + " --checkpoint " +
                                     (dir / "0" / "m.ckpt").string());
  ASSERT_EQ(eval.exit_code, 0) << eval.err;
  EXPECT_NE(eval.out.find("dev\t"), std::string::npos) << eval.out;
  const auto eval2 = run_cli(dir, "eval " + te_files() + " --checkpoint " +
                                      (dir / "1" / "m.ckpt").string());
  EXPECT_EQ(eval.out, eval2.out);
}

TEST(Cli, EvalReproducesTrainTestMetricsForAnySeed) {
  const auto dir = scratch_dir("cli_eval_seed");
  const auto ckpt = (dir / "m.ckpt").string();
  const auto trained = run_cli(dir, "train " + te_data_args() +
                                        " --seed 5 --epochs 2 --lr 0.05 --checkpoint " + ckpt +
                                        " --out " + (dir / "a.tsv").string());
  ASSERT_EQ(trained.exit_code, 0) << trained.err;
  const auto evaluated =
      run_cli(dir, "eval " + te_files() + " --checkpoint " + ckpt + " --out " + (dir / "b.tsv").string());
  ASSERT_EQ(evaluated.exit_code, 0) << evaluated.err;
  EXPECT_EQ(read_file((dir / "a.tsv").string()), read_file((dir / "b.tsv").string()));
}

TEST(Cli, AnswerSelectionTrainAndMerge) {
  const auto dir = scratch_dir("cli_as");
  const auto r = run_cli(dir, "train " + as_data_args() + " --epochs 1 --merge-train-dev");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("map"), std::string::npos) << r.out;
  EXPECT_NE(r.err.find("info\tdropped_groups"), std::string::npos) << r.err;
}

TEST(Cli, KSweepIsDeterministic) {
  const auto dir = scratch_dir("cli_ksweep");
  const std::string args = "k-sweep " + te_data_args() + " --epochs 1 --ks 1,3";
  const auto a = run_cli(dir, args);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  const auto b = run_cli(dir, args);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("k\taccuracy\n", 0), 0u) << a.out;
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 3);
}

TEST(Cli, GradCheckPassesAndDetectsFault) {
  const auto dir = scratch_dir("cli_gc");
  const auto ok = run_cli(dir, "grad-check --task as");
  ASSERT_EQ(ok.exit_code, 0) << ok.err;
  EXPECT_EQ(ok.out.rfind("task\tchecked\tmax_rel_error", 0), 0u) << ok.out;
  const auto again = run_cli(dir, "grad-check --task as");
  EXPECT_EQ(ok.out, again.out);
  const auto bad = run_cli(dir, "grad-check --task te --fault sigmoid");
  EXPECT_EQ(bad.exit_code, 3);
  EXPECT_TRUE(is_error_line(bad.err, "grad_check")) << bad.err;
}

TEST(Cli, InspectWritesAttentionCsv) {
  const auto dir = scratch_dir("cli_inspect");
  const std::string args = "inspect --task te --emb " + data_path("toy_emb4.txt") +
                           " --emb-dim 4 --hidden 3,3 --k 3 --first \"a man is playing\"" +
                           " --second \"a man plays\" --out " + (dir / "att").string();
  const auto r = run_cli(dir, args);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("sentence\tphrases\tselected\tfile\n", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("s1\t10\t3\t"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("s2\t6\t3\t"), std::string::npos) << r.out;
  const std::string first = read_file((dir / "att" / "pair_s1.csv").string());
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 11);
  ASSERT_EQ(run_cli(dir, args).exit_code, 0);
  EXPECT_EQ(read_file((dir / "att" / "pair_s1.csv").string()), first);
}

TEST(Cli, ReferencesTable) {
  const auto dir = scratch_dir("cli_refs");
  const auto r = run_cli(dir, "references");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out.rfind("name\tvalue\n", 0), 0u);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 10);
}

TEST(Cli, ErrorsAreSingleMachineReadableLines) {
  const auto dir = scratch_dir("cli_errors");
  const auto usage = run_cli(dir, "train --bogus-flag");
  EXPECT_EQ(usage.exit_code, 2);
  EXPECT_TRUE(is_error_line(usage.err, "usage")) << usage.err;

  const auto bad_task = run_cli(dir, "train --task xx");
  EXPECT_EQ(bad_task.exit_code, 2);

  const auto missing = run_cli(dir, "train --task te --emb " + data_path("toy_emb4.txt") +
                                        " --emb-dim 4 --train " + (dir / "none.tsv").string());
  EXPECT_NE(missing.exit_code, 0);
  EXPECT_TRUE(is_error_line(missing.err, "io")) << missing.err;

  const auto bad_label = run_cli(dir, "train --task te --emb " + data_path("toy_emb4.txt") +
                                          " --emb-dim 4 --train " + data_path("sick_bad_label.tsv"));
  EXPECT_EQ(bad_label.exit_code, 1);
  EXPECT_TRUE(is_error_line(bad_label.err, "load")) << bad_label.err;
  EXPECT_NE(bad_label.err.find("sick_bad_label.tsv:2"), std::string::npos);

  const auto dim = run_cli(dir, "train --task te --emb-dim 5 " + te_files());
  EXPECT_EQ(dim.exit_code, 1);
  EXPECT_TRUE(is_error_line(dim.err, "config")) << dim.err;

  const auto bad_ckpt = run_cli(dir, "eval " + te_files() + " --checkpoint " +
                                         data_path("emb3.txt"));
  EXPECT_EQ(bad_ckpt.exit_code, 1);
  EXPECT_TRUE(is_error_line(bad_ckpt.err, "load")) << bad_ckpt.err;
  EXPECT_TRUE(bad_ckpt.out.empty());
}
