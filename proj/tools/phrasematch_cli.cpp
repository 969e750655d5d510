// Command-line front end: train, eval, grad-check, k-sweep, inspect,
// references. Metrics go to stdout as TSV; failures print one line
// `error<TAB><kind><TAB><message>` to stderr and exit nonzero.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "phrasematch/phrasematch.hpp"

namespace pm = phrasematch;
namespace corpus = phrasematch::corpus;
namespace harness = phrasematch::harness;

namespace {

struct Options {
  std::string task = "te";
  std::string mode;
  std::optional<std::size_t> k;
  std::string hidden;
  std::size_t lmax = pm::kDefaultMaxPhraseLength;
  std::size_t emb_dim = corpus::kDefaultEmbeddingDim;
  std::string features = "rep,add,simi,extra";
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  double lr = 1e-4;
  double l2 = 0.0006;
  double div = 0.06;
  std::size_t batch_size = 1;
  std::string emb, train, dev, test, extra_features, checkpoint, out;
  bool merge_train_dev = false;
  bool no_lowercase = false;
  bool no_header = false;
  // grad-check
  std::string fault;
  // k-sweep
  std::string ks = "1,2,3,4,5,6,7,8,9,10";
  // inspect
  std::string first, second, pair;
};

std::vector<std::size_t> parse_sizes(const std::string& list, const char* what) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size())
      throw pm::ConfigError(std::string("bad ") + what + " list '" + list + "'");
    out.push_back(v);
  }
  if (out.empty()) throw pm::ConfigError(std::string("empty ") + what + " list");
  return out;
}

pm::TaskConfig model_config(const Options& o) {
  pm::TaskConfig c = pm::TaskConfig::defaults(pm::parse_task(o.task));
  if (!o.mode.empty()) c.pooling.kind = pm::parse_pooling(o.mode);
  if (o.k) c.pooling.k = *o.k;
  if (!o.hidden.empty()) {
    const auto h = parse_sizes(o.hidden, "hidden");
    if (h.size() != 2) throw pm::ConfigError("--hidden expects h1,h2");
    c.hidden1 = h[0];
    c.hidden2 = h[1];
  }
  if (o.lmax == 0) throw pm::ConfigError("--lmax must be >= 1");
  if (c.pooling.kind != pm::PoolingKind::Full && c.pooling.k == 0)
    throw pm::ConfigError("--k must be >= 1");
  if (c.hidden1 == 0 || c.hidden2 == 0) throw pm::ConfigError("hidden sizes must be >= 1");
  c.max_phrase_len = o.lmax;
  c.embedding_dim = o.emb_dim;
  c.features = pm::parse_feature_set(o.features);
  return c;
}

harness::TrainConfig train_config(const Options& o) {
  harness::TrainConfig t;
  t.model = model_config(o);
  t.epochs = o.epochs;
  t.seed = o.seed;
  t.learning_rate = o.lr;
  t.l2 = o.l2;
  t.diversity = o.div;
  t.batch_size = o.batch_size;
  if (o.batch_size == 0) throw pm::ConfigError("--batch-size must be >= 1");
  if (o.lr < 0 || o.l2 < 0 || o.div < 0)
    throw pm::ConfigError("--lr, --l2 and --div must be non-negative");
  return t;
}

/// Splits loaded from disk with tokens indexed against one embedding table.
struct Corpora {
  corpus::EmbeddingTable embeddings;
  std::optional<harness::Dataset> train, dev, test;
};

struct RawSplit {
  std::vector<corpus::LabeledPair> pairs;
  std::vector<corpus::QuestionGroup> groups;
};

RawSplit load_split(pm::Task task, const std::string& path, const Options& o) {
  RawSplit r;
  pm::TokenizerOptions tok{!o.no_lowercase};
  if (task == pm::Task::TE) {
    r.pairs = corpus::load_sick(path, tok);
  } else {
    corpus::WikiQaOptions wo;
    wo.header = !o.no_header;
    wo.tokenizer = tok;
    auto data = corpus::load_wikiqa(path, wo);
    if (data.dropped_groups > 0)
      std::cerr << "info\tdropped_groups\t" << path << '\t' << data.dropped_groups << '\n';
    r.groups = std::move(data.groups);
  }
  return r;
}

Corpora load_corpora(const Options& o, pm::Task task, std::size_t emb_dim,
                     const std::string& train_path, const std::string& dev_path,
                     const std::string& test_path) {
  if (o.emb.empty()) throw pm::ConfigError("--emb is required");
  std::optional<RawSplit> tr, dv, te;
  if (!train_path.empty()) tr = load_split(task, train_path, o);
  if (!dev_path.empty()) dv = load_split(task, dev_path, o);
  if (!test_path.empty()) te = load_split(task, test_path, o);

  std::set<std::string> vocab;
  for (const auto* s : {&tr, &dv, &te}) {
    if (!*s) continue;
    corpus::collect_vocabulary((*s)->pairs, vocab);
    corpus::collect_vocabulary((*s)->groups, vocab);
  }
  corpus::EmbeddingCoverage cov;
  Corpora c{corpus::load_embeddings(o.emb, vocab, emb_dim, o.seed, &cov), {}, {}, {}};
  std::cerr << "info\tembedding_coverage\t" << cov.covered << '/' << cov.vocabulary << '\n';

  std::optional<corpus::ExtraFeatureFile> extra;
  if (!o.extra_features.empty()) extra = corpus::load_extra_features(o.extra_features);
  const corpus::ExtraFeatureFile* ex = extra ? &*extra : nullptr;

  // Word-count IDF comes from the training questions (train + dev when merged).
  corpus::IdfTable idf = corpus::IdfTable::uniform();
  if (task == pm::Task::AS && !ex) {
    if (!tr) throw pm::ConfigError("answer selection needs --train to build IDF weights");
    std::vector<corpus::QuestionGroup> idf_groups = tr->groups;
    if (o.merge_train_dev && dv) idf_groups.insert(idf_groups.end(), dv->groups.begin(), dv->groups.end());
    idf = corpus::build_idf(idf_groups);
  }
  auto make = [&](const RawSplit& r) {
    harness::Dataset d = task == pm::Task::TE ? harness::make_te_dataset(r.pairs, ex)
                                              : harness::make_as_dataset(r.groups, idf, ex);
    harness::index_all(d, c.embeddings);
    return d;
  };
  if (tr) c.train = make(*tr);
  if (dv) c.dev = make(*dv);
  if (te) c.test = make(*te);
  return c;
}

void write_metric_header(std::ostream& out, pm::Task task, const char* lead) {
  out << lead << (task == pm::Task::TE ? "\taccuracy\n" : "\tmap\tmrr\n");
}

void write_metrics(std::ostream& out, const harness::EvalReport& r) {
  if (r.task == pm::Task::TE)
    out << '\t' << harness::format_real(r.accuracy) << '\n';
  else
    out << '\t' << harness::format_real(r.map) << '\t' << harness::format_real(r.mrr) << '\n';
}

void write_predictions(const std::string& path, const harness::Dataset& d,
                       const harness::EvalReport& r) {
  std::ofstream out(path);
  if (!out) throw pm::IoError("cannot write predictions '" + path + "'");
  out << "id\tlabel\tpredicted";
  if (d.task == pm::Task::TE)
    out << "\tp_entailment\tp_contradiction\tp_neutral\n";
  else
    out << "\tscore\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << d.examples[i].id << '\t' << d.examples[i].label << '\t'
        << r.predictions[i].predicted_class();
    for (double p : r.predictions[i].probabilities) out << '\t' << harness::format_real(p);
    out << '\n';
  }
  if (!out) throw pm::IoError("failed writing predictions '" + path + "'");
}

int run_train(const Options& o) {
  const harness::TrainConfig cfg = train_config(o);
  if (o.train.empty()) throw pm::ConfigError("--train is required");
  Corpora c = load_corpora(o, cfg.model.task, cfg.model.embedding_dim, o.train, o.dev, o.test);
  harness::Dataset train_set = *c.train;
  const harness::Dataset* selection = c.dev ? &*c.dev : nullptr;
  if (o.merge_train_dev) {
    if (!c.dev) throw pm::ConfigError("--merge-train-dev needs --dev");
    train_set = harness::merge(*c.train, *c.dev);
    selection = nullptr;  // model selection then runs on the merged training data
  }

  auto& out = std::cout;
  write_metric_header(out, cfg.model.task, "row\tepoch\ttrain_loss");
  auto result = harness::train(cfg, train_set, selection, c.embeddings,
                               [&](const harness::EpochReport& e) {
                                 out << "epoch\t" << e.epoch << '\t'
                                     << harness::format_real(e.train_loss);
                                 write_metrics(out, e.dev);
                                 out.flush();
                               });
  if (result.epochs.empty()) throw pm::ConfigError("--epochs must be >= 1");
  const auto& best = result.epochs[result.best_epoch - 1];
  out << "best\t" << best.epoch << '\t' << harness::format_real(best.train_loss);
  write_metrics(out, best.dev);
  if (c.test) {
    const auto rep = harness::evaluate(result.model, *c.test, c.embeddings);
    out << "test\t" << best.epoch << '\t' << harness::format_real(best.train_loss);
    write_metrics(out, rep);
    if (!o.out.empty()) write_predictions(o.out, *c.test, rep);
  }
  if (!o.checkpoint.empty()) {
    std::map<std::string, std::string> meta{
        {"best_epoch", std::to_string(result.best_epoch)},
        {"best_metric", harness::format_real(result.best_metric)},
        {"epochs", std::to_string(cfg.epochs)},
        {"learning_rate", harness::format_real(cfg.learning_rate)},
        {"l2", harness::format_real(cfg.l2)},
        {"diversity", harness::format_real(cfg.diversity)},
        {"batch_size", std::to_string(cfg.batch_size)},
        {"merge_train_dev", o.merge_train_dev ? "1" : "0"},
        {"lowercase", o.no_lowercase ? "0" : "1"},
    };
    pm::save_checkpoint(o.checkpoint, result.model, meta);
  }
  return 0;
}

int run_eval(const Options& o) {
  if (o.checkpoint.empty()) throw pm::ConfigError("--checkpoint is required");
  pm::Checkpoint ck = pm::load_checkpoint(o.checkpoint);
  const pm::Task task = ck.model.config.task;
  if (o.test.empty() && o.dev.empty()) throw pm::ConfigError("--test or --dev is required");
  Options with_seed = o;
  with_seed.seed = ck.model.seed;  // same unknown-word vector as in training
  Corpora c = load_corpora(with_seed, task, ck.model.config.embedding_dim, o.train, o.dev, o.test);
  write_metric_header(std::cout, task, "split");
  if (c.dev) {
    std::cout << "dev";
    write_metrics(std::cout, harness::evaluate(ck.model, *c.dev, c.embeddings));
  }
  if (c.test) {
    const auto rep = harness::evaluate(ck.model, *c.test, c.embeddings);
    std::cout << "test";
    write_metrics(std::cout, rep);
    if (!o.out.empty()) write_predictions(o.out, *c.test, rep);
  }
  return 0;
}

std::optional<pm::OpKind> parse_fault(const std::string& name) {
  if (name.empty()) return std::nullopt;
  for (int i = 0; i <= static_cast<int>(pm::OpKind::Custom); ++i) {
    const auto k = static_cast<pm::OpKind>(i);
    if (pm::op_name(k) == name) return k;
  }
  throw pm::ConfigError("unknown operation '" + name + "' for --fault");
}

int run_grad_check(const Options& o) {
  const pm::Task task = pm::parse_task(o.task);
  harness::GradCheckOptions opts;
  opts.fault = parse_fault(o.fault);
  const auto r = harness::grad_check(task, o.seed, opts);
  std::cout << "task\tchecked\tmax_rel_error\tworst_parameter\tworst_index\tpassed\n"
            << pm::task_name(task) << '\t' << r.checked << '\t'
            << harness::format_real(r.max_rel_error) << '\t' << r.worst_parameter << '\t'
            << r.worst_index << '\t' << (r.passed ? 1 : 0) << '\n';
  if (!r.passed) {
    std::cerr << "error\tgrad_check\tmax relative error " << harness::format_real(r.max_rel_error)
              << " at " << r.worst_parameter << '[' << r.worst_index << "] exceeds "
              << harness::format_real(opts.tolerance) << '\n';
    return 3;
  }
  return 0;
}

int run_k_sweep(const Options& o) {
  const harness::TrainConfig cfg = train_config(o);
  if (o.train.empty()) throw pm::ConfigError("--train is required");
  const auto ks = parse_sizes(o.ks, "k");
  Corpora c = load_corpora(o, cfg.model.task, cfg.model.embedding_dim, o.train, o.dev, "");
  const auto rows = harness::k_sweep(cfg, ks, *c.train, c.dev ? &*c.dev : nullptr, c.embeddings);
  harness::write_k_sweep_tsv(std::cout, cfg.model.task, rows);
  return 0;
}

int run_inspect(const Options& o) {
  if (o.out.empty()) throw pm::ConfigError("--out (directory) is required");
  std::optional<pm::Model> model;
  if (!o.checkpoint.empty()) model = pm::load_checkpoint(o.checkpoint).model;
  else model.emplace(model_config(o), o.seed);
  const pm::Task task = model->config.task;

  pm::Sentence a, b;
  std::string prefix = "pair";
  if (!o.first.empty() || !o.second.empty()) {
    if (o.first.empty() || o.second.empty())
      throw pm::ConfigError("--first and --second must be given together");
    pm::TokenizerOptions tok{!o.no_lowercase};
    a.tokens = pm::tokenize(o.first, tok);
    b.tokens = pm::tokenize(o.second, tok);
  } else {
    if (o.test.empty()) throw pm::ConfigError("give --first/--second or --test with --pair");
    const RawSplit raw = load_split(task, o.test, o);
    const harness::Dataset d = task == pm::Task::TE
                                   ? harness::make_te_dataset(raw.pairs)
                                   : harness::make_as_dataset(raw.groups, corpus::IdfTable::uniform());
    const harness::Example* found = nullptr;
    for (const auto& e : d.examples)
      if (o.pair.empty() || e.id == o.pair) {
        found = &e;
        break;
      }
    if (!found) throw pm::ConfigError("pair '" + o.pair + "' not found in " + o.test);
    a = found->first;
    b = found->second;
    prefix = found->id;
    for (auto& ch : prefix)
      if (ch == '/' || ch == '\\') ch = '_';
  }
  if (a.empty() || b.empty()) throw pm::ConfigError("both sentences must be non-empty");
  if (o.emb.empty()) throw pm::ConfigError("--emb is required");
  std::set<std::string> vocab(a.tokens.begin(), a.tokens.end());
  vocab.insert(b.tokens.begin(), b.tokens.end());
  const auto emb = corpus::load_embeddings(o.emb, vocab, model->config.embedding_dim, o.seed);
  emb.index(a);
  emb.index(b);
  const auto dump = harness::dump_attention(*model, a, b, emb, o.out, prefix);
  std::cout << "sentence\tphrases\tselected\tfile\n";
  std::cout << "s1\t" << dump.first.spans.size() << '\t' << dump.first.selected_count() << '\t'
            << prefix << "_s1.csv\n";
  std::cout << "s2\t" << dump.second.spans.size() << '\t' << dump.second.selected_count() << '\t'
            << prefix << "_s2.csv\n";
  return 0;
}

int run_references() {
  std::cout << "name\tvalue\n";
  for (const auto& r : harness::kReferenceValues)
    std::cout << r.name << '\t' << harness::format_real(r.value) << '\n';
  return 0;
}

void add_model_options(CLI::App* app, Options& o) {
  app->add_option("--task", o.task, "te or as")->check(CLI::IsMember({"te", "as"}));
  app->add_option("--mode", o.mode, "pooling: kmin, kmax or full (task default)")
      ->check(CLI::IsMember({"kmin", "kmax", "full"}));
  app->add_option("--k", o.k, "phrases kept by pooling (task default)");
  app->add_option("--hidden", o.hidden, "hidden sizes h1,h2 (task default)");
  app->add_option("--lmax", o.lmax, "maximum phrase length");
  app->add_option("--emb-dim", o.emb_dim, "embedding dimension");
  app->add_option("--features", o.features, "classifier input segments from rep,add,simi,extra");
  app->add_option("--seed", o.seed, "random seed");
}

void add_data_options(CLI::App* app, Options& o) {
  app->add_option("--emb", o.emb, "embedding file (token then reals per line)");
  app->add_option("--train", o.train, "training split");
  app->add_option("--dev", o.dev, "development split");
  app->add_option("--test", o.test, "test split");
  app->add_option("--extra-features", o.extra_features, "precomputed extra-feature TSV");
  app->add_flag("--no-lowercase", o.no_lowercase, "keep token case");
  app->add_flag("--no-header", o.no_header, "answer-selection files have no header row");
}

void add_train_options(CLI::App* app, Options& o) {
  app->add_option("--epochs", o.epochs, "training epochs");
  app->add_option("--lr", o.lr, "ADAM learning rate");
  app->add_option("--l2", o.l2, "L2 coefficient");
  app->add_option("--div", o.div, "diversity coefficient");
  app->add_option("--batch-size", o.batch_size, "examples per update");
  app->add_flag("--merge-train-dev", o.merge_train_dev, "train on train + dev");
}

std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
  return s;
}

int fail(const char* kind, const std::string& msg, int code = 1) {
  std::cerr << "error\t" << kind << '\t' << one_line(msg) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Phrase-level GRU sentence matcher"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "train a model, report per-epoch dev metrics");
  add_model_options(train, o);
  add_data_options(train, o);
  add_train_options(train, o);
  train->add_option("--checkpoint", o.checkpoint, "write the best model here");
  train->add_option("--out", o.out, "write test predictions here");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_data_options(eval, o);
  eval->add_option("--checkpoint", o.checkpoint, "model to evaluate");
  eval->add_option("--out", o.out, "write test predictions here");

  auto* gc = app.add_subcommand("grad-check", "finite-difference gradient check on a tiny model");
  gc->add_option("--task", o.task, "te or as")->check(CLI::IsMember({"te", "as"}));
  gc->add_option("--seed", o.seed, "random seed");
  gc->add_option("--fault", o.fault, "scale the gradient of one operation kind (self-test)");

  auto* ks = app.add_subcommand("k-sweep", "train once per k and report dev metrics");
  add_model_options(ks, o);
  add_data_options(ks, o);
  add_train_options(ks, o);
  ks->add_option("--ks", o.ks, "comma-separated k values");

  auto* inspect = app.add_subcommand("inspect", "export phrase attention of one pair as CSV");
  add_model_options(inspect, o);
  add_data_options(inspect, o);
  inspect->add_option("--checkpoint", o.checkpoint, "model (default: seeded initialisation)");
  inspect->add_option("--out", o.out, "output directory");
  inspect->add_option("--first", o.first, "first sentence text");
  inspect->add_option("--second", o.second, "second sentence text");
  inspect->add_option("--pair", o.pair, "pair id in --test (default: first pair)");

  auto* refs = app.add_subcommand("references", "print published full-scale reference numbers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*train) return run_train(o);
    if (*eval) return run_eval(o);
    if (*gc) return run_grad_check(o);
    if (*ks) return run_k_sweep(o);
    if (*inspect) return run_inspect(o);
    if (*refs) return run_references();
    return fail("usage", "no subcommand", 2);
  } catch (const pm::ConfigError& e) {
    return fail("config", e.what());
  } catch (const pm::LoadError& e) {
    return fail("load", e.what());
  } catch (const pm::IoError& e) {
    return fail("io", e.what());
  } catch (const pm::NumericError& e) {
    return fail("numeric", e.what());
  } catch (const pm::DimensionError& e) {
    return fail("dimension", e.what());
  } catch (const pm::ContractError& e) {
    return fail("contract", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
