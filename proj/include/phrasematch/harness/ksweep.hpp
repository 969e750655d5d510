#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "phrasematch/harness/format.hpp"
#include "phrasematch/harness/train.hpp"

namespace phrasematch::harness {

struct KSweepRow {
  std::size_t k = 0;
  std::size_t best_epoch = 0;
  EvalReport dev;  ///< report of the best epoch
};

/// One training run per k, all from the same seed and data.
inline std::vector<KSweepRow> k_sweep(const TrainConfig& base, std::span<const std::size_t> ks,
                                      const Dataset& train_set, const Dataset* dev,
                                      const corpus::EmbeddingTable& emb) {
  if (ks.empty()) throw ConfigError("k-sweep: no k values given");
  if (base.epochs == 0) throw ConfigError("k-sweep: epochs must be >= 1");
  std::vector<KSweepRow> rows;
  for (std::size_t k : ks) {
    if (k == 0) throw ConfigError("k-sweep: k must be >= 1");
    TrainConfig cfg = base;
    cfg.model.pooling.k = k;
    TrainResult r = train(cfg, train_set, dev, emb);
    rows.push_back({k, r.best_epoch, r.epochs[r.best_epoch - 1].dev});
  }
  return rows;
}

/// TE: `k accuracy`; AS: `k map mrr`. Tab-separated with a header row.
inline void write_k_sweep_tsv(std::ostream& out, Task task, const std::vector<KSweepRow>& rows) {
  out << (task == Task::TE ? "k\taccuracy\n" : "k\tmap\tmrr\n");
  for (const auto& r : rows) {
    out << r.k;
    if (task == Task::TE)
      out << '\t' << format_real(r.dev.accuracy);
    else
      out << '\t' << format_real(r.dev.map) << '\t' << format_real(r.dev.mrr);
    out << '\n';
  }
}

}  // namespace phrasematch::harness
