#pragma once

#include <array>
#include <string_view>

namespace phrasematch::harness {

/// Published full-scale results and corpus sizes. Informational only: they
/// need the complete datasets, 300-d GloVe and long training, and are never
/// used as test expectations.
struct ReferenceValue {
  std::string_view name;
  double value;
};

inline constexpr std::array<ReferenceValue, 9> kReferenceValues{{
    {"sick_test_accuracy_kmin", 87.1},
    {"wikiqa_test_map_kmax", 0.7124},
    {"wikiqa_test_mrr_kmax", 0.7237},
    {"sick_train_pairs", 4439},
    {"sick_dev_pairs", 495},
    {"sick_test_pairs", 4906},
    {"wikiqa_train_pairs", 20360},
    {"wikiqa_dev_pairs", 1130},
    {"wikiqa_test_pairs", 2352},
}};

}  // namespace phrasematch::harness
