#pragma once

#include <vector>

#include "phrasematch/numcore/ops.hpp"

namespace phrasematch {

/// l2 * sum ||P||_F^2 over trainable parameters, plus
/// div * sum of squared pairwise row cosines over parameters flagged for
/// diversity. Recorded on `tape` so it can be added to the task loss.
inline Var regularization_loss(Tape& tape, std::span<Parameter* const> params, double l2,
                               double div) {
  require(l2 >= 0.0 && div >= 0.0, "regularization_loss: coefficients must be non-negative");
  Var total = tape.constant(Matrix(1, 1));
  for (auto* p : params) {
    if (!p->trainable) continue;
    Var leaf = tape.param(*p);
    if (l2 > 0.0) total = add(total, scale(sum_squares(leaf), l2));
    if (div > 0.0 && p->diversity) total = add(total, scale(row_cosine_squares(leaf), div));
  }
  return total;
}

inline double regularization_value(std::span<Parameter* const> params, double l2, double div) {
  Tape tape;
  return tape.value(regularization_loss(tape, params, l2, div))[0];
}

}  // namespace phrasematch
