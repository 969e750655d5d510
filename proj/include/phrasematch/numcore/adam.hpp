#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "phrasematch/numcore/tape.hpp"

namespace phrasematch {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// ADAM with bias correction. Moments are bound to the parameter list given at
/// construction; step() must be called with the same list in the same order.
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::span<Parameter* const> params, AdamOptions opts = {}) : opts_(opts) {
    for (const auto* p : params) {
      first_.emplace_back(p->value.rows(), p->value.cols());
      second_.emplace_back(p->value.rows(), p->value.cols());
    }
  }

  void step(std::span<Parameter* const> params) {
    if (params.size() != first_.size())
      throw ContractError("adam_step: parameter list changed since construction");
    ++steps_;
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(opts_.beta1, t);
    const double c2 = 1.0 - std::pow(opts_.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      Parameter& p = *params[i];
      require_same_shape(p.value, first_[i], "adam_step");
      if (!p.trainable) continue;
      Matrix& m = first_[i];
      Matrix& v = second_[i];
      for (std::size_t j = 0; j < p.value.size(); ++j) {
        const double g = p.grad[j];
        m[j] = opts_.beta1 * m[j] + (1.0 - opts_.beta1) * g;
        v[j] = opts_.beta2 * v[j] + (1.0 - opts_.beta2) * g * g;
        const double mhat = m[j] / c1;
        const double vhat = v[j] / c2;
        p.value[j] -= opts_.learning_rate * mhat / (std::sqrt(vhat) + opts_.epsilon);
      }
    }
  }

  std::uint64_t steps() const noexcept { return steps_; }
  const AdamOptions& options() const noexcept { return opts_; }
  const Matrix& first_moment(std::size_t i) const { return first_.at(i); }
  const Matrix& second_moment(std::size_t i) const { return second_.at(i); }

 private:
  AdamOptions opts_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  std::uint64_t steps_ = 0;
};

}  // namespace phrasematch
