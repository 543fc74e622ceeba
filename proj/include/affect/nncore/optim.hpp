#pragma once

#include <cstdint>
#include <vector>

#include "affect/nncore/params.hpp"

namespace affect::nn {

/// Learning rate used for transformer fine-tuning stages unless configured.
inline constexpr double kDefaultFinetuneLr = 2e-5;

struct AdamState {
  double lr = kDefaultFinetuneLr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  /// Zeroed moments shaped like `store`. Validates the hyperparameters.
  static AdamState for_store(const ParameterStore& store, double lr, double beta1 = 0.9,
                             double beta2 = 0.999, double eps = 1e-8);
};

/// One bias-corrected Adam update over all entries in store order, then zeroes
/// the gradients. A non-finite gradient raises TrainingError naming the entry
/// and leaves values untouched.
void adam_step(ParameterStore& store, AdamState& state);

}  // namespace affect::nn
