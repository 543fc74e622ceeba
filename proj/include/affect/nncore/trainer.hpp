#pragma once

#include <cstdint>
#include <functional>

#include "affect/nncore/optim.hpp"
#include "affect/nncore/params.hpp"

namespace affect::nn {

struct TrainHyper {
  double lr = kDefaultFinetuneLr;
  int epochs = 10;
  int batch_size = 8;
  /// Stop after this many optimizer steps; 0 means no cap.
  int max_steps = 0;
  /// Global-norm gradient clip applied before every step; 0 disables.
  double clip_norm = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// fn(i, scale) adds scale * dloss_i/dtheta into the store's gradients and
/// returns loss_i.
using ExampleLossFn = std::function<double(std::size_t index, double scale)>;
/// Called after each epoch with the 1-based epoch number; return false to
/// stop early.
using EpochHook = std::function<bool(int epoch)>;

/// Shuffled minibatch loop: per batch, accumulate mean-scaled gradients, clip,
/// Adam step. The shuffle stream is derived from hyper.seed, so two runs with
/// the same inputs are bit-identical. Returns the number of steps taken.
int train_minibatch(ParameterStore& store, AdamState& state, std::size_t n_examples,
                    const TrainHyper& hyper, const ExampleLossFn& fn, const EpochHook& hook);

}  // namespace affect::nn
