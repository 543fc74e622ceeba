#include "affect/nncore/trainer.hpp"

#include <algorithm>
#include <numeric>

#include "affect/common.hpp"

namespace affect::nn {

void TrainHyper::validate() const {
  if (!(lr > 0.0)) {
    throw ConfigError("learning rate must be > 0");
  }
  if (epochs < 0 || batch_size <= 0 || max_steps < 0 || clip_norm < 0.0) {
    throw ConfigError("epochs/max_steps must be >= 0, batch_size > 0, clip_norm >= 0");
  }
}

int train_minibatch(ParameterStore& store, AdamState& state, std::size_t n_examples,
                    const TrainHyper& hyper, const ExampleLossFn& fn, const EpochHook& hook) {
  hyper.validate();
  if (n_examples == 0) {
    return 0;
  }
  Rng rng(derive_seed(hyper.seed, 1));
  std::vector<std::size_t> order(n_examples);
  int steps = 0;
  store.zero_grads();
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    bool capped = false;
    for (std::size_t start = 0; start < n_examples; start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end = std::min(n_examples, start + static_cast<std::size_t>(hyper.batch_size));
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t k = start; k < end; ++k) {
        fn(order[k], scale);
      }
      store.clip_grad_norm(hyper.clip_norm);
      adam_step(store, state);
      ++steps;
      if (hyper.max_steps > 0 && steps >= hyper.max_steps) {
        capped = true;
        break;
      }
    }
    const bool keep_going = hook ? hook(epoch) : true;
    if (capped || !keep_going) {
      break;
    }
  }
  return steps;
}

}  // namespace affect::nn
