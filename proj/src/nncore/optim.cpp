#include "affect/nncore/optim.hpp"

#include <cmath>
#include <string>

#include "affect/common.hpp"

namespace affect::nn {

AdamState AdamState::for_store(const ParameterStore& store, double lr, double beta1, double beta2,
                               double eps) {
  if (!(lr > 0.0) || !(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) ||
      !(eps > 0.0)) {
    throw ConfigError("Adam: require lr > 0, 0 < beta1, beta2 < 1, eps > 0");
  }
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  for (const auto& e : store.entries()) {
    s.m.emplace_back(e.values.size(), 0.0);
    s.v.emplace_back(e.values.size(), 0.0);
  }
  return s;
}

void adam_step(ParameterStore& store, AdamState& state) {
  if (state.m.size() != store.size()) {
    throw StateError("Adam: optimizer state does not match parameter store");
  }
  for (const auto& e : store.entries()) {
    for (double g : e.grads) {
      if (!std::isfinite(g)) {
        throw TrainingError("non-finite gradient in parameter '" + e.name + "'");
      }
    }
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto& e = store.entry(i);
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < e.values.size(); ++j) {
      const double g = e.grads[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      e.values[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
  store.zero_grads();
  store.increment_step();
}

}  // namespace affect::nn
