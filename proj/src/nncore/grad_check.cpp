#include "affect/nncore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affect/common.hpp"

namespace affect::nn {

GradCheckResult grad_check(const LossFn& loss_fn, ParameterStore& store, double eps, int sample) {
  if (eps < 1e-6 || eps > 1e-3) {
    throw ArgumentError("grad_check: eps must lie in [1e-6, 1e-3]");
  }
  store.zero_grads();
  loss_fn(store, true);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(store.size());
  for (const auto& e : store.entries()) {
    analytic.push_back(e.grads);
  }
  store.zero_grads();

  GradCheckResult result;
  Rng rng(0x5eedULL);
  for (std::size_t p = 0; p < store.size(); ++p) {
    auto& e = store.entry(p);
    std::vector<std::size_t> coords(e.values.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (sample > 0 && coords.size() > static_cast<std::size_t>(sample)) {
      rng.shuffle(coords);
      coords.resize(static_cast<std::size_t>(sample));
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t j : coords) {
      const double orig = e.values[j];
      e.values[j] = orig + eps;
      const double up = loss_fn(store, false);
      e.values[j] = orig - eps;
      const double down = loss_fn(store, false);
      e.values[j] = orig;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[p][j];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      const double rel = std::fabs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error || std::isnan(rel)) {
        result.max_rel_error = rel;
        result.worst_param = e.name;
        result.worst_index = j;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  store.zero_grads();
  return result;
}

}  // namespace affect::nn
