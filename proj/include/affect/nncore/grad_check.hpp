#pragma once

#include <functional>
#include <string>

#include "affect/nncore/params.hpp"

namespace affect::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// Loss callback: evaluates the loss at the store's current values. When
/// `with_grad` is set it must also accumulate dL/dvalues into the store's
/// gradient slots (which the checker zeroes beforehand).
using LossFn = std::function<double(ParameterStore&, bool with_grad)>;

/// Compares analytic gradients with central differences on up to `sample`
/// coordinates per entry (a fixed-seed selection, so repeated calls check the
/// same coordinates). Relative error is |a - n| / max(|a|, |n|, 1e-8).
/// Values are restored and gradients zeroed on return.
GradCheckResult grad_check(const LossFn& loss_fn, ParameterStore& store, double eps, int sample);

}  // namespace affect::nn
