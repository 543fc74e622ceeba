#include "affect/nncore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "affect/common.hpp"

namespace affect::nn {

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) {
    throw ArgumentError("softmax: empty logits");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) {
    sum += std::exp(z - mx);
  }
  const double lse = mx + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = logits[i] - lse;
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) {
    throw ArgumentError("softmax: empty logits");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& p : out) {
    p /= sum;
  }
  return out;
}

double nll_loss(std::span<const double> log_probs) {
  double total = 0.0;
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    if (log_probs[i] > 0.0 || std::isnan(log_probs[i])) {
      throw ArgumentError("nll_loss: log probability at index " + std::to_string(i) +
                          " is not <= 0");
    }
    total -= log_probs[i];
  }
  return total;
}

}  // namespace affect::nn
