#pragma once

#include <span>
#include <vector>

namespace affect::nn {

/// Numerically stable softmax (max-subtracted). Throws ArgumentError on empty
/// input.
std::vector<double> softmax(std::span<const double> logits);

std::vector<double> log_softmax(std::span<const double> logits);

/// Negative log-likelihood of a batch: -sum(log_probs). Each entry is the log
/// probability of one gold token (or sequence); positive entries are rejected.
double nll_loss(std::span<const double> log_probs);

}  // namespace affect::nn
