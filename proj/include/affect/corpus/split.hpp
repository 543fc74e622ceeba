#pragma once

#include <cstdint>

#include "affect/corpus/record.hpp"

namespace affect::corpus {

struct SplitResult {
  Dataset train;
  Dataset valid;
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

/// Seeded shuffle, then the first floor(n * ratio) records go to train and the
/// rest to valid.
SplitResult split_dataset(const Dataset& d, double ratio, std::uint64_t seed);

}  // namespace affect::corpus
