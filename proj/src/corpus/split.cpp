#include "affect/corpus/split.hpp"

#include <cmath>
#include <numeric>

#include "affect/common.hpp"

namespace affect::corpus {

SplitResult split_dataset(const Dataset& d, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ArgumentError("split ratio must be in (0, 1), got " + format_shortest(ratio));
  }
  if (d.size() < 2) throw ArgumentError("cannot split fewer than 2 records");

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  // The epsilon keeps products like 1860 * 0.8 from landing just below an
  // integer.
  const auto n_train =
      static_cast<std::size_t>(std::floor(static_cast<double>(d.size()) * ratio + 1e-9));

  SplitResult out;
  out.seed = seed;
  out.ratio = ratio;
  out.train.provenance = d.provenance + "[train]";
  out.valid.provenance = d.provenance + "[valid]";
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.train : out.valid).records.push_back(d.records[order[i]]);
  }
  return out;
}

}  // namespace affect::corpus
