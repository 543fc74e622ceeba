#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "affect/corpus/record.hpp"
#include "affect/labels.hpp"

namespace affect::corpus {

enum class SynthTask { track1, track2 };

SynthTask parse_synth_task(std::string_view s);

/// Track 2 essays: filler text with keywords drawn from one or two of the
/// label's three keyword families, sometimes with a distractor keyword from
/// another label. Records per label are balanced (n / 7, remainder to the
/// first labels) and interleaved by a seeded shuffle.
///
/// Track 1 essays have a fixed word count. Three planted word families are
/// counted: a shared one (s) and one specific to each target (a, b), each 0..3
/// occurrences; the rest is drawn from a 12-word filler pool. Targets follow track1_truth() plus Gaussian noise, clipped to
/// [1, 7].
Dataset synthesize_corpus(int n, std::uint64_t seed, SynthTask task);

/// Track 2 corpus with explicit per-label counts, in kEmotionLabels order.
Dataset synthesize_track2(const std::array<int, kNumEmotions>& counts, std::uint64_t seed);

/// Auxiliary, main and held-out Track 2 corpora drawn from the same keyword
/// families with independent seeds. Ids are prefixed "aux-", "main-" and
/// "heldout-".
struct TransferBenchmark {
  Dataset aux;
  Dataset main;
  Dataset heldout;
};

TransferBenchmark synthesize_transfer(int aux_n, int main_n, int heldout_n, std::uint64_t seed);

/// Planted coefficients of the Track 1 generator.
struct Track1Truth {
  double intercept = 2.0;
  double shared = 0.7;
  double specific = 0.4;
  /// Per standard deviation of age (empathy) / income (distress).
  double demographic = 0.25;
  /// Added to empathy for gender "female", to distress for education
  /// "high_school".
  double categorical = 0.3;
  double noise_sd = 0.15;
  int essay_words = 16;
};

const Track1Truth& track1_truth();

/// Keyword families used by the generators, exposed for tests.
const std::array<std::array<std::vector<std::string>, 3>, kNumEmotions>& emotion_keyword_families();

}  // namespace affect::corpus
