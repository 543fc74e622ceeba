#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "affect/nncore/params.hpp"
#include "affect/textenc/transformer.hpp"
#include "affect/textenc/vocab.hpp"

namespace affect::text {

/// Two-token generation target: an emotion label token then eos.
struct LabelTokenPair {
  int label_id = kFirstLabelId;
  int eos_id = kEosId;
};

/// Throws DataError unless `label` is one of the emotion labels.
LabelTokenPair label_target(std::string_view label);

struct LogProbPair {
  double label = 0.0;  // log p(x1 | c)
  double eos = 0.0;    // log p(x2 | x1, c)
  double total() const { return label + eos; }
};

struct DecodeResult {
  std::string label;
  int label_id = kFirstLabelId;
  double log_prob = 0.0;
};

/// Argmax over the label-token block only; ties go to the lowest id.
int constrained_argmax(std::span<const double> logits);

/// Encoder-decoder over a shared vocabulary and shared token embedding. The
/// decoder is fed [cls, x1] and its two output positions score x1 and x2.
class Seq2SeqModel {
 public:
  static constexpr const char* kEmbedName = "embed";
  static constexpr const char* kEncoderName = "enc";
  static constexpr const char* kDecoderName = "dec";
  static constexpr const char* kHeadName = "lm_head";

  static Seq2SeqModel create(Vocab vocab, const TransformerDims& dims, std::uint64_t seed);
  Seq2SeqModel(Vocab vocab, nn::ParameterStore params, const TransformerDims& dims);

  TokenSeq tokenize(std::string_view text) const { return text::tokenize(text, vocab_, dims_.max_len); }

  /// Teacher-forced (log p(x1|c), log p(x2|x1,c)).
  LogProbPair logprob(const TokenSeq& seq, const LabelTokenPair& target) const;

  /// Adds scale * d(-log p(x|c))/dtheta into params() and returns -log p(x|c).
  double accumulate_nll(const TokenSeq& seq, const LabelTokenPair& target, double scale);

  /// Full-vocabulary logits for the next token after `prefix` (which starts
  /// with cls).
  std::vector<double> next_logits(const TokenSeq& seq, std::span<const int> prefix) const;

  /// Step 1 restricted to label tokens, step 2 forced to eos.
  DecodeResult decode_constrained(const TokenSeq& seq) const;

  const Vocab& vocab() const { return vocab_; }
  const TransformerDims& dims() const { return dims_; }
  const nn::ParameterStore& params() const { return params_; }
  nn::ParameterStore& params() { return params_; }

  void save(const std::filesystem::path& dir) const;
  static Seq2SeqModel load(const std::filesystem::path& dir);

 private:
  void check(const TokenSeq& seq, const LabelTokenPair* target) const;

  Vocab vocab_;
  TransformerDims dims_;
  nn::ParameterStore params_;
  EncoderStack encoder_;
  DecoderStack decoder_;
  nn::Linear head_;
};

}  // namespace affect::text
