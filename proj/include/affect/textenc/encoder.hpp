#pragma once

#include <filesystem>
#include <vector>

#include "affect/nncore/params.hpp"
#include "affect/textenc/transformer.hpp"
#include "affect/textenc/vocab.hpp"

namespace affect::text {

/// Transformer encoder whose text embedding is the final hidden state at
/// position 0 (the [cls] token). Task heads live in the same parameter store,
/// declared through `head_specs` at creation.
class EncoderModel {
 public:
  static constexpr const char* kEmbedName = "embed";
  static constexpr const char* kStackName = "enc";

  static EncoderModel create(Vocab vocab, const TransformerDims& dims, std::uint64_t seed,
                             const std::vector<nn::LayerSpec>& head_specs = {});

  EncoderModel(Vocab vocab, nn::ParameterStore params, const TransformerDims& dims);

  TokenSeq tokenize(std::string_view text) const { return text::tokenize(text, vocab_, dims_.max_len); }

  /// Pooled (position-0) output, length model_dim.
  std::vector<double> encode_pooled(const TokenSeq& seq) const;

  /// Training path: pooled output with cache, and its backward pass, which
  /// accumulates into params().
  nn::RowVector pooled_forward(const TokenSeq& seq, EncoderStack::Cache* cache) const;
  void pooled_backward(const EncoderStack::Cache& cache, const nn::RowVector& dpooled);

  const Vocab& vocab() const { return vocab_; }
  const TransformerDims& dims() const { return dims_; }
  const nn::ParameterStore& params() const { return params_; }
  nn::ParameterStore& params() { return params_; }

  /// Writes params.bin, vocab.txt and dims.cfg into `dir`.
  void save(const std::filesystem::path& dir) const;
  static EncoderModel load(const std::filesystem::path& dir);

 private:
  void check(const TokenSeq& seq) const;

  Vocab vocab_;
  TransformerDims dims_;
  nn::ParameterStore params_;
  EncoderStack stack_;
};

void save_dims(const std::filesystem::path& path, const TransformerDims& dims);
TransformerDims load_dims(const std::filesystem::path& path);

}  // namespace affect::text
