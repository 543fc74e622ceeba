#pragma once

#include <span>
#include <string>
#include <vector>

#include "affect/nncore/layers.hpp"
#include "affect/nncore/params.hpp"

namespace affect::text {

using nn::Matrix;

struct TransformerDims {
  int layers = 2;
  int model_dim = 64;
  int heads = 4;
  int ff_dim = 128;
  int max_len = 128;

  /// ConfigError on non-positive sizes or model_dim % heads != 0.
  void validate() const;
  bool operator==(const TransformerDims&) const = default;
};

/// Layer specs for a pre-norm encoder stack named `prefix` (the token
/// embedding is declared separately).
std::vector<nn::LayerSpec> encoder_specs(const std::string& prefix, const TransformerDims& dims);
/// Layer specs for a pre-norm decoder stack with cross-attention.
std::vector<nn::LayerSpec> decoder_specs(const std::string& prefix, const TransformerDims& dims);

/// Token embedding (scaled by sqrt(model_dim)) plus sinusoidal positions,
/// then `layers` blocks of x += Attn(LN(x)); x += FFN(LN(x)), then a final
/// layer norm. Only the real (unpadded) tokens are fed in, so padding never
/// reaches the computation.
class EncoderStack {
 public:
  struct BlockCache {
    nn::LayerNorm::Cache ln1;
    nn::MultiHeadAttention::Cache attn;
    nn::LayerNorm::Cache ln2;
    nn::FeedForward::Cache ffn;
  };
  struct Cache {
    std::vector<int> ids;
    std::vector<BlockCache> blocks;
    nn::LayerNorm::Cache final_ln;
  };

  EncoderStack() = default;
  EncoderStack(const nn::ParameterStore& store, const std::string& embed_name,
               const std::string& prefix, const TransformerDims& dims);

  /// Returns the final hidden states, one row per input token.
  Matrix forward(const nn::ParameterStore& store, std::span<const int> ids, Cache* cache) const;
  void backward(nn::ParameterStore& store, const Cache& cache, const Matrix& dout) const;

 private:
  struct Block {
    nn::LayerNorm ln1;
    nn::MultiHeadAttention attn;
    nn::LayerNorm ln2;
    nn::FeedForward ffn;
  };
  nn::Embedding embed_;
  std::vector<Block> blocks_;
  nn::LayerNorm final_ln_;
  Matrix positions_;
  double embed_scale_ = 1.0;
};

/// Decoder blocks: y += CausalSelfAttn(LN(y)); y += CrossAttn(LN(y), enc);
/// y += FFN(LN(y)); followed by a final layer norm.
class DecoderStack {
 public:
  struct BlockCache {
    nn::LayerNorm::Cache ln1;
    nn::MultiHeadAttention::Cache self_attn;
    nn::LayerNorm::Cache ln2;
    nn::MultiHeadAttention::Cache cross_attn;
    nn::LayerNorm::Cache ln3;
    nn::FeedForward::Cache ffn;
  };
  struct Cache {
    std::vector<int> ids;
    std::vector<BlockCache> blocks;
    nn::LayerNorm::Cache final_ln;
  };

  DecoderStack() = default;
  DecoderStack(const nn::ParameterStore& store, const std::string& embed_name,
               const std::string& prefix, const TransformerDims& dims);

  Matrix forward(const nn::ParameterStore& store, std::span<const int> ids, const Matrix& memory,
                 Cache* cache) const;
  /// Accumulates parameter gradients; returns dL/dmemory.
  Matrix backward(nn::ParameterStore& store, const Cache& cache, const Matrix& dout) const;

 private:
  struct Block {
    nn::LayerNorm ln1;
    nn::MultiHeadAttention self_attn;
    nn::LayerNorm ln2;
    nn::MultiHeadAttention cross_attn;
    nn::LayerNorm ln3;
    nn::FeedForward ffn;
  };
  nn::Embedding embed_;
  std::vector<Block> blocks_;
  nn::LayerNorm final_ln_;
  Matrix positions_;
  double embed_scale_ = 1.0;
};

}  // namespace affect::text
