#include "affect/textenc/transformer.hpp"

#include <cmath>

#include "affect/common.hpp"

namespace affect::text {

void TransformerDims::validate() const {
  if (layers <= 0 || model_dim <= 0 || heads <= 0 || ff_dim <= 0 || max_len < 2) {
    throw ConfigError("transformer dims must be positive (max_len >= 2)");
  }
  if (model_dim % heads != 0) {
    throw ConfigError("model_dim not divisible by heads (" + std::to_string(model_dim) + " % " +
                      std::to_string(heads) + ")");
  }
}

std::vector<nn::LayerSpec> encoder_specs(const std::string& prefix, const TransformerDims& dims) {
  dims.validate();
  std::vector<nn::LayerSpec> specs;
  for (int l = 0; l < dims.layers; ++l) {
    const std::string b = prefix + "." + std::to_string(l);
    specs.push_back(nn::LayerSpec::layer_norm(b + ".ln1", dims.model_dim));
    specs.push_back(nn::LayerSpec::attention(b + ".attn", dims.model_dim, dims.heads));
    specs.push_back(nn::LayerSpec::layer_norm(b + ".ln2", dims.model_dim));
    specs.push_back(nn::LayerSpec::feed_forward(b + ".ffn", dims.model_dim, dims.ff_dim));
  }
  specs.push_back(nn::LayerSpec::layer_norm(prefix + ".final_ln", dims.model_dim));
  return specs;
}

std::vector<nn::LayerSpec> decoder_specs(const std::string& prefix, const TransformerDims& dims) {
  dims.validate();
  std::vector<nn::LayerSpec> specs;
  for (int l = 0; l < dims.layers; ++l) {
    const std::string b = prefix + "." + std::to_string(l);
    specs.push_back(nn::LayerSpec::layer_norm(b + ".ln1", dims.model_dim));
    specs.push_back(nn::LayerSpec::attention(b + ".self_attn", dims.model_dim, dims.heads));
    specs.push_back(nn::LayerSpec::layer_norm(b + ".ln2", dims.model_dim));
    specs.push_back(nn::LayerSpec::attention(b + ".cross_attn", dims.model_dim, dims.heads));
    specs.push_back(nn::LayerSpec::layer_norm(b + ".ln3", dims.model_dim));
    specs.push_back(nn::LayerSpec::feed_forward(b + ".ffn", dims.model_dim, dims.ff_dim));
  }
  specs.push_back(nn::LayerSpec::layer_norm(prefix + ".final_ln", dims.model_dim));
  return specs;
}

EncoderStack::EncoderStack(const nn::ParameterStore& store, const std::string& embed_name,
                           const std::string& prefix, const TransformerDims& dims)
    : embed_(store, embed_name),
      final_ln_(store, prefix + ".final_ln"),
      positions_(nn::sinusoidal_positions(dims.max_len, dims.model_dim)),
      embed_scale_(std::sqrt(static_cast<double>(dims.model_dim))) {
  dims.validate();
  if (embed_.dim() != dims.model_dim) {
    throw ConfigError("embedding dim does not match model_dim");
  }
  for (int l = 0; l < dims.layers; ++l) {
    const std::string b = prefix + "." + std::to_string(l);
    blocks_.push_back({nn::LayerNorm(store, b + ".ln1"),
                       nn::MultiHeadAttention(store, b + ".attn", dims.heads),
                       nn::LayerNorm(store, b + ".ln2"), nn::FeedForward(store, b + ".ffn")});
  }
}

Matrix EncoderStack::forward(const nn::ParameterStore& store, std::span<const int> ids,
                             Cache* cache) const {
  if (ids.empty() || static_cast<Eigen::Index>(ids.size()) > positions_.rows()) {
    throw ArgumentError("encoder: sequence length " + std::to_string(ids.size()) +
                        " outside [1, max_len]");
  }
  const auto n = static_cast<Eigen::Index>(ids.size());
  Matrix x = embed_.forward(store, ids) * embed_scale_ + positions_.topRows(n);
  if (cache != nullptr) {
    cache->ids.assign(ids.begin(), ids.end());
    cache->blocks.resize(blocks_.size());
  }
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto& blk = blocks_[l];
    BlockCache* bc = cache != nullptr ? &cache->blocks[l] : nullptr;
    Matrix h = blk.ln1.forward(store, x, bc ? &bc->ln1 : nullptr);
    x += blk.attn.forward(store, h, h, false, bc ? &bc->attn : nullptr);
    h = blk.ln2.forward(store, x, bc ? &bc->ln2 : nullptr);
    x += blk.ffn.forward(store, h, bc ? &bc->ffn : nullptr);
  }
  return final_ln_.forward(store, x, cache ? &cache->final_ln : nullptr);
}

void EncoderStack::backward(nn::ParameterStore& store, const Cache& cache,
                            const Matrix& dout) const {
  Matrix dx = final_ln_.backward(store, cache.final_ln, dout);
  for (std::size_t l = blocks_.size(); l-- > 0;) {
    const auto& blk = blocks_[l];
    const auto& bc = cache.blocks[l];
    Matrix dh = blk.ffn.backward(store, bc.ffn, dx);
    dx += blk.ln2.backward(store, bc.ln2, dh);
    auto g = blk.attn.backward(store, bc.attn, dx);
    g.dxq += g.dxkv;
    dx += blk.ln1.backward(store, bc.ln1, g.dxq);
  }
  embed_.backward(store, cache.ids, dx * embed_scale_);
}

DecoderStack::DecoderStack(const nn::ParameterStore& store, const std::string& embed_name,
                           const std::string& prefix, const TransformerDims& dims)
    : embed_(store, embed_name),
      final_ln_(store, prefix + ".final_ln"),
      positions_(nn::sinusoidal_positions(dims.max_len, dims.model_dim)),
      embed_scale_(std::sqrt(static_cast<double>(dims.model_dim))) {
  dims.validate();
  for (int l = 0; l < dims.layers; ++l) {
    const std::string b = prefix + "." + std::to_string(l);
    blocks_.push_back({nn::LayerNorm(store, b + ".ln1"),
                       nn::MultiHeadAttention(store, b + ".self_attn", dims.heads),
                       nn::LayerNorm(store, b + ".ln2"),
                       nn::MultiHeadAttention(store, b + ".cross_attn", dims.heads),
                       nn::LayerNorm(store, b + ".ln3"), nn::FeedForward(store, b + ".ffn")});
  }
}

Matrix DecoderStack::forward(const nn::ParameterStore& store, std::span<const int> ids,
                             const Matrix& memory, Cache* cache) const {
  if (ids.empty() || static_cast<Eigen::Index>(ids.size()) > positions_.rows()) {
    throw ArgumentError("decoder: bad target length");
  }
  const auto n = static_cast<Eigen::Index>(ids.size());
  Matrix y = embed_.forward(store, ids) * embed_scale_ + positions_.topRows(n);
  if (cache != nullptr) {
    cache->ids.assign(ids.begin(), ids.end());
    cache->blocks.resize(blocks_.size());
  }
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto& blk = blocks_[l];
    BlockCache* bc = cache != nullptr ? &cache->blocks[l] : nullptr;
    Matrix h = blk.ln1.forward(store, y, bc ? &bc->ln1 : nullptr);
    y += blk.self_attn.forward(store, h, h, true, bc ? &bc->self_attn : nullptr);
    h = blk.ln2.forward(store, y, bc ? &bc->ln2 : nullptr);
    y += blk.cross_attn.forward(store, h, memory, false, bc ? &bc->cross_attn : nullptr);
    h = blk.ln3.forward(store, y, bc ? &bc->ln3 : nullptr);
    y += blk.ffn.forward(store, h, bc ? &bc->ffn : nullptr);
  }
  return final_ln_.forward(store, y, cache ? &cache->final_ln : nullptr);
}

Matrix DecoderStack::backward(nn::ParameterStore& store, const Cache& cache,
                              const Matrix& dout) const {
  Matrix dy = final_ln_.backward(store, cache.final_ln, dout);
  Matrix dmemory;
  for (std::size_t l = blocks_.size(); l-- > 0;) {
    const auto& blk = blocks_[l];
    const auto& bc = cache.blocks[l];
    Matrix dh = blk.ffn.backward(store, bc.ffn, dy);
    dy += blk.ln3.backward(store, bc.ln3, dh);
    auto cross = blk.cross_attn.backward(store, bc.cross_attn, dy);
    dy += blk.ln2.backward(store, bc.ln2, cross.dxq);
    if (dmemory.size() == 0) {
      dmemory = std::move(cross.dxkv);
    } else {
      dmemory += cross.dxkv;
    }
    auto self = blk.self_attn.backward(store, bc.self_attn, dy);
    self.dxq += self.dxkv;
    dy += blk.ln1.backward(store, bc.ln1, self.dxq);
  }
  embed_.backward(store, cache.ids, dy * embed_scale_);
  return dmemory;
}

}  // namespace affect::text
