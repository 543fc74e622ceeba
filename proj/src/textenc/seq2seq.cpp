#include "affect/textenc/seq2seq.hpp"

#include <cmath>

#include "affect/common.hpp"
#include "affect/labels.hpp"
#include "affect/nncore/ops.hpp"
#include "affect/nncore/serialize.hpp"
#include "affect/textenc/encoder.hpp"

namespace affect::text {

LabelTokenPair label_target(std::string_view label) {
  auto idx = emotion_index(label);
  if (!idx) {
    throw DataError("not an emotion label: '" + std::string(label) + "'");
  }
  return {kFirstLabelId + static_cast<int>(*idx), kEosId};
}

int constrained_argmax(std::span<const double> logits) {
  if (logits.size() < static_cast<std::size_t>(kFirstWordId)) {
    throw ArgumentError("logits do not cover the label block");
  }
  int best = kFirstLabelId;
  for (int id = kFirstLabelId + 1; id < kFirstLabelId + static_cast<int>(kNumEmotions); ++id) {
    if (logits[static_cast<std::size_t>(id)] > logits[static_cast<std::size_t>(best)]) {
      best = id;
    }
  }
  return best;
}

Seq2SeqModel Seq2SeqModel::create(Vocab vocab, const TransformerDims& dims, std::uint64_t seed) {
  dims.validate();
  std::vector<nn::LayerSpec> specs;
  specs.push_back(nn::LayerSpec::embedding(kEmbedName, vocab.size(), dims.model_dim));
  for (auto& s : encoder_specs(kEncoderName, dims)) {
    specs.push_back(std::move(s));
  }
  for (auto& s : decoder_specs(kDecoderName, dims)) {
    specs.push_back(std::move(s));
  }
  specs.push_back(nn::LayerSpec::softmax_head(kHeadName, dims.model_dim, vocab.size()));
  auto params = nn::init_params(specs, seed);
  return Seq2SeqModel(std::move(vocab), std::move(params), dims);
}

Seq2SeqModel::Seq2SeqModel(Vocab vocab, nn::ParameterStore params, const TransformerDims& dims)
    : vocab_(std::move(vocab)),
      dims_(dims),
      params_(std::move(params)),
      encoder_(params_, kEmbedName, kEncoderName, dims_),
      decoder_(params_, kEmbedName, kDecoderName, dims_),
      head_(params_, kHeadName) {
  if (head_.out_dim() != vocab_.size()) {
    throw ConfigError("decoder output dimension does not match vocabulary size");
  }
}

void Seq2SeqModel::check(const TokenSeq& seq, const LabelTokenPair* target) const {
  if (static_cast<int>(seq.ids.size()) != dims_.max_len || seq.true_length < 1 ||
      seq.true_length > dims_.max_len) {
    throw ArgumentError("token sequence does not match model max_len " +
                        std::to_string(dims_.max_len));
  }
  if (target != nullptr && (!Vocab::is_label_id(target->label_id) || target->eos_id != kEosId)) {
    throw ArgumentError("target label id " + std::to_string(target->label_id) +
                        " is outside the label block");
  }
}

LogProbPair Seq2SeqModel::logprob(const TokenSeq& seq, const LabelTokenPair& target) const {
  check(seq, &target);
  Matrix memory = encoder_.forward(params_, seq.real_ids(), nullptr);
  const int dec_in[2] = {kClsId, target.label_id};
  Matrix logits = head_.forward(params_, decoder_.forward(params_, dec_in, memory, nullptr));
  auto lp1 = nn::log_softmax(std::span<const double>(logits.row(0).data(), logits.cols()));
  auto lp2 = nn::log_softmax(std::span<const double>(logits.row(1).data(), logits.cols()));
  return {lp1[static_cast<std::size_t>(target.label_id)], lp2[static_cast<std::size_t>(target.eos_id)]};
}

double Seq2SeqModel::accumulate_nll(const TokenSeq& seq, const LabelTokenPair& target,
                                    double scale) {
  check(seq, &target);
  EncoderStack::Cache enc_cache;
  DecoderStack::Cache dec_cache;
  Matrix memory = encoder_.forward(params_, seq.real_ids(), &enc_cache);
  const int dec_in[2] = {kClsId, target.label_id};
  Matrix hidden = decoder_.forward(params_, dec_in, memory, &dec_cache);
  Matrix logits = head_.forward(params_, hidden);

  const int gold[2] = {target.label_id, target.eos_id};
  Matrix dlogits(2, logits.cols());
  double nll = 0.0;
  for (int r = 0; r < 2; ++r) {
    auto lp = nn::log_softmax(std::span<const double>(logits.row(r).data(), logits.cols()));
    nll -= lp[static_cast<std::size_t>(gold[r])];
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      dlogits(r, c) = std::exp(lp[static_cast<std::size_t>(c)]) * scale;
    }
    dlogits(r, gold[r]) -= scale;
  }
  Matrix dhidden = head_.backward(params_, hidden, dlogits);
  Matrix dmemory = decoder_.backward(params_, dec_cache, dhidden);
  encoder_.backward(params_, enc_cache, dmemory);
  return nll;
}

std::vector<double> Seq2SeqModel::next_logits(const TokenSeq& seq,
                                              std::span<const int> prefix) const {
  check(seq, nullptr);
  if (prefix.empty() || prefix[0] != kClsId) {
    throw ArgumentError("decoder prefix must start with cls");
  }
  Matrix memory = encoder_.forward(params_, seq.real_ids(), nullptr);
  Matrix hidden = decoder_.forward(params_, prefix, memory, nullptr);
  Matrix logits = head_.forward(params_, hidden.bottomRows(1));
  return {logits.data(), logits.data() + logits.cols()};
}

DecodeResult Seq2SeqModel::decode_constrained(const TokenSeq& seq) const {
  check(seq, nullptr);
  Matrix memory = encoder_.forward(params_, seq.real_ids(), nullptr);
  const int start[1] = {kClsId};
  Matrix first = head_.forward(params_, decoder_.forward(params_, start, memory, nullptr));
  std::span<const double> logits1(first.data(), static_cast<std::size_t>(first.cols()));
  const int label_id = constrained_argmax(logits1);

  const int dec_in[2] = {kClsId, label_id};
  Matrix second = head_.forward(params_, decoder_.forward(params_, dec_in, memory, nullptr));
  auto lp1 = nn::log_softmax(logits1);
  auto lp2 = nn::log_softmax(std::span<const double>(second.row(1).data(), second.cols()));

  DecodeResult out;
  out.label_id = label_id;
  out.label = vocab_.token(label_id);
  out.log_prob = lp1[static_cast<std::size_t>(label_id)] + lp2[kEosId];
  return out;
}

void Seq2SeqModel::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nn::save_store(dir / "params.bin", params_);
  vocab_.save(dir / "vocab.txt");
  save_dims(dir / "dims.cfg", dims_);
}

Seq2SeqModel Seq2SeqModel::load(const std::filesystem::path& dir) {
  return Seq2SeqModel(Vocab::load(dir / "vocab.txt"), nn::load_store(dir / "params.bin"),
                      load_dims(dir / "dims.cfg"));
}

}  // namespace affect::text
