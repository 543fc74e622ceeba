#include "affect/track1/finetune.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "affect/common.hpp"
#include "affect/nncore/optim.hpp"

namespace affect::track1 {

void EncoderHyper::validate() const {
  dims.validate();
  train.validate();
  if (vocab_min_freq < 1) throw ConfigError("vocab_min_freq must be >= 1");
}

FinetunedEncoder FinetunedEncoder::create(corpus::Target target, text::Vocab vocab,
                                          const text::TransformerDims& dims, std::uint64_t seed,
                                          double target_mean, double target_std) {
  auto enc = text::EncoderModel::create(std::move(vocab), dims, seed,
                                        {nn::LayerSpec::linear(kHeadName, dims.model_dim, 1)});
  return FinetunedEncoder(target, std::move(enc), target_mean, target_std);
}

FinetunedEncoder::FinetunedEncoder(corpus::Target target, text::EncoderModel encoder, double target_mean,
                                   double target_std, std::vector<double> train_log)
    : target_(target),
      encoder_(std::move(encoder)),
      head_(encoder_.params(), kHeadName),
      target_mean_(target_mean),
      target_std_(target_std),
      train_log_(std::move(train_log)) {
  if (!(target_std_ > 0.0)) throw ConfigError("target scale must be positive");
  if (head_.out_dim() != 1 || head_.in_dim() != encoder_.dims().model_dim) {
    throw ConfigError("regression head must map model_dim to 1");
  }
}

std::vector<double> FinetunedEncoder::pooled(std::string_view essay) const {
  return encoder_.encode_pooled(encoder_.tokenize(essay));
}

double FinetunedEncoder::predict(std::string_view essay) const {
  const nn::Matrix p = encoder_.pooled_forward(encoder_.tokenize(essay), nullptr);
  return head_.forward(encoder_.params(), p)(0, 0) * target_std_ + target_mean_;
}

double FinetunedEncoder::loss(const text::TokenSeq& seq, double score) const {
  const nn::Matrix p = encoder_.pooled_forward(seq, nullptr);
  const double diff = head_.forward(encoder_.params(), p)(0, 0) - (score - target_mean_) / target_std_;
  return diff * diff;
}

double FinetunedEncoder::accumulate_loss(const text::TokenSeq& seq, double score, double scale) {
  text::EncoderStack::Cache cache;
  const nn::Matrix p = encoder_.pooled_forward(seq, &cache);
  const double diff = head_.forward(encoder_.params(), p)(0, 0) - (score - target_mean_) / target_std_;
  nn::Matrix dy(1, 1);
  dy(0, 0) = 2.0 * diff * scale;
  const nn::Matrix dp = head_.backward(encoder_.params(), p, dy);
  encoder_.pooled_backward(cache, dp.row(0));
  return diff * diff;
}

void FinetunedEncoder::save(const std::filesystem::path& dir) const {
  encoder_.save(dir);
  std::ofstream meta(dir / "target.cfg");
  meta << "target = " << corpus::to_string(target_) << '\n'
       << "mean = " << format_shortest(target_mean_) << '\n'
       << "std = " << format_shortest(target_std_) << '\n';
  std::ofstream log(dir / "train_log.tsv");
  for (std::size_t e = 0; e < train_log_.size(); ++e) log << e + 1 << '\t' << format_shortest(train_log_[e]) << '\n';
  if (!meta || !log) throw DataError("cannot write encoder metadata in " + dir.string());
}

FinetunedEncoder FinetunedEncoder::load(const std::filesystem::path& dir) {
  std::ifstream meta(dir / "target.cfg");
  if (!meta) throw DataError("cannot read " + (dir / "target.cfg").string());
  std::map<std::string, std::string> kv;
  for (std::string line; std::getline(meta, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  if (!kv.count("target") || !kv.count("mean") || !kv.count("std")) {
    throw DataError((dir / "target.cfg").string() + ": missing target, mean or std");
  }
  std::vector<double> log;
  std::ifstream lf(dir / "train_log.tsv");
  for (std::string line; std::getline(lf, line);) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos) log.push_back(std::stod(line.substr(tab + 1)));
  }
  return FinetunedEncoder(corpus::parse_target(kv["target"]), text::EncoderModel::load(dir), std::stod(kv["mean"]),
                          std::stod(kv["std"]), std::move(log));
}

FinetunedEncoder finetune_encoder(const corpus::Dataset& train, corpus::Target target, const EncoderHyper& hyper,
                                  const text::Vocab* vocab) {
  hyper.validate();
  std::vector<std::string> missing;
  std::vector<double> y;
  for (const auto& r : train.records) {
    auto v = corpus::target_value(r, target);
    if (!v) {
      missing.push_back(r.id + ": no " + std::string(corpus::to_string(target)) + " score");
    } else {
      y.push_back(*v);
    }
  }
  if (!missing.empty()) {
    throw DataError(std::to_string(missing.size()) + " training record(s) lack the " +
                        std::string(corpus::to_string(target)) + " score",
                    std::move(missing));
  }
  if (y.empty()) throw DataError("empty training set");

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / static_cast<double>(y.size()));
  if (!(sd > 0.0)) sd = 1.0;

  text::Vocab v = vocab ? *vocab : text::build_vocab(train.essays(), hyper.vocab_min_freq, hyper.vocab_max_size);
  auto model = FinetunedEncoder::create(target, std::move(v), hyper.dims, hyper.init_seed, mean, sd);

  std::vector<text::TokenSeq> seqs;
  seqs.reserve(train.size());
  for (const auto& r : train.records) seqs.push_back(model.encoder().tokenize(r.essay));

  auto state = nn::AdamState::for_store(model.params(), hyper.train.lr);
  double epoch_sq = 0.0;
  std::size_t epoch_n = 0;
  nn::train_minibatch(
      model.params(), state, seqs.size(), hyper.train,
      [&](std::size_t i, double scale) {
        const double l = model.accumulate_loss(seqs[i], y[i], scale);
        epoch_sq += l;
        ++epoch_n;
        return l;
      },
      [&](int) {
        model.train_log_.push_back(std::sqrt(epoch_sq / static_cast<double>(epoch_n)) * sd);
        epoch_sq = 0.0;
        epoch_n = 0;
        return true;
      });
  return model;
}

}  // namespace affect::track1
