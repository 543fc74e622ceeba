#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "affect/corpus/record.hpp"
#include "affect/nncore/layers.hpp"
#include "affect/nncore/trainer.hpp"
#include "affect/textenc/encoder.hpp"

namespace affect::track1 {

struct EncoderHyper {
  text::TransformerDims dims;
  int vocab_min_freq = 1;
  int vocab_max_size = 20000;
  /// lr, epochs, batch size, step cap, clipping and the shuffle seed. The
  /// parameter-init seed is separate.
  nn::TrainHyper train;
  std::uint64_t init_seed = 0;

  void validate() const;
};

/// Transformer encoder plus a linear head (model_dim -> 1) regressing one
/// score. The head sees standardized targets; predictions are mapped back to
/// score units.
class FinetunedEncoder {
 public:
  static constexpr const char* kHeadName = "head";

  /// Untrained model with the head declared in the encoder's store.
  static FinetunedEncoder create(corpus::Target target, text::Vocab vocab, const text::TransformerDims& dims,
                                 std::uint64_t seed, double target_mean = 0.0, double target_std = 1.0);

  FinetunedEncoder(corpus::Target target, text::EncoderModel encoder, double target_mean, double target_std,
                   std::vector<double> train_log = {});

  corpus::Target target() const { return target_; }
  const text::EncoderModel& encoder() const { return encoder_; }
  nn::ParameterStore& params() { return encoder_.params(); }
  double target_mean() const { return target_mean_; }
  double target_std() const { return target_std_; }
  /// Training RMSE in score units after each epoch, as recorded.
  const std::vector<double>& train_log() const { return train_log_; }

  std::vector<double> pooled(std::string_view essay) const;
  double predict(std::string_view essay) const;

  /// Squared error in standardized units for one example.
  double loss(const text::TokenSeq& seq, double score) const;
  /// Adds scale * dloss/dtheta into params() and returns the loss.
  double accumulate_loss(const text::TokenSeq& seq, double score, double scale);

  /// Encoder files plus target.cfg and train_log.tsv.
  void save(const std::filesystem::path& dir) const;
  static FinetunedEncoder load(const std::filesystem::path& dir);

 private:
  friend FinetunedEncoder finetune_encoder(const corpus::Dataset&, corpus::Target, const EncoderHyper&,
                                           const text::Vocab*);

  corpus::Target target_;
  text::EncoderModel encoder_;
  nn::Linear head_;
  double target_mean_;
  double target_std_;
  std::vector<double> train_log_;
};

/// Trains encoder and head end-to-end with Adam on squared error. The
/// vocabulary is built from the training essays unless one is supplied.
/// Throws DataError listing every record without the target score.
FinetunedEncoder finetune_encoder(const corpus::Dataset& train, corpus::Target target, const EncoderHyper& hyper,
                                  const text::Vocab* vocab = nullptr);

}  // namespace affect::track1
