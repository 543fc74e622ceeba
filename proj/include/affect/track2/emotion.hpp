#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "affect/corpus/record.hpp"
#include "affect/labels.hpp"
#include "affect/nncore/trainer.hpp"
#include "affect/textenc/encoder.hpp"
#include "affect/textenc/seq2seq.hpp"

namespace affect::track2 {

/// Label indices (into kEmotionLabels) of every record. Missing or unknown
/// labels throw DataError listing the offending records.
std::vector<std::size_t> label_indices(const corpus::Dataset& d);

struct ModelHyper {
  text::TransformerDims dims;
  int vocab_min_freq = 1;
  int vocab_max_size = 20000;
  nn::TrainHyper train;
  std::uint64_t init_seed = 0;

  void validate() const;
};

/// One training stage: corpus id (its provenance string) and mean loss per
/// example. train_loss[0] is measured before the first update, then one entry
/// per epoch. valid_loss is filled only for early-stopped stages.
struct StageLog {
  std::string corpus;
  std::vector<double> train_loss;
  std::vector<double> valid_loss;
  int best_epoch = 0;

  bool operator==(const StageLog&) const = default;
};

class GenEmotionModel {
 public:
  explicit GenEmotionModel(text::Seq2SeqModel model, std::vector<StageLog> stages = {});

  const text::Seq2SeqModel& model() const { return model_; }
  text::Seq2SeqModel& model() { return model_; }
  const std::vector<StageLog>& stages() const { return stages_; }
  /// Corpus ids of the applied stages, oldest first.
  std::vector<std::string> provenance() const;
  void add_stage(StageLog log) { stages_.push_back(std::move(log)); }

  /// Seq2seq files plus stages.json.
  void save(const std::filesystem::path& dir) const;
  static GenEmotionModel load(const std::filesystem::path& dir);

 private:
  text::Seq2SeqModel model_;
  std::vector<StageLog> stages_;
};

/// Sum over records of -log p(label, eos | essay), teacher forced.
double generator_nll(const text::Seq2SeqModel& model, const corpus::Dataset& d);

GenEmotionModel train_generator(const corpus::Dataset& train, const ModelHyper& hyper);

struct StagedHyper {
  /// Dims, vocabulary, init seed and the main-stage schedule.
  ModelHyper model;
  /// Aux-stage schedule; epochs is the upper bound.
  nn::TrainHyper aux_train;
  /// Epochs without aux validation improvement before stopping.
  int patience = 3;
  /// Share of aux held out for validation.
  double aux_valid_fraction = 0.2;
  std::uint64_t split_seed = 0;

  void validate() const;
};

/// Aux stage with early stopping (best epoch restored), then the main stage
/// with fresh optimizer state. The vocabulary covers both corpora. An empty
/// aux corpus skips the first stage, giving exactly train_generator(main).
GenEmotionModel staged_finetune(const corpus::Dataset& aux, const corpus::Dataset& main, const StagedHyper& hyper);

enum class ClsLoss { softmax_ce, per_label_bce };

std::string_view to_string(ClsLoss l);
ClsLoss parse_cls_loss(std::string_view s);

/// Pooled-embedding classifier: encoder plus a linear model_dim -> 7 head.
class ClsEmotionModel {
 public:
  static constexpr const char* kHeadName = "head";

  static ClsEmotionModel create(text::Vocab vocab, const text::TransformerDims& dims, std::uint64_t seed,
                                ClsLoss mode);
  ClsEmotionModel(text::EncoderModel encoder, ClsLoss mode, std::vector<double> train_log = {});

  ClsLoss mode() const { return mode_; }
  const text::EncoderModel& encoder() const { return encoder_; }
  nn::ParameterStore& params() { return encoder_.params(); }
  /// Same convention as StageLog::train_loss.
  const std::vector<double>& train_log() const { return train_log_; }

  /// Raw per-label logits in kEmotionLabels order.
  std::array<double, kNumEmotions> scores(std::string_view essay) const;
  std::array<double, kNumEmotions> scores(const text::TokenSeq& seq) const;

  double loss(const text::TokenSeq& seq, std::size_t label) const;
  /// Adds scale * dloss/dtheta into params() and returns the loss.
  double accumulate_loss(const text::TokenSeq& seq, std::size_t label, double scale);

  /// Encoder files plus mode.cfg and train_log.tsv.
  void save(const std::filesystem::path& dir) const;
  static ClsEmotionModel load(const std::filesystem::path& dir);

 private:
  friend ClsEmotionModel train_classifier(const corpus::Dataset&, ClsLoss, const ModelHyper&);

  text::EncoderModel encoder_;
  nn::Linear head_;
  ClsLoss mode_;
  std::vector<double> train_log_;
};

ClsEmotionModel train_classifier(const corpus::Dataset& train, ClsLoss mode, const ModelHyper& hyper);

/// Always one of the seven labels.
std::string predict_emotion(const GenEmotionModel& model, std::string_view essay);
/// Argmax of the scores, lowest index on ties.
std::string predict_emotion(const ClsEmotionModel& model, std::string_view essay);

/// In record order; records are spread over `workers` threads.
std::vector<std::string> predict_all(const GenEmotionModel& model, const corpus::Dataset& d, int workers = 1);
std::vector<std::string> predict_all(const ClsEmotionModel& model, const corpus::Dataset& d, int workers = 1);

/// One lowercase label per line.
void write_submission(const std::filesystem::path& path, const std::vector<std::string>& labels);

}  // namespace affect::track2
