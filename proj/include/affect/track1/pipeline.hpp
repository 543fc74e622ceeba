#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "affect/corpus/record.hpp"
#include "affect/corpus/scaler.hpp"
#include "affect/regressors/regressor.hpp"
#include "affect/track1/finetune.hpp"

namespace affect::track1 {

/// `empathy_only` drops the distress-encoder segment (the single-encoder
/// ablation).
enum class FeatureMode { both, empathy_only };

std::string_view to_string(FeatureMode m);
FeatureMode parse_feature_mode(std::string_view s);

struct FeatureLayout {
  int d_emp = 0;
  int d_dis = 0;
  int n_feat = 0;

  int total() const { return d_emp + d_dis + n_feat; }
  bool operator==(const FeatureLayout&) const = default;
};

/// pooled_empathy, then pooled_distress, then scaled features.
struct SharedFeatureVector {
  std::vector<double> values;
  FeatureLayout layout;
};

struct Track1Hyper {
  EncoderHyper encoder;
  reg::RegressorHyper regressor;
  FeatureMode features = FeatureMode::both;
  /// One two-output MLP instead of one regressor per target.
  bool joint_mlp = false;
  std::optional<corpus::ScalerConfig> scaler;  // defaults_for(train) when unset
  corpus::ScoreRange range;
  int workers = 1;
  /// Master seed; encoder init/shuffle seeds and the MLP and AdaBoost seeds
  /// derive from it.
  std::uint64_t seed = 0;

  void validate() const;
};

struct EncoderPair {
  FinetunedEncoder empathy;
  FinetunedEncoder distress;
};

class Track1Pipeline {
 public:
  Track1Pipeline(EncoderPair encoders, corpus::FeatureScaler scaler, FeatureMode mode,
                 std::vector<reg::RegressorModel> regressors, corpus::ScoreRange range);

  FeatureMode mode() const { return mode_; }
  FeatureLayout layout() const;
  const EncoderPair& encoders() const { return encoders_; }
  const corpus::FeatureScaler& scaler() const { return scaler_; }
  /// Two models (empathy, distress), or one joint two-output MLP.
  const std::vector<reg::RegressorModel>& regressors() const { return regressors_; }
  corpus::ScoreRange range() const { return range_; }

  SharedFeatureVector features(const corpus::EssayRecord& rec) const;
  /// One row per record, in record order.
  reg::FeatureMatrix feature_matrix(const corpus::Dataset& d, int workers = 1) const;

  /// (empathy, distress), clamped to the score range.
  std::pair<double, double> predict(const corpus::EssayRecord& rec) const;
  std::vector<std::pair<double, double>> predict_all(const corpus::Dataset& d, int workers = 1) const;

  /// Bundle directory: manifest.json, encoder_empathy/, encoder_distress/,
  /// scaler.json and regressor_*.json.
  void save(const std::filesystem::path& dir) const;
  static Track1Pipeline load(const std::filesystem::path& dir);

 private:
  std::pair<double, double> predict_from(std::span<const double> x) const;

  EncoderPair encoders_;
  corpus::FeatureScaler scaler_;
  FeatureMode mode_;
  std::vector<reg::RegressorModel> regressors_;
  corpus::ScoreRange range_;
};

/// Stage 2: both encoders, each with its own derived seeds.
EncoderPair finetune_encoders(const corpus::Dataset& train, const Track1Hyper& hyper);

/// Stages 1, 3 and 4 on top of already fine-tuned encoders: fit the scaler,
/// build the shared feature matrix, fit the regressors.
Track1Pipeline assemble_pipeline(const corpus::Dataset& train, const Track1Hyper& hyper, EncoderPair encoders);

Track1Pipeline train_pipeline(const corpus::Dataset& train, const Track1Hyper& hyper);

/// No header; empathy<TAB>distress per line with 6 decimals.
void write_submission(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& preds);

}  // namespace affect::track1
