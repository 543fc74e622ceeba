#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "affect/corpus/record.hpp"

namespace affect::corpus {

struct ScalerConfig {
  std::vector<std::string> numeric;
  std::vector<std::string> categorical;

  /// age, income, then every personality trait of `train` in sorted order;
  /// gender, ethnicity, education.
  static ScalerConfig defaults_for(const Dataset& train);
};

/// z-scores numeric columns and one-hot encodes categorical columns.
///
/// Output layout: one coordinate per numeric column in config order, then per
/// categorical column its sorted training categories followed by one slot for
/// categories never seen in training. A missing value leaves its whole
/// segment at zero, as does a numeric column with zero spread.
class FeatureScaler {
 public:
  struct NumericStats {
    std::string column;
    double mean = 0.0;
    double std = 0.0;
  };
  struct CategoricalMap {
    std::string column;
    std::vector<std::string> categories;
  };

  bool fitted() const { return fitted_; }
  std::size_t output_dim() const;
  std::vector<std::string> feature_names() const;
  std::vector<double> transform(const EssayRecord& rec) const;

  const std::vector<NumericStats>& numeric() const { return numeric_; }
  const std::vector<CategoricalMap>& categorical() const { return categorical_; }

  nlohmann::json to_json() const;
  static FeatureScaler from_json(const nlohmann::json& j);

  bool operator==(const FeatureScaler&) const;

 private:
  friend FeatureScaler fit_scaler(const Dataset& train, const ScalerConfig& config);

  bool fitted_ = false;
  std::vector<NumericStats> numeric_;
  std::vector<CategoricalMap> categorical_;
};

/// Statistics use the population standard deviation over present values.
FeatureScaler fit_scaler(const Dataset& train, const ScalerConfig& config);

}  // namespace affect::corpus
