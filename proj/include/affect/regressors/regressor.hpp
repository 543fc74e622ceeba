#pragma once

#include <filesystem>
#include <string_view>
#include <variant>

#include <nlohmann/json_fwd.hpp>

#include "affect/regressors/models.hpp"

namespace affect::reg {

enum class RegressorKind { mlp, linear_svr, adaboost_r2, gbt };

inline constexpr RegressorKind kAllKinds[] = {RegressorKind::mlp, RegressorKind::linear_svr,
                                              RegressorKind::adaboost_r2, RegressorKind::gbt};

std::string_view to_string(RegressorKind kind);
/// Accepts mlp, svr / linear_svr, adaboost / adaboost_r2, gbt / xgboost.
RegressorKind parse_kind(std::string_view s);

struct RegressorHyper {
  RegressorKind kind = RegressorKind::mlp;
  MlpHyper mlp;
  SvrHyper svr;
  AdaBoostHyper adaboost;
  GbtHyper gbt;

  /// Checks only the active kind's settings; throws ConfigError.
  void validate() const;
  /// The active kind's settings.
  nlohmann::json to_json() const;
  static RegressorHyper from_json(RegressorKind kind, const nlohmann::json& j);
};

/// A fitted regressor of any kind behind one predict contract.
class RegressorModel {
 public:
  using Content = std::variant<MlpModel, LinearSvrModel, AdaBoostR2Model, GbtModel>;

  RegressorModel(RegressorHyper hyper, int input_dim, Content content);

  RegressorKind kind() const { return hyper_.kind; }
  const RegressorHyper& hyper() const { return hyper_; }
  int input_dim() const { return input_dim_; }
  const Content& content() const { return content_; }

  /// Throws ArgumentError when x.size() != input_dim().
  double predict(std::span<const double> x) const;
  std::vector<double> predict_all(const FeatureMatrix& x) const;
  /// Every output of a multi-output MLP; a single value for other kinds.
  std::vector<double> predict_outputs(std::span<const double> x) const;
  int outputs() const;

  /// {"format", "version", "kind", "hyper", "input_dim", "model"}.
  nlohmann::json to_json() const;
  static RegressorModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static RegressorModel load(const std::filesystem::path& path);

 private:
  RegressorHyper hyper_;
  int input_dim_ = 0;
  Content content_;
};

/// Requires rows(x) == y.size() >= 2 and finite features.
RegressorModel fit(const RegressorHyper& hyper, const FeatureMatrix& x, std::span<const double> y);

/// One MLP with a column of outputs per target column of y.
RegressorModel fit_multi_output_mlp(const RegressorHyper& hyper, const FeatureMatrix& x,
                                    const nn::Matrix& y);

void check_training_data(const FeatureMatrix& x, std::size_t n_targets);

}  // namespace affect::reg
