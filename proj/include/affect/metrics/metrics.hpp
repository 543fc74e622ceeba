#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "affect/common.hpp"

namespace affect::metrics {

/// Thrown when a correlation is requested for a constant vector.
class UndefinedCorrelation : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Pearson correlation. Requires equal lengths >= 2 and neither vector
/// constant. The result is clamped to [-1, 1] against round-off.
double pearson(std::span<const double> y_true, std::span<const double> y_pred);

/// Root of the mean squared residual.
double rmse(std::span<const double> y_true, std::span<const double> y_pred);

/// Mean of the empathy and distress correlations; both must lie in [-1, 1].
double r_avg(double r_empathy, double r_distress);

struct RegressionReport {
  double rmse_empathy = 0.0;
  double rmse_distress = 0.0;
  double r_empathy = 0.0;
  double r_distress = 0.0;
  double r_avg = 0.0;
  std::size_t n = 0;
};

RegressionReport regression_report(std::span<const double> gold_empathy,
                                   std::span<const double> pred_empathy,
                                   std::span<const double> gold_distress,
                                   std::span<const double> pred_distress);

struct LabelStats {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassificationReport {
  std::vector<LabelStats> per_label;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  double accuracy = 0.0;
  /// confusion[gold][pred], indexed like per_label.
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t n = 0;
};

/// Per-label and averaged precision/recall/F1 over `labels`. Any ratio with a
/// zero denominator is 0. Macro averages include labels with zero support.
/// Unknown labels in gold or pred throw ArgumentError naming the label.
ClassificationReport classification_report(std::span<const std::string> gold,
                                           std::span<const std::string> pred,
                                           std::span<const std::string> labels);

/// Same, over the seven emotion labels in reporting order.
ClassificationReport classification_report(std::span<const std::string> gold,
                                           std::span<const std::string> pred);

/// Plain-text renderings, values at 3 decimals. The classification table lists
/// Macro F1, Micro F1, Accuracy, Macro/Micro Precision, Macro/Micro Recall in
/// that order, then a per-label breakdown.
std::string render(const RegressionReport& r);
std::string render(const ClassificationReport& r);

nlohmann::json to_json(const RegressionReport& r);
nlohmann::json to_json(const ClassificationReport& r);

}  // namespace affect::metrics
