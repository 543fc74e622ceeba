#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "affect/nncore/layers.hpp"
#include "affect/nncore/params.hpp"

namespace affect::reg {

/// Rows are examples.
using FeatureMatrix = nn::Matrix;

inline std::span<const double> row_span(const FeatureMatrix& x, Eigen::Index i) {
  return {x.data() + i * x.cols(), static_cast<std::size_t>(x.cols())};
}

// ---------------------------------------------------------------- MLP

struct MlpHyper {
  std::vector<int> hidden{64, 32};
  double lr = 1e-3;
  int epochs = 200;
  int batch_size = 16;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
};

/// ReLU multilayer perceptron trained on squared error. Targets are z-scored
/// per output column during training and mapped back at prediction.
struct MlpModel {
  nn::ParameterStore params;
  int input_dim = 0;
  int outputs = 1;
  std::vector<double> target_mean;
  std::vector<double> target_std;

  std::vector<double> predict_all_outputs(std::span<const double> x) const;
};

/// Y has one column per output.
MlpModel fit_mlp(const FeatureMatrix& x, const nn::Matrix& y, const MlpHyper& hyper,
                 std::vector<double>* epoch_loss = nullptr);

// ---------------------------------------------------------------- LinearSVR

struct SvrHyper {
  double epsilon = 0.1;
  double c = 1.0;
  double lr = 1e-3;
  int steps = 5000;
};

/// Linear epsilon-insensitive SVR fitted by subgradient descent on
///   J(w, b) = C * sum_i max(0, |w.x_i + b - y_i| - eps) + 0.5 * |w|^2
/// with step lr / sqrt(1 + t). A step that would raise J is halved until it
/// does not (at most 40 times); if none qualifies the iterate stays put, so J
/// never increases. b is unregularized; w and b start at zero.
struct LinearSvrModel {
  std::vector<double> w;
  double b = 0.0;

  double predict(std::span<const double> x) const;
};

double svr_objective(const LinearSvrModel& m, const FeatureMatrix& x, std::span<const double> y,
                     const SvrHyper& hyper);

LinearSvrModel fit_linear_svr(const FeatureMatrix& x, std::span<const double> y, const SvrHyper& hyper,
                              std::vector<double>* objective_trace = nullptr);

// ---------------------------------------------------------------- AdaBoost.R2

/// x[feature] <= threshold ? left : right. A constant stump has an infinite
/// threshold.
struct Stump {
  int feature = 0;
  double threshold = std::numeric_limits<double>::infinity();
  double left = 0.0;
  double right = 0.0;

  double predict(std::span<const double> x) const { return x[feature] <= threshold ? left : right; }
  bool operator==(const Stump&) const = default;
};

/// Weighted least-squares stump. Rows with zero weight are ignored. Candidate
/// thresholds are midpoints between consecutive distinct values; ties go to
/// the lowest feature, then the lowest threshold. With no usable split the
/// result is a constant stump at the weighted mean.
Stump fit_stump(const FeatureMatrix& x, std::span<const double> y, std::span<const double> weights);

struct AdaBoostHyper {
  int rounds = 50;
  /// Fit each stump to a size-n bootstrap drawn with the current sample
  /// weights (Drucker's formulation). Otherwise fit the weighted sample
  /// directly, which is deterministic and equals the resampled fit in
  /// expectation.
  bool resample = true;
  std::uint64_t seed = 0;
};

struct AdaBoostRound {
  double average_loss = 0.0;
  bool accepted = false;
  /// Sample weights after this round's update.
  std::vector<double> weights;
};

/// Drucker's AdaBoost.R2 with linear loss. Losses are always measured on the
/// full training set. A round whose average loss is >= 0.5 is discarded and
/// ends boosting; a round with zero loss is kept with weight 1 and also ends
/// boosting.
struct AdaBoostR2Model {
  std::vector<Stump> learners;
  /// log(1 / beta) per learner.
  std::vector<double> learner_weights;

  /// Weighted median of the learners' predictions: the smallest prediction
  /// whose cumulative weight reaches half the total.
  double predict(std::span<const double> x) const;
};

AdaBoostR2Model fit_adaboost_r2(const FeatureMatrix& x, std::span<const double> y,
                                const AdaBoostHyper& hyper,
                                std::vector<AdaBoostRound>* trace = nullptr);

// ---------------------------------------------------------------- GBT

struct GbtHyper {
  int trees = 100;
  int max_depth = 3;
  double shrinkage = 0.1;
  int min_samples_leaf = 1;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
};

/// Exact greedy tree on squared error. Splits maximize the SSE reduction;
/// zero-gain splits are taken (an interaction like XOR shows no gain at the
/// first level). Leaves hold the mean target of their samples.
RegressionTree fit_tree(const FeatureMatrix& x, std::span<const double> y, int max_depth,
                        int min_samples_leaf);

/// Squared-error gradient boosting: F0 = mean(y), then each tree fits the
/// current residuals and is added with the shrinkage factor.
struct GbtModel {
  double initial = 0.0;
  double shrinkage = 0.1;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> x) const;
};

/// sse_trace receives the training SSE after the initial constant and after
/// every stage.
GbtModel fit_gbt(const FeatureMatrix& x, std::span<const double> y, const GbtHyper& hyper,
                 std::vector<double>* sse_trace = nullptr);

}  // namespace affect::reg
