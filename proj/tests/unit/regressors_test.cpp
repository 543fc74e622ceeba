#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "affect/common.hpp"
#include "affect/regressors/regressor.hpp"

namespace affect::reg {
namespace {

FeatureMatrix column(std::initializer_list<double> v) {
  FeatureMatrix x(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double d : v) x(i++, 0) = d;
  return x;
}

struct Data {
  FeatureMatrix x;
  std::vector<double> y;
};

Data random_linear(std::uint64_t seed, int n, int d, double noise) {
  Rng rng(seed);
  Data out{FeatureMatrix(n, d), std::vector<double>(static_cast<std::size_t>(n))};
  std::vector<double> w(static_cast<std::size_t>(d));
  for (auto& v : w) v = rng.uniform(-2.0, 2.0);
  for (int i = 0; i < n; ++i) {
    double s = 3.0;
    for (int j = 0; j < d; ++j) {
      out.x(i, j) = rng.normal();
      s += w[static_cast<std::size_t>(j)] * out.x(i, j);
    }
    out.y[static_cast<std::size_t>(i)] = s + noise * rng.normal();
  }
  return out;
}

double train_rmse(const RegressorModel& m, const Data& d) {
  double s = 0.0;
  auto p = m.predict_all(d.x);
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - d.y[i]) * (p[i] - d.y[i]);
  return std::sqrt(s / static_cast<double>(p.size()));
}

// ------------------------------------------------------------- LinearSVR

TEST(LinearSvr, RecoversSlope) {
  FeatureMatrix x(20, 1);
  std::vector<double> y(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = i + 1;
    y[static_cast<std::size_t>(i)] = 2.0 * (i + 1);
  }
  SvrHyper h;
  h.epsilon = 0.01;
  h.steps = 5000;
  auto m = fit_linear_svr(x, y, h);
  EXPECT_GE(m.w[0], 1.9);
  EXPECT_LE(m.w[0], 2.1);
}

TEST(LinearSvr, ObjectiveNeverIncreases) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    auto d = random_linear(seed, 40, 5, 0.3);
    SvrHyper h;
    h.steps = 800;
    h.lr = 0.05;
    std::vector<double> trace;
    auto m = fit_linear_svr(d.x, d.y, h, &trace);
    ASSERT_EQ(trace.size(), 801u);
    for (std::size_t t = 1; t < trace.size(); ++t) EXPECT_LE(trace[t], trace[t - 1]);
    EXPECT_LT(trace.back(), trace.front());
    EXPECT_EQ(trace.back(), svr_objective(m, d.x, d.y, h));
  }
}

// ------------------------------------------------------------- AdaBoost.R2

TEST(AdaBoost, FourPointHandTrace) {
  auto x = column({0, 1, 2, 3});
  std::vector<double> y{0, 0, 1, 1};
  std::vector<AdaBoostRound> trace;
  auto m = fit_adaboost_r2(x, y, AdaBoostHyper{1, false}, &trace);
  ASSERT_EQ(m.learners.size(), 1u);
  EXPECT_EQ(m.learners[0].feature, 0);
  EXPECT_EQ(m.learners[0].threshold, 1.5);
  EXPECT_EQ(m.learners[0].left, 0.0);
  EXPECT_EQ(m.learners[0].right, 1.0);
  for (int i = 0; i < 4; ++i) {
    const double xi = i;
    EXPECT_EQ(m.predict(std::span<const double>(&xi, 1)), y[static_cast<std::size_t>(i)]);
  }
  ASSERT_EQ(trace.size(), 1u);
  EXPECT_EQ(trace[0].average_loss, 0.0);
  double sum = 0.0;
  for (double w : trace[0].weights) {
    EXPECT_GE(w, 0.0);
    sum += w;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

// Independent single-round execution of Drucker's update: exhaustive stump
// search by direct weighted SSE, then the linear-loss reweighting.
struct OracleRound {
  double threshold, left, right, avg_loss;
  std::vector<double> weights;
};

OracleRound oracle_round(const std::vector<double>& xs, const std::vector<double>& y,
                         const std::vector<double>& w) {
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  OracleRound best{0, 0, 0, 0, {}};
  double best_sse = INFINITY;
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
    const double thr = (sorted[k] + sorted[k + 1]) / 2;
    double wl = 0, wr = 0, sl = 0, sr = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      (xs[i] <= thr ? wl : wr) += w[i];
      (xs[i] <= thr ? sl : sr) += w[i] * y[i];
    }
    const double l = sl / wl;
    const double r = sr / wr;
    double sse = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) sse += w[i] * std::pow(y[i] - (xs[i] <= thr ? l : r), 2);
    if (sse < best_sse - 1e-12) {
      best_sse = sse;
      best.threshold = thr;
      best.left = l;
      best.right = r;
    }
  }
  std::vector<double> err(xs.size());
  double emax = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    err[i] = std::abs(y[i] - (xs[i] <= best.threshold ? best.left : best.right));
    emax = std::max(emax, err[i]);
  }
  for (std::size_t i = 0; i < xs.size(); ++i) best.avg_loss += w[i] * err[i] / emax;
  const double beta = best.avg_loss / (1 - best.avg_loss);
  double z = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    best.weights.push_back(w[i] * std::pow(beta, 1 - err[i] / emax));
    z += best.weights.back();
  }
  for (auto& v : best.weights) v /= z;
  return best;
}

TEST(AdaBoost, FirstRoundMatchesOracle) {
  Rng rng(21);
  int compared = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 6 + static_cast<int>(rng.below(10));
    FeatureMatrix x(n, 1);
    std::vector<double> xs(static_cast<std::size_t>(n));
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      xs[static_cast<std::size_t>(i)] = x(i, 0) = std::round(rng.uniform(0, 20));
      y[static_cast<std::size_t>(i)] = 0.3 * x(i, 0) + rng.normal();
    }
    std::vector<AdaBoostRound> trace;
    auto m = fit_adaboost_r2(x, y, AdaBoostHyper{1, false}, &trace);
    auto o = oracle_round(xs, y, std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));
    ASSERT_EQ(trace.size(), 1u);
    EXPECT_NEAR(trace[0].average_loss, o.avg_loss, 1e-12);
    if (o.avg_loss >= 0.5) {
      EXPECT_FALSE(trace[0].accepted);
      continue;
    }
    ++compared;
    EXPECT_EQ(m.learners[0].threshold, o.threshold);
    EXPECT_NEAR(m.learners[0].left, o.left, 1e-12);
    EXPECT_NEAR(m.learners[0].right, o.right, 1e-12);
    EXPECT_NEAR(m.learner_weights[0], std::log((1 - o.avg_loss) / o.avg_loss), 1e-12);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(trace[0].weights[static_cast<std::size_t>(i)], o.weights[static_cast<std::size_t>(i)], 1e-12);
    }
  }
  EXPECT_GT(compared, 10);
}

TEST(AdaBoost, WeightsStayDistributionsAndModelWeightsNonNegative) {
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    auto d = random_linear(seed, 50, 3, 0.5);
    std::vector<AdaBoostRound> trace;
    auto m = fit_adaboost_r2(d.x, d.y, AdaBoostHyper{30, seed != 5u, seed}, &trace);
    for (const auto& r : trace) {
      double s = 0;
      for (double w : r.weights) s += w;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
    for (std::size_t t = 0; t + 1 < trace.size(); ++t) EXPECT_TRUE(trace[t].accepted);
    if (!trace.back().accepted) {
      EXPECT_GE(trace.back().average_loss, 0.5);
    }
    for (double w : m.learner_weights) EXPECT_GE(w, 0.0);
  }
}

TEST(AdaBoost, CountWeightedStumpEqualsStumpOnMaterializedBootstrap) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto d = random_linear(rng.next_u64(), 15, 3, 0.3);
    std::vector<double> counts(15, 0.0);
    for (int k = 0; k < 15; ++k) counts[rng.below(15)] += 1.0;
    FeatureMatrix xs(15, 3);
    std::vector<double> ys;
    Eigen::Index row = 0;
    for (int i = 0; i < 15; ++i) {
      for (int c = 0; c < static_cast<int>(counts[static_cast<std::size_t>(i)]); ++c) {
        xs.row(row++) = d.x.row(i);
        ys.push_back(d.y[static_cast<std::size_t>(i)]);
      }
    }
    const auto a = fit_stump(d.x, d.y, counts);
    const auto b = fit_stump(xs, ys, std::vector<double>(15, 1.0));
    EXPECT_EQ(a.feature, b.feature);
    EXPECT_EQ(a.threshold, b.threshold);
    EXPECT_NEAR(a.left, b.left, 1e-12);
    EXPECT_NEAR(a.right, b.right, 1e-12);
  }
}

TEST(AdaBoost, ResamplingIsSeedDeterministic) {
  auto d = random_linear(3, 40, 3, 0.5);
  const AdaBoostHyper h{20, true, 99};
  auto a = fit_adaboost_r2(d.x, d.y, h);
  auto b = fit_adaboost_r2(d.x, d.y, h);
  EXPECT_EQ(a.learners, b.learners);
  EXPECT_EQ(a.learner_weights, b.learner_weights);
}

TEST(AdaBoost, WeightedMedianMatchesBruteForce) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    AdaBoostR2Model m;
    const int k = 1 + static_cast<int>(rng.below(9));
    for (int t = 0; t < k; ++t) {
      Stump s;
      s.left = s.right = std::round(rng.uniform(0, 10));
      m.learners.push_back(s);
      m.learner_weights.push_back(rng.uniform(0.1, 3.0));
    }
    const double x0 = 0.0;
    const double got = m.predict(std::span<const double>(&x0, 1));
    // Smallest candidate value v with weight(pred <= v) >= half the total.
    double total = 0;
    for (double w : m.learner_weights) total += w;
    double expect = INFINITY;
    for (const auto& cand : m.learners) {
      double below = 0;
      for (std::size_t t = 0; t < m.learners.size(); ++t) {
        if (m.learners[t].left <= cand.left) below += m.learner_weights[t];
      }
      if (below >= 0.5 * total) expect = std::min(expect, cand.left);
    }
    EXPECT_EQ(got, expect);
    if (k == 1) {
      EXPECT_EQ(got, m.learners[0].left);
    }
  }
}

// ------------------------------------------------------------- GBT

TEST(Gbt, LearnsXor) {
  FeatureMatrix x(8, 2);
  std::vector<double> y(8);
  for (int i = 0; i < 8; ++i) {
    const int a = i & 1;
    const int b = (i >> 1) & 1;
    x(i, 0) = a;
    x(i, 1) = b;
    y[static_cast<std::size_t>(i)] = a ^ b;
  }
  GbtHyper h;
  h.trees = 50;
  h.max_depth = 2;
  h.shrinkage = 0.3;
  auto m = fit_gbt(x, y, h);
  double s = 0;
  for (int i = 0; i < 8; ++i) s += std::pow(m.predict(row_span(x, i)) - y[static_cast<std::size_t>(i)], 2);
  EXPECT_LT(std::sqrt(s / 8), 0.05);
}

TEST(Gbt, TrainingSseNeverIncreases) {
  Rng rng(12);
  for (int trial = 0; trial < 12; ++trial) {
    auto d = random_linear(rng.next_u64(), 30, 3, 1.0);
    GbtHyper h;
    h.trees = 25;
    h.max_depth = 1 + static_cast<int>(rng.below(3));
    h.shrinkage = trial == 0 ? 1.0 : rng.uniform(0.01, 1.0);
    std::vector<double> trace;
    fit_gbt(d.x, d.y, h, &trace);
    ASSERT_EQ(trace.size(), 26u);
    for (std::size_t t = 1; t < trace.size(); ++t) EXPECT_LE(trace[t], trace[t - 1] * (1 + 1e-12));
  }
}

TEST(Gbt, ZeroTreesPredictsMean) {
  auto x = column({1, 2, 3, 10});
  std::vector<double> y{1.5, 2.5, 4.0, 8.0};
  GbtHyper h;
  h.trees = 0;
  auto m = fit_gbt(x, y, h);
  const double v = 100.0;
  EXPECT_EQ(m.initial, 4.0);
  EXPECT_EQ(m.predict(std::span<const double>(&v, 1)), 4.0);
}

// ------------------------------------------------------------- MLP

TEST(Mlp, FitsLinearFunction) {
  auto d = random_linear(9, 80, 4, 0.05);
  RegressorHyper h;
  h.kind = RegressorKind::mlp;
  h.mlp.hidden = {16, 8};
  h.mlp.epochs = 200;
  h.mlp.lr = 3e-3;
  auto m = fit(h, d.x, d.y);
  EXPECT_LT(train_rmse(m, d), 0.3);
}

TEST(Mlp, PredictionMatchesManualForwardFromFile) {
  auto d = random_linear(10, 30, 3, 0.1);
  RegressorHyper h;
  h.kind = RegressorKind::mlp;
  h.mlp.hidden = {5, 4};
  h.mlp.epochs = 20;
  auto m = fit(h, d.x, d.y);
  auto j = nlohmann::json::parse(m.to_json().dump());
  const auto& values = j["model"]["params"]["values"];
  const auto& specs = j["model"]["params"]["specs"];
  for (int i = 0; i < 5; ++i) {
    std::vector<double> h0(d.x.row(i).data(), d.x.row(i).data() + 3);
    for (std::size_t l = 0; l < specs.size(); ++l) {
      const std::string name = specs[l]["name"];
      const int in = specs[l]["dims"][0];
      const int out = specs[l]["dims"][1];
      auto w = values[name + ".weight"].get<std::vector<double>>();
      auto b = values[name + ".bias"].get<std::vector<double>>();
      std::vector<double> h1(static_cast<std::size_t>(out));
      for (int o = 0; o < out; ++o) {
        double s = b[static_cast<std::size_t>(o)];
        for (int k = 0; k < in; ++k) s += h0[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(k * out + o)];
        h1[static_cast<std::size_t>(o)] = l + 1 < specs.size() ? std::max(0.0, s) : s;
      }
      h0 = h1;
    }
    const double manual = h0[0] * j["model"]["target_std"][0].get<double>() + j["model"]["target_mean"][0].get<double>();
    EXPECT_NEAR(m.predict(row_span(d.x, i)), manual, 1e-12);
  }
}

// ------------------------------------------------------------- shared contract

RegressorHyper quick(RegressorKind kind) {
  RegressorHyper h;
  h.kind = kind;
  h.mlp.epochs = 30;
  h.svr.steps = 300;
  h.adaboost.rounds = 10;
  h.gbt.trees = 10;
  return h;
}

TEST(Regressor, SerializationRoundTripAllKinds) {
  auto d = random_linear(33, 25, 3, 0.2);
  auto path = std::filesystem::temp_directory_path() / "affect_reg.json";
  for (auto kind : kAllKinds) {
    auto m = fit(quick(kind), d.x, d.y);
    m.save(path);
    auto back = RegressorModel::load(path);
    EXPECT_EQ(back.kind(), kind);
    EXPECT_EQ(back.hyper().to_json(), m.hyper().to_json());
    EXPECT_EQ(back.predict_all(d.x), m.predict_all(d.x)) << to_string(kind);
    EXPECT_EQ(back.to_json(), m.to_json());
  }
  std::filesystem::remove(path);
}

TEST(Regressor, DeterministicFit) {
  auto d = random_linear(34, 25, 3, 0.2);
  for (auto kind : kAllKinds) {
    EXPECT_EQ(fit(quick(kind), d.x, d.y).to_json(), fit(quick(kind), d.x, d.y).to_json());
  }
}

TEST(Regressor, DegenerateHyperparametersRejected) {
  auto d = random_linear(1, 10, 2, 0.1);
  auto bad = [&](auto mutate, RegressorKind kind) {
    RegressorHyper h;
    h.kind = kind;
    mutate(h);
    EXPECT_THROW(fit(h, d.x, d.y), ConfigError);
  };
  bad([](RegressorHyper& h) { h.svr.epsilon = -0.1; }, RegressorKind::linear_svr);
  bad([](RegressorHyper& h) { h.svr.lr = 0.0; }, RegressorKind::linear_svr);
  bad([](RegressorHyper& h) { h.adaboost.rounds = 0; }, RegressorKind::adaboost_r2);
  bad([](RegressorHyper& h) { h.gbt.max_depth = 0; }, RegressorKind::gbt);
  bad([](RegressorHyper& h) { h.gbt.shrinkage = 0.0; }, RegressorKind::gbt);
  bad([](RegressorHyper& h) { h.mlp.lr = -1.0; }, RegressorKind::mlp);
  EXPECT_THROW(parse_kind("forest"), ConfigError);
  EXPECT_EQ(parse_kind("xgboost"), RegressorKind::gbt);
}

TEST(Regressor, InputValidation) {
  auto d = random_linear(2, 10, 2, 0.1);
  auto m = fit(quick(RegressorKind::gbt), d.x, d.y);
  std::vector<double> wrong(3, 0.0);
  EXPECT_THROW(m.predict(wrong), ArgumentError);
  auto nan = d.x;
  nan(0, 0) = std::nan("");
  EXPECT_THROW(fit(quick(RegressorKind::gbt), nan, d.y), ArgumentError);
  std::vector<double> short_y(d.y.begin(), d.y.begin() + 5);
  EXPECT_THROW(fit(quick(RegressorKind::gbt), d.x, short_y), ArgumentError);
}

}  // namespace
}  // namespace affect::reg
