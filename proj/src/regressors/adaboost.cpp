#include <algorithm>
#include <cmath>
#include <numeric>

#include "affect/common.hpp"
#include "affect/regressors/models.hpp"

namespace affect::reg {

Stump fit_stump(const FeatureMatrix& x, std::span<const double> y, std::span<const double> weights) {
  const auto n = static_cast<std::size_t>(x.rows());
  double w_total = 0.0;
  double wy_total = 0.0;
  double wyy_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w_total += weights[i];
    wy_total += weights[i] * y[i];
    wyy_total += weights[i] * y[i] * y[i];
  }
  Stump best;
  best.left = best.right = w_total > 0.0 ? wy_total / w_total : 0.0;
  double best_sse = std::numeric_limits<double>::infinity();
  bool found = false;

  std::vector<std::size_t> present;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] > 0.0) present.push_back(i);
  }
  const std::size_t m = present.size();
  std::vector<std::size_t> order;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    order = present;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x(static_cast<Eigen::Index>(a), j) < x(static_cast<Eigen::Index>(b), j); });
    double wl = 0.0;
    double wyl = 0.0;
    double wyyl = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const std::size_t i = order[k];
      wl += weights[i];
      wyl += weights[i] * y[i];
      wyyl += weights[i] * y[i] * y[i];
      const double v = x(static_cast<Eigen::Index>(i), j);
      const double next = x(static_cast<Eigen::Index>(order[k + 1]), j);
      if (next == v) continue;
      const double wr = w_total - wl;
      const double wyr = wy_total - wyl;
      const double left = wl > 0.0 ? wyl / wl : 0.0;
      const double right = wr > 0.0 ? wyr / wr : 0.0;
      // Weighted SSE = sum w y^2 - (sum w y)^2 / sum w on each side.
      const double sse = (wyyl - (wl > 0.0 ? wyl * wyl / wl : 0.0)) +
                         ((wyy_total - wyyl) - (wr > 0.0 ? wyr * wyr / wr : 0.0));
      // Equal partitions reached through different features can differ by
      // round-off; the tolerance keeps the lowest-feature tie rule.
      if (!found || sse < best_sse - 1e-12 * (1.0 + wyy_total)) {
        found = true;
        best_sse = sse;
        best = {static_cast<int>(j), 0.5 * (v + next), left, right};
      }
    }
  }
  return best;
}

double AdaBoostR2Model::predict(std::span<const double> x) const {
  std::vector<std::pair<double, double>> preds;
  preds.reserve(learners.size());
  double total = 0.0;
  for (std::size_t t = 0; t < learners.size(); ++t) {
    preds.emplace_back(learners[t].predict(x), learner_weights[t]);
    total += learner_weights[t];
  }
  std::stable_sort(preds.begin(), preds.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  double cum = 0.0;
  for (const auto& [p, w] : preds) {
    cum += w;
    if (cum >= 0.5 * total) return p;
  }
  return preds.back().first;
}

AdaBoostR2Model fit_adaboost_r2(const FeatureMatrix& x, std::span<const double> y,
                                const AdaBoostHyper& hyper, std::vector<AdaBoostRound>* trace) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  AdaBoostR2Model m;
  if (trace) trace->clear();
  std::vector<double> loss(n);

  Rng rng(hyper.seed);
  std::vector<double> counts(n);
  std::vector<double> cdf(n);
  for (int round = 0; round < hyper.rounds; ++round) {
    Stump s;
    if (hyper.resample) {
      std::partial_sum(w.begin(), w.end(), cdf.begin());
      std::fill(counts.begin(), counts.end(), 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        const double u = rng.uniform() * cdf.back();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        counts[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1)] += 1.0;
      }
      s = fit_stump(x, y, counts);
    } else {
      s = fit_stump(x, y, w);
    }
    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      loss[i] = std::abs(s.predict(row_span(x, static_cast<Eigen::Index>(i))) - y[i]);
      max_err = std::max(max_err, loss[i]);
    }
    double avg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      loss[i] = max_err > 0.0 ? loss[i] / max_err : 0.0;
      avg += w[i] * loss[i];
    }
    AdaBoostRound rec;
    rec.average_loss = avg;
    if (avg >= 0.5) {
      rec.weights = w;
      if (trace) trace->push_back(std::move(rec));
      break;
    }
    rec.accepted = true;
    m.learners.push_back(s);
    if (avg <= 0.0) {
      m.learner_weights.push_back(1.0);
      rec.weights = w;
      if (trace) trace->push_back(std::move(rec));
      break;
    }
    const double beta = avg / (1.0 - avg);
    m.learner_weights.push_back(std::log(1.0 / beta));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::pow(beta, 1.0 - loss[i]);
      sum += w[i];
    }
    for (double& v : w) v /= sum;
    rec.weights = w;
    if (trace) trace->push_back(std::move(rec));
  }

  if (m.learners.empty()) {
    // Every candidate was rejected: fall back to the uniform-weight constant.
    std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
    Stump c;
    c.left = c.right = fit_stump(FeatureMatrix(static_cast<Eigen::Index>(n), 0), y, uniform).left;
    m.learners.push_back(c);
    m.learner_weights.push_back(1.0);
  }
  return m;
}

}  // namespace affect::reg
