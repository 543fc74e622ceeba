#include <algorithm>
#include <numeric>

#include "affect/regressors/models.hpp"

namespace affect::reg {

namespace {

struct Builder {
  const FeatureMatrix& x;
  std::span<const double> y;
  int max_depth;
  int min_leaf;
  RegressionTree tree;

  int build(std::vector<std::size_t> rows, int depth) {
    double sum = 0.0;
    for (auto i : rows) sum += y[i];
    const double mean = sum / static_cast<double>(rows.size());
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({-1, 0.0, -1, -1, mean});
    if (depth >= max_depth || rows.size() < 2 * static_cast<std::size_t>(min_leaf)) return id;

    double sq_total = 0.0;
    for (auto i : rows) sq_total += (y[i] - mean) * (y[i] - mean);

    bool found = false;
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    const std::size_t n = rows.size();
    std::vector<std::size_t> order = rows;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x(static_cast<Eigen::Index>(a), j) < x(static_cast<Eigen::Index>(b), j);
      });
      double sl = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        sl += y[order[k]];
        const double v = x(static_cast<Eigen::Index>(order[k]), j);
        const double next = x(static_cast<Eigen::Index>(order[k + 1]), j);
        const std::size_t nl = k + 1;
        const std::size_t nr = n - nl;
        if (next == v || nl < static_cast<std::size_t>(min_leaf) ||
            nr < static_cast<std::size_t>(min_leaf)) {
          continue;
        }
        const double sr = sum - sl;
        // SSE reduction = nl*ml^2 + nr*mr^2 - n*m^2.
        const double gain = sl * sl / static_cast<double>(nl) + sr * sr / static_cast<double>(nr) -
                            sum * sum / static_cast<double>(n);
        if (!found || gain > best_gain + 1e-12 * (1.0 + sq_total)) {
          found = true;
          best_gain = gain;
          best_feature = static_cast<int>(j);
          best_threshold = 0.5 * (v + next);
        }
      }
    }
    if (!found || sq_total == 0.0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto i : rows) {
      (x(static_cast<Eigen::Index>(i), best_feature) <= best_threshold ? left : right).push_back(i);
    }
    const int l = build(std::move(left), depth + 1);
    const int r = build(std::move(right), depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

}  // namespace

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& nd = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
  }
  return nodes[i].value;
}

RegressionTree fit_tree(const FeatureMatrix& x, std::span<const double> y, int max_depth,
                        int min_samples_leaf) {
  Builder b{x, y, max_depth, min_samples_leaf, {}};
  std::vector<std::size_t> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  b.build(std::move(rows), 0);
  return std::move(b.tree);
}

double GbtModel::predict(std::span<const double> x) const {
  double f = initial;
  for (const auto& t : trees) f += shrinkage * t.predict(x);
  return f;
}

GbtModel fit_gbt(const FeatureMatrix& x, std::span<const double> y, const GbtHyper& hyper,
                 std::vector<double>* sse_trace) {
  const auto n = static_cast<std::size_t>(x.rows());
  GbtModel m;
  m.shrinkage = hyper.shrinkage;
  m.initial = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> f(n, m.initial);
  std::vector<double> resid(n);
  auto sse = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (y[i] - f[i]) * (y[i] - f[i]);
    return s;
  };
  if (sse_trace) {
    sse_trace->clear();
    sse_trace->push_back(sse());
  }
  for (int t = 0; t < hyper.trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - f[i];
    m.trees.push_back(fit_tree(x, resid, hyper.max_depth, hyper.min_samples_leaf));
    for (std::size_t i = 0; i < n; ++i) {
      f[i] += hyper.shrinkage * m.trees.back().predict(row_span(x, static_cast<Eigen::Index>(i)));
    }
    if (sse_trace) sse_trace->push_back(sse());
  }
  return m;
}

}  // namespace affect::reg
