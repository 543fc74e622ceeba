#include <cmath>

#include "affect/regressors/models.hpp"

namespace affect::reg {

namespace {

double dot(const FeatureMatrix& x, Eigen::Index i, const std::vector<double>& w) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) s += x(i, j) * w[static_cast<std::size_t>(j)];
  return s;
}

constexpr int kMaxHalvings = 40;

}  // namespace

double LinearSvrModel::predict(std::span<const double> x) const {
  double s = b;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
  return s;
}

double svr_objective(const LinearSvrModel& m, const FeatureMatrix& x, std::span<const double> y,
                     const SvrHyper& hyper) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double r = dot(x, i, m.w) + m.b - y[static_cast<std::size_t>(i)];
    loss += std::max(0.0, std::abs(r) - hyper.epsilon);
  }
  double reg = 0.0;
  for (double v : m.w) reg += v * v;
  return hyper.c * loss + 0.5 * reg;
}

LinearSvrModel fit_linear_svr(const FeatureMatrix& x, std::span<const double> y, const SvrHyper& hyper,
                              std::vector<double>* objective_trace) {
  const auto d = static_cast<std::size_t>(x.cols());
  LinearSvrModel m;
  m.w.assign(d, 0.0);

  double obj = svr_objective(m, x, y, hyper);
  if (objective_trace) {
    objective_trace->clear();
    objective_trace->push_back(obj);
  }
  std::vector<double> gw(d);
  for (int t = 0; t < hyper.steps; ++t) {
    gw = m.w;
    double gb = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double r = dot(x, i, m.w) + m.b - y[static_cast<std::size_t>(i)];
      if (std::abs(r) <= hyper.epsilon) continue;
      const double s = r > 0.0 ? hyper.c : -hyper.c;
      for (std::size_t j = 0; j < d; ++j) gw[j] += s * x(i, static_cast<Eigen::Index>(j));
      gb += s;
    }
    double eta = hyper.lr / std::sqrt(1.0 + t);
    LinearSvrModel cand = m;
    for (int h = 0; h < kMaxHalvings; ++h, eta *= 0.5) {
      for (std::size_t j = 0; j < d; ++j) cand.w[j] = m.w[j] - eta * gw[j];
      cand.b = m.b - eta * gb;
      const double c_obj = svr_objective(cand, x, y, hyper);
      if (c_obj <= obj) {
        m = cand;
        obj = c_obj;
        break;
      }
    }
    if (objective_trace) objective_trace->push_back(obj);
  }
  return m;
}

}  // namespace affect::reg
