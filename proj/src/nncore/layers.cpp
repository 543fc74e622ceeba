#include "affect/nncore/layers.hpp"

#include <cmath>
#include <limits>

#include "affect/common.hpp"

namespace affect::nn {

namespace {
constexpr double kLayerNormEps = 1e-5;
}

ConstMatrixMap matrix_of(const ParameterStore& store, std::size_t id) {
  const auto& e = store.entry(id);
  return {e.values.data(), e.shape[0], e.shape[1]};
}

MatrixMap grad_matrix_of(ParameterStore& store, std::size_t id) {
  auto& e = store.entry(id);
  return {e.grads.data(), e.shape[0], e.shape[1]};
}

Eigen::Map<const RowVector> row_of(const ParameterStore& store, std::size_t id) {
  const auto& e = store.entry(id);
  return {e.values.data(), static_cast<Eigen::Index>(e.values.size())};
}

Eigen::Map<RowVector> grad_row_of(ParameterStore& store, std::size_t id) {
  auto& e = store.entry(id);
  return {e.grads.data(), static_cast<Eigen::Index>(e.grads.size())};
}

Linear::Linear(const ParameterStore& store, const std::string& name)
    : weight_(store.index(name + ".weight")),
      bias_(store.contains(name + ".bias") ? store.index(name + ".bias") : kNoBias) {
  const auto& shape = store.entry(weight_).shape;
  in_ = shape[0];
  out_ = shape[1];
}

Matrix Linear::forward(const ParameterStore& store, const Matrix& x) const {
  if (x.cols() != in_) {
    throw ArgumentError("Linear: input has " + std::to_string(x.cols()) + " columns, expected " +
                        std::to_string(in_));
  }
  Matrix y = x * matrix_of(store, weight_);
  if (bias_ != kNoBias) {
    y.rowwise() += row_of(store, bias_);
  }
  return y;
}

Matrix Linear::backward(ParameterStore& store, const Matrix& x, const Matrix& dy) const {
  grad_matrix_of(store, weight_).noalias() += x.transpose() * dy;
  if (bias_ != kNoBias) {
    grad_row_of(store, bias_) += dy.colwise().sum();
  }
  return dy * matrix_of(store, weight_).transpose();
}

Embedding::Embedding(const ParameterStore& store, const std::string& name)
    : weight_(store.index(name + ".weight")) {
  const auto& shape = store.entry(weight_).shape;
  vocab_ = shape[0];
  dim_ = shape[1];
}

Matrix Embedding::forward(const ParameterStore& store, std::span<const int> ids) const {
  auto table = matrix_of(store, weight_);
  Matrix out(static_cast<Eigen::Index>(ids.size()), dim_);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= vocab_) {
      throw ArgumentError("Embedding: token id " + std::to_string(ids[i]) + " out of range");
    }
    out.row(static_cast<Eigen::Index>(i)) = table.row(ids[i]);
  }
  return out;
}

void Embedding::backward(ParameterStore& store, std::span<const int> ids, const Matrix& dy) const {
  auto g = grad_matrix_of(store, weight_);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    g.row(ids[i]) += dy.row(static_cast<Eigen::Index>(i));
  }
}

LayerNorm::LayerNorm(const ParameterStore& store, const std::string& name)
    : gain_(store.index(name + ".gain")), shift_(store.index(name + ".shift")) {}

Matrix LayerNorm::forward(const ParameterStore& store, const Matrix& x, Cache* cache) const {
  const auto n = x.cols();
  Eigen::VectorXd mean = x.rowwise().mean();
  Matrix centered = x.colwise() - mean;
  Eigen::VectorXd var = centered.array().square().rowwise().sum() / static_cast<double>(n);
  Eigen::VectorXd inv_std = (var.array() + kLayerNormEps).rsqrt();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix y = xhat.array().rowwise() * row_of(store, gain_).array();
  y.rowwise() += row_of(store, shift_);
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix LayerNorm::backward(ParameterStore& store, const Cache& cache, const Matrix& dy) const {
  const double n = static_cast<double>(dy.cols());
  grad_row_of(store, gain_) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  grad_row_of(store, shift_) += dy.colwise().sum();
  Matrix dxhat = dy.array().rowwise() * row_of(store, gain_).array();
  Eigen::VectorXd sum_d = dxhat.rowwise().sum();
  Eigen::VectorXd sum_dx = (dxhat.array() * cache.xhat.array()).rowwise().sum();
  Matrix dx = (n * dxhat.array() - cache.xhat.array().colwise() * sum_dx.array()).colwise() -
              sum_d.array();
  dx.array().colwise() *= cache.inv_std.array() / n;
  return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * M_SQRT1_2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return cdf + x * pdf;
}

FeedForward::FeedForward(const ParameterStore& store, const std::string& name)
    : in_(store, name + ".in"), out_(store, name + ".out") {}

Matrix FeedForward::forward(const ParameterStore& store, const Matrix& x, Cache* cache) const {
  Matrix pre = in_.forward(store, x);
  Matrix act = pre.unaryExpr([](double v) { return gelu(v); });
  Matrix y = out_.forward(store, act);
  if (cache != nullptr) {
    cache->x = x;
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return y;
}

Matrix FeedForward::backward(ParameterStore& store, const Cache& cache, const Matrix& dy) const {
  Matrix dact = out_.backward(store, cache.act, dy);
  Matrix dpre = dact.array() * cache.pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
  return in_.backward(store, cache.x, dpre);
}

MultiHeadAttention::MultiHeadAttention(const ParameterStore& store, const std::string& name,
                                       int heads)
    : q_(store, name + ".q"),
      k_(store, name + ".k"),
      v_(store, name + ".v"),
      o_(store, name + ".o"),
      heads_(heads),
      model_dim_(q_.in_dim()) {
  if (heads <= 0 || model_dim_ % heads != 0) {
    throw ConfigError("attention '" + name + "': model_dim not divisible by heads");
  }
}

Matrix MultiHeadAttention::forward(const ParameterStore& store, const Matrix& xq, const Matrix& xkv,
                                   bool causal, Cache* cache) const {
  const int dh = model_dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix q = q_.forward(store, xq);
  Matrix k = k_.forward(store, xkv);
  Matrix v = v_.forward(store, xkv);
  const auto lq = q.rows();
  const auto lk = k.rows();
  Matrix concat(lq, model_dim_);
  std::vector<Matrix> probs;
  if (cache != nullptr) {
    probs.reserve(static_cast<std::size_t>(heads_));
  }
  for (int h = 0; h < heads_; ++h) {
    const auto c0 = static_cast<Eigen::Index>(h) * dh;
    Matrix scores = (q.middleCols(c0, dh) * k.middleCols(c0, dh).transpose()) * scale;
    for (Eigen::Index i = 0; i < lq; ++i) {
      Eigen::Index valid = causal ? std::min<Eigen::Index>(i + 1, lk) : lk;
      double mx = scores.row(i).head(valid).maxCoeff();
      double sum = 0.0;
      for (Eigen::Index j = 0; j < lk; ++j) {
        double e = j < valid ? std::exp(scores(i, j) - mx) : 0.0;
        scores(i, j) = e;
        sum += e;
      }
      scores.row(i) /= sum;
    }
    concat.middleCols(c0, dh).noalias() = scores * v.middleCols(c0, dh);
    if (cache != nullptr) {
      probs.push_back(std::move(scores));
    }
  }
  Matrix y = o_.forward(store, concat);
  if (cache != nullptr) {
    cache->xq = xq;
    cache->xkv = xkv;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->concat = std::move(concat);
    cache->probs = std::move(probs);
  }
  return y;
}

MultiHeadAttention::Grads MultiHeadAttention::backward(ParameterStore& store, const Cache& cache,
                                                       const Matrix& dy) const {
  const int dh = model_dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix dconcat = o_.backward(store, cache.concat, dy);
  Matrix dq = Matrix::Zero(cache.q.rows(), model_dim_);
  Matrix dk = Matrix::Zero(cache.k.rows(), model_dim_);
  Matrix dv = Matrix::Zero(cache.v.rows(), model_dim_);
  for (int h = 0; h < heads_; ++h) {
    const auto c0 = static_cast<Eigen::Index>(h) * dh;
    const Matrix& p = cache.probs[static_cast<std::size_t>(h)];
    auto dout = dconcat.middleCols(c0, dh);
    Matrix dp = dout * cache.v.middleCols(c0, dh).transpose();
    dv.middleCols(c0, dh).noalias() += p.transpose() * dout;
    Eigen::VectorXd rowdot = (dp.array() * p.array()).rowwise().sum();
    Matrix ds = p.array() * (dp.array().colwise() - rowdot.array());
    ds *= scale;
    dq.middleCols(c0, dh).noalias() += ds * cache.k.middleCols(c0, dh);
    dk.middleCols(c0, dh).noalias() += ds.transpose() * cache.q.middleCols(c0, dh);
  }
  Grads g;
  g.dxq = q_.backward(store, cache.xq, dq);
  g.dxkv = k_.backward(store, cache.xkv, dk);
  g.dxkv += v_.backward(store, cache.xkv, dv);
  return g;
}

Matrix sinusoidal_positions(int length, int dim) {
  Matrix pe(length, dim);
  for (int p = 0; p < length; ++p) {
    for (int i = 0; i < dim; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / dim);
      pe(p, i) = std::sin(p * freq);
      if (i + 1 < dim) {
        pe(p, i + 1) = std::cos(p * freq);
      }
    }
  }
  return pe;
}

}  // namespace affect::nn
