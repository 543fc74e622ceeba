#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "affect/nncore/params.hpp"

namespace affect::nn {

/// Activations are row-major: one row per token (or example), one column per
/// feature.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;

ConstMatrixMap matrix_of(const ParameterStore& store, std::size_t id);
MatrixMap grad_matrix_of(ParameterStore& store, std::size_t id);
Eigen::Map<const RowVector> row_of(const ParameterStore& store, std::size_t id);
Eigen::Map<RowVector> grad_row_of(ParameterStore& store, std::size_t id);

/// y = x W + b, W stored as [in, out]. The bias is optional: it is used when
/// the store has an entry "<name>.bias".
class Linear {
 public:
  static constexpr std::size_t kNoBias = static_cast<std::size_t>(-1);

  Linear() = default;
  Linear(const ParameterStore& store, const std::string& name);

  Matrix forward(const ParameterStore& store, const Matrix& x) const;
  /// Accumulates dW and db; returns dL/dx.
  Matrix backward(ParameterStore& store, const Matrix& x, const Matrix& dy) const;

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }

 private:
  std::size_t weight_ = 0;
  std::size_t bias_ = kNoBias;
  int in_ = 0;
  int out_ = 0;
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(const ParameterStore& store, const std::string& name);

  Matrix forward(const ParameterStore& store, std::span<const int> ids) const;
  void backward(ParameterStore& store, std::span<const int> ids, const Matrix& dy) const;

  int vocab_size() const { return vocab_; }
  int dim() const { return dim_; }

 private:
  std::size_t weight_ = 0;
  int vocab_ = 0;
  int dim_ = 0;
};

/// Per-row normalization with learned gain and shift (eps = 1e-5).
class LayerNorm {
 public:
  struct Cache {
    Matrix xhat;
    Eigen::VectorXd inv_std;
  };

  LayerNorm() = default;
  LayerNorm(const ParameterStore& store, const std::string& name);

  Matrix forward(const ParameterStore& store, const Matrix& x, Cache* cache) const;
  Matrix backward(ParameterStore& store, const Cache& cache, const Matrix& dy) const;

 private:
  std::size_t gain_ = 0;
  std::size_t shift_ = 0;
};

/// Linear -> GELU (erf form) -> Linear.
class FeedForward {
 public:
  struct Cache {
    Matrix x;
    Matrix pre;
    Matrix act;
  };

  FeedForward() = default;
  FeedForward(const ParameterStore& store, const std::string& name);

  Matrix forward(const ParameterStore& store, const Matrix& x, Cache* cache) const;
  Matrix backward(ParameterStore& store, const Cache& cache, const Matrix& dy) const;

 private:
  Linear in_;
  Linear out_;
};

/// Scaled dot-product attention with `heads` heads. Queries come from xq, keys
/// and values from xkv; self-attention passes the same matrix twice. With
/// causal set, query i only attends to keys j <= i.
class MultiHeadAttention {
 public:
  struct Cache {
    Matrix xq;
    Matrix xkv;
    Matrix q;
    Matrix k;
    Matrix v;
    Matrix concat;
    std::vector<Matrix> probs;
  };
  struct Grads {
    Matrix dxq;
    Matrix dxkv;
  };

  MultiHeadAttention() = default;
  MultiHeadAttention(const ParameterStore& store, const std::string& name, int heads);

  Matrix forward(const ParameterStore& store, const Matrix& xq, const Matrix& xkv, bool causal,
                 Cache* cache) const;
  Grads backward(ParameterStore& store, const Cache& cache, const Matrix& dy) const;

 private:
  Linear q_, k_, v_, o_;
  int heads_ = 1;
  int model_dim_ = 0;
};

double gelu(double x);
double gelu_grad(double x);

/// Sinusoidal position table: row p, column 2i -> sin(p / 10000^(2i/d)),
/// column 2i+1 -> cos(...).
Matrix sinusoidal_positions(int length, int dim);

}  // namespace affect::nn
