#include <cmath>

#include "affect/common.hpp"
#include "affect/nncore/optim.hpp"
#include "affect/nncore/trainer.hpp"
#include "affect/regressors/models.hpp"

namespace affect::reg {

namespace {

struct Net {
  std::vector<nn::Linear> layers;

  explicit Net(const nn::ParameterStore& store) {
    for (const auto& spec : store.specs()) layers.emplace_back(store, spec.name);
  }

  /// acts[0] is the input; acts[i + 1] the output of layer i (after ReLU for
  /// hidden layers).
  nn::Matrix forward(const nn::ParameterStore& store, const nn::Matrix& x,
                     std::vector<nn::Matrix>* acts) const {
    nn::Matrix h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (acts) acts->push_back(h);
      h = layers[i].forward(store, h);
      if (i + 1 < layers.size()) h = h.cwiseMax(0.0);
    }
    return h;
  }

  void backward(nn::ParameterStore& store, const std::vector<nn::Matrix>& acts, nn::Matrix d) const {
    for (std::size_t i = layers.size(); i-- > 0;) {
      d = layers[i].backward(store, acts[i], d);
      if (i > 0) d = d.array() * (acts[i].array() > 0.0).cast<double>();
    }
  }
};

}  // namespace

std::vector<double> MlpModel::predict_all_outputs(std::span<const double> x) const {
  Net net(params);
  nn::Matrix in = Eigen::Map<const nn::RowVector>(x.data(), static_cast<Eigen::Index>(x.size()));
  nn::Matrix out = net.forward(params, in, nullptr);
  std::vector<double> y(static_cast<std::size_t>(outputs));
  for (int k = 0; k < outputs; ++k) {
    y[static_cast<std::size_t>(k)] = out(0, k) * target_std[static_cast<std::size_t>(k)] +
                                     target_mean[static_cast<std::size_t>(k)];
  }
  return y;
}

MlpModel fit_mlp(const FeatureMatrix& x, const nn::Matrix& y, const MlpHyper& hyper,
                 std::vector<double>* epoch_loss) {
  const auto n = x.rows();
  const auto k = y.cols();
  MlpModel m;
  m.input_dim = static_cast<int>(x.cols());
  m.outputs = static_cast<int>(k);

  nn::Matrix t = y;
  for (Eigen::Index c = 0; c < k; ++c) {
    const double mean = y.col(c).mean();
    double sd = std::sqrt((y.col(c).array() - mean).square().mean());
    if (sd == 0.0) sd = 1.0;
    m.target_mean.push_back(mean);
    m.target_std.push_back(sd);
    t.col(c) = (y.col(c).array() - mean) / sd;
  }

  std::vector<nn::LayerSpec> specs;
  int in = m.input_dim;
  for (std::size_t i = 0; i < hyper.hidden.size(); ++i) {
    specs.push_back(nn::LayerSpec::linear("mlp.hidden" + std::to_string(i), in, hyper.hidden[i]));
    in = hyper.hidden[i];
  }
  specs.push_back(nn::LayerSpec::linear("mlp.out", in, m.outputs));
  m.params = nn::init_params(specs, hyper.seed);
  const Net net(m.params);

  auto mse = [&]() {
    nn::Matrix pred = net.forward(m.params, x, nullptr);
    return (pred - t).array().square().mean();
  };

  nn::TrainHyper th;
  th.lr = hyper.lr;
  th.epochs = hyper.epochs;
  th.batch_size = hyper.batch_size;
  th.clip_norm = hyper.clip_norm;
  th.seed = hyper.seed;
  auto state = nn::AdamState::for_store(m.params, hyper.lr);
  if (epoch_loss) {
    epoch_loss->clear();
    epoch_loss->push_back(mse());
  }
  nn::train_minibatch(
      m.params, state, static_cast<std::size_t>(n), th,
      [&](std::size_t i, double scale) {
        std::vector<nn::Matrix> acts;
        nn::Matrix row = x.row(static_cast<Eigen::Index>(i));
        nn::Matrix pred = net.forward(m.params, row, &acts);
        nn::Matrix diff = pred - t.row(static_cast<Eigen::Index>(i));
        net.backward(m.params, acts, 2.0 * scale * diff);
        return diff.squaredNorm();
      },
      [&](int) {
        if (epoch_loss) epoch_loss->push_back(mse());
        return true;
      });
  return m;
}

}  // namespace affect::reg
