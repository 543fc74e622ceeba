#include "affect/regressors/regressor.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "affect/common.hpp"

namespace affect::reg {

namespace {

constexpr const char* kFormat = "affect-regressor";
constexpr int kVersion = 1;

using nlohmann::json;

json store_to_json(const nn::ParameterStore& store) {
  json specs = json::array();
  for (const auto& s : store.specs()) {
    specs.push_back({{"kind", std::string(nn::to_string(s.kind))}, {"name", s.name}, {"dims", s.dims}});
  }
  json values = json::object();
  for (const auto& e : store.entries()) values[e.name] = e.values;
  return {{"seed", store.seed()}, {"step_count", store.step_count()}, {"specs", specs}, {"values", values}};
}

nn::ParameterStore store_from_json(const json& j) {
  std::vector<nn::LayerSpec> specs;
  for (const auto& s : j.at("specs")) {
    const auto dims = s.at("dims").get<std::vector<int>>();
    if (s.at("kind").get<std::string>() != "linear" || dims.size() != 2) {
      throw DataError("MLP layers must be linear with two dims");
    }
    specs.push_back(nn::LayerSpec::linear(s.at("name").get<std::string>(), dims[0], dims[1]));
  }
  auto store = nn::init_params(specs, j.at("seed").get<std::uint64_t>());
  for (auto& e : store.entries()) {
    auto v = j.at("values").at(e.name).get<std::vector<double>>();
    if (v.size() != e.values.size()) throw DataError("MLP entry '" + e.name + "' has wrong size");
    e.values = std::move(v);
  }
  store.set_step_count(j.at("step_count").get<std::uint64_t>());
  return store;
}

json content_to_json(const RegressorModel::Content& c) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MlpModel>) {
          return {{"outputs", m.outputs},
                  {"target_mean", m.target_mean},
                  {"target_std", m.target_std},
                  {"params", store_to_json(m.params)}};
        } else if constexpr (std::is_same_v<T, LinearSvrModel>) {
          return {{"w", m.w}, {"b", m.b}};
        } else if constexpr (std::is_same_v<T, AdaBoostR2Model>) {
          json learners = json::array();
          for (std::size_t t = 0; t < m.learners.size(); ++t) {
            const auto& s = m.learners[t];
            learners.push_back({{"feature", s.feature},
                                {"threshold", std::isinf(s.threshold) ? json(nullptr) : json(s.threshold)},
                                {"left", s.left},
                                {"right", s.right},
                                {"weight", m.learner_weights[t]}});
          }
          return {{"learners", learners}};
        } else {
          json trees = json::array();
          for (const auto& t : m.trees) {
            json nodes = json::array();
            for (const auto& nd : t.nodes) {
              nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.value});
            }
            trees.push_back(nodes);
          }
          return {{"initial", m.initial}, {"shrinkage", m.shrinkage}, {"trees", trees}};
        }
      },
      c);
}

RegressorModel::Content content_from_json(RegressorKind kind, const json& j, int input_dim) {
  switch (kind) {
    case RegressorKind::mlp: {
      MlpModel m;
      m.input_dim = input_dim;
      m.outputs = j.at("outputs").get<int>();
      m.target_mean = j.at("target_mean").get<std::vector<double>>();
      m.target_std = j.at("target_std").get<std::vector<double>>();
      m.params = store_from_json(j.at("params"));
      return m;
    }
    case RegressorKind::linear_svr: {
      LinearSvrModel m;
      m.w = j.at("w").get<std::vector<double>>();
      m.b = j.at("b").get<double>();
      return m;
    }
    case RegressorKind::adaboost_r2: {
      AdaBoostR2Model m;
      for (const auto& l : j.at("learners")) {
        Stump s;
        s.feature = l.at("feature").get<int>();
        s.threshold = l.at("threshold").is_null() ? std::numeric_limits<double>::infinity()
                                                  : l.at("threshold").get<double>();
        s.left = l.at("left").get<double>();
        s.right = l.at("right").get<double>();
        m.learners.push_back(s);
        m.learner_weights.push_back(l.at("weight").get<double>());
      }
      return m;
    }
    case RegressorKind::gbt: {
      GbtModel m;
      m.initial = j.at("initial").get<double>();
      m.shrinkage = j.at("shrinkage").get<double>();
      for (const auto& t : j.at("trees")) {
        RegressionTree tree;
        for (const auto& nd : t) {
          tree.nodes.push_back({nd.at(0).get<int>(), nd.at(1).get<double>(), nd.at(2).get<int>(),
                                nd.at(3).get<int>(), nd.at(4).get<double>()});
        }
        m.trees.push_back(std::move(tree));
      }
      return m;
    }
  }
  throw DataError("unknown regressor kind");
}

}  // namespace

std::string_view to_string(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::mlp: return "mlp";
    case RegressorKind::linear_svr: return "linear_svr";
    case RegressorKind::adaboost_r2: return "adaboost_r2";
    case RegressorKind::gbt: return "gbt";
  }
  return "unknown";
}

RegressorKind parse_kind(std::string_view s) {
  if (s == "mlp") return RegressorKind::mlp;
  if (s == "svr" || s == "linear_svr") return RegressorKind::linear_svr;
  if (s == "adaboost" || s == "adaboost_r2") return RegressorKind::adaboost_r2;
  if (s == "gbt" || s == "xgboost") return RegressorKind::gbt;
  throw ConfigError("unknown regressor kind '" + std::string(s) +
                    "' (expected mlp, svr, adaboost or gbt)");
}

void RegressorHyper::validate() const {
  switch (kind) {
    case RegressorKind::mlp:
      if (mlp.hidden.empty()) throw ConfigError("mlp: at least one hidden layer required");
      for (int h : mlp.hidden) {
        if (h <= 0) throw ConfigError("mlp: hidden sizes must be positive");
      }
      if (!(mlp.lr > 0.0)) throw ConfigError("mlp: lr must be > 0");
      if (mlp.epochs <= 0 || mlp.batch_size <= 0) throw ConfigError("mlp: epochs and batch_size must be > 0");
      if (mlp.clip_norm < 0.0) throw ConfigError("mlp: clip_norm must be >= 0");
      break;
    case RegressorKind::linear_svr:
      if (!(svr.epsilon >= 0.0)) throw ConfigError("svr: epsilon must be >= 0");
      if (!(svr.c > 0.0)) throw ConfigError("svr: c must be > 0");
      if (!(svr.lr > 0.0)) throw ConfigError("svr: lr must be > 0");
      if (svr.steps <= 0) throw ConfigError("svr: steps must be > 0");
      break;
    case RegressorKind::adaboost_r2:
      if (adaboost.rounds <= 0) throw ConfigError("adaboost: rounds must be > 0");
      break;
    case RegressorKind::gbt:
      if (gbt.trees < 0) throw ConfigError("gbt: trees must be >= 0");
      if (gbt.max_depth <= 0) throw ConfigError("gbt: max_depth must be > 0");
      if (!(gbt.shrinkage > 0.0 && gbt.shrinkage <= 1.0)) throw ConfigError("gbt: shrinkage must be in (0, 1]");
      if (gbt.min_samples_leaf <= 0) throw ConfigError("gbt: min_samples_leaf must be > 0");
      break;
  }
}

nlohmann::json RegressorHyper::to_json() const {
  switch (kind) {
    case RegressorKind::mlp:
      return {{"hidden", mlp.hidden},         {"lr", mlp.lr},
              {"epochs", mlp.epochs},         {"batch_size", mlp.batch_size},
              {"clip_norm", mlp.clip_norm},   {"seed", mlp.seed}};
    case RegressorKind::linear_svr:
      return {{"epsilon", svr.epsilon}, {"c", svr.c}, {"lr", svr.lr}, {"steps", svr.steps}};
    case RegressorKind::adaboost_r2:
      return {{"rounds", adaboost.rounds}, {"resample", adaboost.resample}, {"seed", adaboost.seed}};
    case RegressorKind::gbt:
      return {{"trees", gbt.trees},
              {"max_depth", gbt.max_depth},
              {"shrinkage", gbt.shrinkage},
              {"min_samples_leaf", gbt.min_samples_leaf}};
  }
  return {};
}

RegressorHyper RegressorHyper::from_json(RegressorKind kind, const nlohmann::json& j) {
  RegressorHyper h;
  h.kind = kind;
  switch (kind) {
    case RegressorKind::mlp:
      h.mlp.hidden = j.at("hidden").get<std::vector<int>>();
      h.mlp.lr = j.at("lr").get<double>();
      h.mlp.epochs = j.at("epochs").get<int>();
      h.mlp.batch_size = j.at("batch_size").get<int>();
      h.mlp.clip_norm = j.at("clip_norm").get<double>();
      h.mlp.seed = j.at("seed").get<std::uint64_t>();
      break;
    case RegressorKind::linear_svr:
      h.svr.epsilon = j.at("epsilon").get<double>();
      h.svr.c = j.at("c").get<double>();
      h.svr.lr = j.at("lr").get<double>();
      h.svr.steps = j.at("steps").get<int>();
      break;
    case RegressorKind::adaboost_r2:
      h.adaboost.rounds = j.at("rounds").get<int>();
      h.adaboost.resample = j.at("resample").get<bool>();
      h.adaboost.seed = j.at("seed").get<std::uint64_t>();
      break;
    case RegressorKind::gbt:
      h.gbt.trees = j.at("trees").get<int>();
      h.gbt.max_depth = j.at("max_depth").get<int>();
      h.gbt.shrinkage = j.at("shrinkage").get<double>();
      h.gbt.min_samples_leaf = j.at("min_samples_leaf").get<int>();
      break;
  }
  h.validate();
  return h;
}

RegressorModel::RegressorModel(RegressorHyper hyper, int input_dim, Content content)
    : hyper_(std::move(hyper)), input_dim_(input_dim), content_(std::move(content)) {}

double RegressorModel::predict(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(input_dim_)) {
    throw ArgumentError("regressor expects " + std::to_string(input_dim_) + " features, got " +
                        std::to_string(x.size()));
  }
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MlpModel>) {
          return m.predict_all_outputs(x)[0];
        } else {
          return m.predict(x);
        }
      },
      content_);
}

std::vector<double> RegressorModel::predict_outputs(std::span<const double> x) const {
  if (const auto* m = std::get_if<MlpModel>(&content_)) {
    if (x.size() != static_cast<std::size_t>(input_dim_)) predict(x);
    return m->predict_all_outputs(x);
  }
  return {predict(x)};
}

int RegressorModel::outputs() const {
  const auto* m = std::get_if<MlpModel>(&content_);
  return m ? m->outputs : 1;
}

std::vector<double> RegressorModel::predict_all(const FeatureMatrix& x) const {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = predict(row_span(x, i));
  return out;
}

nlohmann::json RegressorModel::to_json() const {
  return {{"format", kFormat},
          {"version", kVersion},
          {"kind", std::string(to_string(hyper_.kind))},
          {"hyper", hyper_.to_json()},
          {"input_dim", input_dim_},
          {"model", content_to_json(content_)}};
}

RegressorModel RegressorModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw DataError("not a regressor file");
    if (j.at("version").get<int>() != kVersion) {
      throw DataError("unsupported regressor file version " + j.at("version").dump());
    }
    const auto kind = parse_kind(j.at("kind").get<std::string>());
    const int input_dim = j.at("input_dim").get<int>();
    return RegressorModel(RegressorHyper::from_json(kind, j.at("hyper")), input_dim,
                          content_from_json(kind, j.at("model"), input_dim));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed regressor file: ") + e.what());
  }
}

void RegressorModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump(1) << '\n';
}

RegressorModel RegressorModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

void check_training_data(const FeatureMatrix& x, std::size_t n_targets) {
  if (static_cast<std::size_t>(x.rows()) != n_targets) {
    throw ArgumentError("fit: " + std::to_string(x.rows()) + " feature rows vs " +
                        std::to_string(n_targets) + " targets");
  }
  if (x.rows() < 2) throw ArgumentError("fit: need at least 2 examples");
  if (!x.allFinite()) throw ArgumentError("fit: features contain NaN or infinite values");
}

RegressorModel fit(const RegressorHyper& hyper, const FeatureMatrix& x, std::span<const double> y) {
  hyper.validate();
  check_training_data(x, y.size());
  for (double v : y) {
    if (!std::isfinite(v)) throw ArgumentError("fit: non-finite target");
  }
  const int d = static_cast<int>(x.cols());
  switch (hyper.kind) {
    case RegressorKind::mlp: {
      nn::Matrix ym = Eigen::Map<const nn::Matrix>(y.data(), static_cast<Eigen::Index>(y.size()), 1);
      return {hyper, d, fit_mlp(x, ym, hyper.mlp)};
    }
    case RegressorKind::linear_svr:
      return {hyper, d, fit_linear_svr(x, y, hyper.svr)};
    case RegressorKind::adaboost_r2:
      return {hyper, d, fit_adaboost_r2(x, y, hyper.adaboost)};
    case RegressorKind::gbt:
      return {hyper, d, fit_gbt(x, y, hyper.gbt)};
  }
  throw ConfigError("unknown regressor kind");
}

RegressorModel fit_multi_output_mlp(const RegressorHyper& hyper, const FeatureMatrix& x,
                                    const nn::Matrix& y) {
  if (hyper.kind != RegressorKind::mlp) throw ConfigError("multi-output fitting requires kind mlp");
  hyper.validate();
  check_training_data(x, static_cast<std::size_t>(y.rows()));
  if (y.cols() < 1 || !y.allFinite()) throw ArgumentError("fit: bad target matrix");
  return {hyper, static_cast<int>(x.cols()), fit_mlp(x, y, hyper.mlp)};
}

}  // namespace affect::reg
