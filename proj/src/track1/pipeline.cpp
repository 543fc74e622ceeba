#include "affect/track1/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "affect/common.hpp"

namespace affect::track1 {

using nlohmann::json;

namespace {

constexpr const char* kBundleFormat = "affect-track1";
constexpr int kBundleVersion = 1;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(1) << '\n';
  if (!out) throw DataError("cannot write " + path.string());
}

FeatureLayout layout_of(const EncoderPair& enc, const corpus::FeatureScaler& scaler, FeatureMode mode) {
  FeatureLayout l;
  l.d_emp = enc.empathy.encoder().dims().model_dim;
  l.d_dis = mode == FeatureMode::both ? enc.distress.encoder().dims().model_dim : 0;
  l.n_feat = static_cast<int>(scaler.output_dim());
  return l;
}

std::vector<double> feature_values(const EncoderPair& enc, const corpus::FeatureScaler& scaler, FeatureMode mode,
                                   const corpus::EssayRecord& rec) {
  auto tail = scaler.transform(rec);
  auto out = enc.empathy.pooled(rec.essay);
  if (mode == FeatureMode::both) {
    auto dis = enc.distress.pooled(rec.essay);
    out.insert(out.end(), dis.begin(), dis.end());
  }
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

reg::FeatureMatrix features_of(const EncoderPair& enc, const corpus::FeatureScaler& scaler, FeatureMode mode,
                               const corpus::Dataset& d, int workers) {
  reg::FeatureMatrix x(static_cast<Eigen::Index>(d.size()), layout_of(enc, scaler, mode).total());
  parallel_for(d.size(), workers, [&](std::size_t i) {
    auto f = feature_values(enc, scaler, mode, d.records[i]);
    for (std::size_t k = 0; k < f.size(); ++k) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = f[k];
  });
  return x;
}

}  // namespace

std::string_view to_string(FeatureMode m) { return m == FeatureMode::both ? "both" : "empathy_only"; }

FeatureMode parse_feature_mode(std::string_view s) {
  if (s == "both") return FeatureMode::both;
  if (s == "empathy_only") return FeatureMode::empathy_only;
  throw ConfigError("unknown feature mode '" + std::string(s) + "' (expected both or empathy_only)");
}

void Track1Hyper::validate() const {
  encoder.validate();
  regressor.validate();
  if (joint_mlp && regressor.kind != reg::RegressorKind::mlp) {
    throw ConfigError("joint_mlp requires regressor kind mlp");
  }
  if (!(range.lo < range.hi)) throw ConfigError("score range must have lo < hi");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

Track1Pipeline::Track1Pipeline(EncoderPair encoders, corpus::FeatureScaler scaler, FeatureMode mode,
                               std::vector<reg::RegressorModel> regressors, corpus::ScoreRange range)
    : encoders_(std::move(encoders)),
      scaler_(std::move(scaler)),
      mode_(mode),
      regressors_(std::move(regressors)),
      range_(range) {
  if (encoders_.empathy.target() != corpus::Target::empathy ||
      encoders_.distress.target() != corpus::Target::distress) {
    throw ConfigError("encoder pair must hold an empathy and a distress encoder");
  }
  const bool joint = regressors_.size() == 1 && regressors_[0].outputs() == 2;
  if (!joint && regressors_.size() != 2) throw ConfigError("pipeline needs two regressors or one joint MLP");
  for (const auto& r : regressors_) {
    if (r.input_dim() != layout().total()) throw ConfigError("regressor input size does not match feature layout");
  }
}

FeatureLayout Track1Pipeline::layout() const { return layout_of(encoders_, scaler_, mode_); }

SharedFeatureVector Track1Pipeline::features(const corpus::EssayRecord& rec) const {
  return {feature_values(encoders_, scaler_, mode_, rec), layout()};
}

reg::FeatureMatrix Track1Pipeline::feature_matrix(const corpus::Dataset& d, int workers) const {
  return features_of(encoders_, scaler_, mode_, d, workers);
}

std::pair<double, double> Track1Pipeline::predict_from(std::span<const double> x) const {
  double e = 0.0;
  double s = 0.0;
  if (regressors_.size() == 1) {
    auto both = regressors_[0].predict_outputs(x);
    e = both[0];
    s = both[1];
  } else {
    e = regressors_[0].predict(x);
    s = regressors_[1].predict(x);
  }
  if (!std::isfinite(e) || !std::isfinite(s)) throw StateError("regressor produced a non-finite prediction");
  return {range_.clamp(e), range_.clamp(s)};
}

std::pair<double, double> Track1Pipeline::predict(const corpus::EssayRecord& rec) const {
  return predict_from(features(rec).values);
}

std::vector<std::pair<double, double>> Track1Pipeline::predict_all(const corpus::Dataset& d, int workers) const {
  auto x = feature_matrix(d, workers);
  std::vector<std::pair<double, double>> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = predict_from(reg::row_span(x, static_cast<Eigen::Index>(i)));
  return out;
}

void Track1Pipeline::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  encoders_.empathy.save(dir / "encoder_empathy");
  encoders_.distress.save(dir / "encoder_distress");
  write_json(dir / "scaler.json", scaler_.to_json());
  json files = json::array();
  const std::vector<std::string> names =
      regressors_.size() == 1 ? std::vector<std::string>{"regressor_joint.json"}
                              : std::vector<std::string>{"regressor_empathy.json", "regressor_distress.json"};
  for (std::size_t i = 0; i < regressors_.size(); ++i) {
    regressors_[i].save(dir / names[i]);
    files.push_back(names[i]);
  }
  const auto l = layout();
  write_json(dir / "manifest.json",
             {{"format", kBundleFormat},
              {"version", kBundleVersion},
              {"feature_mode", std::string(to_string(mode_))},
              {"layout", {{"d_emp", l.d_emp}, {"d_dis", l.d_dis}, {"n_feat", l.n_feat}}},
              {"score_range", {range_.lo, range_.hi}},
              {"regressor_kind", std::string(reg::to_string(regressors_[0].kind()))},
              {"encoders", {"encoder_empathy", "encoder_distress"}},
              {"scaler", "scaler.json"},
              {"regressors", files}});
}

Track1Pipeline Track1Pipeline::load(const std::filesystem::path& dir) {
  const json m = read_json(dir / "manifest.json");
  try {
    if (m.at("format").get<std::string>() != kBundleFormat) {
      throw DataError((dir / "manifest.json").string() + ": not a track1 bundle");
    }
    if (m.at("version").get<int>() != kBundleVersion) {
      throw DataError((dir / "manifest.json").string() + ": unsupported bundle version");
    }
    EncoderPair enc{FinetunedEncoder::load(dir / "encoder_empathy"), FinetunedEncoder::load(dir / "encoder_distress")};
    auto scaler = corpus::FeatureScaler::from_json(read_json(dir / m.at("scaler").get<std::string>()));
    std::vector<reg::RegressorModel> regs;
    for (const auto& f : m.at("regressors")) regs.push_back(reg::RegressorModel::load(dir / f.get<std::string>()));
    const auto range = m.at("score_range").get<std::vector<double>>();
    Track1Pipeline p(std::move(enc), std::move(scaler), parse_feature_mode(m.at("feature_mode").get<std::string>()),
                     std::move(regs), {range.at(0), range.at(1)});
    const auto& l = m.at("layout");
    if (!(p.layout() == FeatureLayout{l.at("d_emp").get<int>(), l.at("d_dis").get<int>(), l.at("n_feat").get<int>()})) {
      throw DataError((dir / "manifest.json").string() + ": layout does not match the stored models");
    }
    return p;
  } catch (const json::exception& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  }
}

EncoderPair finetune_encoders(const corpus::Dataset& train, const Track1Hyper& hyper) {
  hyper.validate();
  auto h = hyper.encoder;
  const auto vocab = text::build_vocab(train.essays(), h.vocab_min_freq, h.vocab_max_size);
  h.init_seed = derive_seed(hyper.seed, 1);
  h.train.seed = derive_seed(hyper.seed, 2);
  auto emp = finetune_encoder(train, corpus::Target::empathy, h, &vocab);
  h.init_seed = derive_seed(hyper.seed, 3);
  h.train.seed = derive_seed(hyper.seed, 4);
  auto dis = finetune_encoder(train, corpus::Target::distress, h, &vocab);
  return {std::move(emp), std::move(dis)};
}

Track1Pipeline assemble_pipeline(const corpus::Dataset& train, const Track1Hyper& hyper, EncoderPair encoders) {
  hyper.validate();
  std::vector<std::string> missing;
  for (const auto& r : train.records) {
    if (!r.empathy || !r.distress) missing.push_back(r.id + ": missing empathy or distress score");
  }
  if (!missing.empty()) {
    throw DataError(std::to_string(missing.size()) + " training record(s) lack a target score", std::move(missing));
  }
  auto scaler = corpus::fit_scaler(train, hyper.scaler ? *hyper.scaler : corpus::ScalerConfig::defaults_for(train));

  auto rh = hyper.regressor;
  rh.mlp.seed = derive_seed(hyper.seed, 5);
  rh.adaboost.seed = derive_seed(hyper.seed, 6);
  auto x = features_of(encoders, scaler, hyper.features, train, hyper.workers);

  std::vector<double> ye;
  std::vector<double> yd;
  for (const auto& r : train.records) {
    ye.push_back(*r.empathy);
    yd.push_back(*r.distress);
  }
  std::vector<reg::RegressorModel> regs;
  if (hyper.joint_mlp) {
    nn::Matrix y(static_cast<Eigen::Index>(ye.size()), 2);
    for (std::size_t i = 0; i < ye.size(); ++i) {
      y(static_cast<Eigen::Index>(i), 0) = ye[i];
      y(static_cast<Eigen::Index>(i), 1) = yd[i];
    }
    regs.push_back(reg::fit_multi_output_mlp(rh, x, y));
  } else {
    regs.push_back(reg::fit(rh, x, ye));
    regs.push_back(reg::fit(rh, x, yd));
  }
  return Track1Pipeline(std::move(encoders), std::move(scaler), hyper.features, std::move(regs), hyper.range);
}

Track1Pipeline train_pipeline(const corpus::Dataset& train, const Track1Hyper& hyper) {
  hyper.validate();
  return assemble_pipeline(train, hyper, finetune_encoders(train, hyper));
}

void write_submission(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& preds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [e, d] : preds) out << format_fixed(e, 6) << '\t' << format_fixed(d, 6) << '\n';
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace affect::track1
