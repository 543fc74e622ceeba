#include "affect/track2/emotion.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "affect/common.hpp"
#include "affect/corpus/split.hpp"
#include "affect/nncore/ops.hpp"
#include "affect/nncore/optim.hpp"

namespace affect::track2 {

using nlohmann::json;

namespace {

std::vector<std::string> all_essays(const corpus::Dataset& a, const corpus::Dataset& b) {
  auto out = a.essays();
  auto more = b.essays();
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

struct Encoded {
  std::vector<text::TokenSeq> seqs;
  std::vector<std::size_t> labels;
};

template <class Model>
Encoded encode(const Model& model, const corpus::Dataset& d) {
  Encoded e;
  e.labels = label_indices(d);
  e.seqs.reserve(d.size());
  for (const auto& r : d.records) e.seqs.push_back(model.tokenize(r.essay));
  return e;
}

text::LabelTokenPair pair_of(std::size_t label) {
  return {text::kFirstLabelId + static_cast<int>(label), text::kEosId};
}

double mean_nll(const text::Seq2SeqModel& m, const Encoded& e) {
  double total = 0.0;
  for (std::size_t i = 0; i < e.seqs.size(); ++i) total -= m.logprob(e.seqs[i], pair_of(e.labels[i])).total();
  return total / static_cast<double>(e.seqs.size());
}

/// Runs one training stage on `data`. With a validation set, stops after
/// `patience` epochs without improvement and restores the best epoch (0 is
/// the starting point).
StageLog run_generator_stage(text::Seq2SeqModel& m, const Encoded& data, const Encoded* valid,
                             const nn::TrainHyper& hyper, int patience, std::string corpus_id) {
  StageLog log;
  log.corpus = std::move(corpus_id);
  log.train_loss.push_back(mean_nll(m, data));
  std::vector<double> best_values;
  double best = 0.0;
  int since_best = 0;
  if (valid) {
    best = mean_nll(m, *valid);
    log.valid_loss.push_back(best);
    best_values = m.params().flat_values();
  }

  auto state = nn::AdamState::for_store(m.params(), hyper.lr);
  double epoch_loss = 0.0;
  std::size_t epoch_n = 0;
  nn::train_minibatch(
      m.params(), state, data.seqs.size(), hyper,
      [&](std::size_t i, double scale) {
        const double l = m.accumulate_nll(data.seqs[i], pair_of(data.labels[i]), scale);
        epoch_loss += l;
        ++epoch_n;
        return l;
      },
      [&](int epoch) {
        log.train_loss.push_back(epoch_loss / static_cast<double>(epoch_n));
        epoch_loss = 0.0;
        epoch_n = 0;
        if (!valid) return true;
        const double v = mean_nll(m, *valid);
        log.valid_loss.push_back(v);
        if (v < best) {
          best = v;
          log.best_epoch = epoch;
          best_values = m.params().flat_values();
          since_best = 0;
          return true;
        }
        return ++since_best < patience;
      });
  if (valid) m.params().set_flat_values(best_values);
  return log;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

/// Loss and dloss/dlogits for one example.
double cls_loss(ClsLoss mode, std::span<const double> z, std::size_t label, std::span<double> dz) {
  if (mode == ClsLoss::softmax_ce) {
    const auto p = nn::softmax(z);
    for (std::size_t k = 0; k < z.size(); ++k) dz[k] = p[k] - (k == label ? 1.0 : 0.0);
    return -nn::log_softmax(z)[label];
  }
  double total = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double t = k == label ? 1.0 : 0.0;
    total += softplus(z[k]) - t * z[k];
    dz[k] = sigmoid(z[k]) - t;
  }
  return total;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<std::size_t> label_indices(const corpus::Dataset& d) {
  std::vector<std::size_t> out;
  std::vector<std::string> bad;
  for (const auto& r : d.records) {
    if (!r.emotion) {
      bad.push_back(r.id + ": no emotion label");
      continue;
    }
    auto idx = emotion_index(*r.emotion);
    if (!idx) {
      bad.push_back(r.id + ": unknown emotion label '" + *r.emotion + "'");
      continue;
    }
    out.push_back(*idx);
  }
  if (!bad.empty()) {
    throw DataError(std::to_string(bad.size()) + " record(s) without a valid emotion label", std::move(bad));
  }
  return out;
}

void ModelHyper::validate() const {
  dims.validate();
  train.validate();
  if (vocab_min_freq < 1) throw ConfigError("vocab_min_freq must be >= 1");
}

void StagedHyper::validate() const {
  model.validate();
  aux_train.validate();
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (!(aux_valid_fraction > 0.0 && aux_valid_fraction < 1.0)) {
    throw ConfigError("aux_valid_fraction must lie in (0, 1)");
  }
}

// ------------------------------------------------------------- generator

GenEmotionModel::GenEmotionModel(text::Seq2SeqModel model, std::vector<StageLog> stages)
    : model_(std::move(model)), stages_(std::move(stages)) {}

std::vector<std::string> GenEmotionModel::provenance() const {
  std::vector<std::string> out;
  for (const auto& s : stages_) out.push_back(s.corpus);
  return out;
}

void GenEmotionModel::save(const std::filesystem::path& dir) const {
  model_.save(dir);
  json stages = json::array();
  for (const auto& s : stages_) {
    stages.push_back({{"corpus", s.corpus},
                      {"train_loss", s.train_loss},
                      {"valid_loss", s.valid_loss},
                      {"best_epoch", s.best_epoch}});
  }
  std::ofstream out(dir / "stages.json");
  out << stages.dump(1) << '\n';
  if (!out) throw DataError("cannot write " + (dir / "stages.json").string());
}

GenEmotionModel GenEmotionModel::load(const std::filesystem::path& dir) {
  const json j = read_json(dir / "stages.json");
  std::vector<StageLog> stages;
  try {
    for (const auto& s : j) {
      stages.push_back({s.at("corpus").get<std::string>(), s.at("train_loss").get<std::vector<double>>(),
                        s.at("valid_loss").get<std::vector<double>>(), s.at("best_epoch").get<int>()});
    }
  } catch (const json::exception& e) {
    throw DataError((dir / "stages.json").string() + ": " + e.what());
  }
  return GenEmotionModel(text::Seq2SeqModel::load(dir), std::move(stages));
}

double generator_nll(const text::Seq2SeqModel& model, const corpus::Dataset& d) {
  std::vector<double> lp;
  const auto e = encode(model, d);
  for (std::size_t i = 0; i < e.seqs.size(); ++i) lp.push_back(model.logprob(e.seqs[i], pair_of(e.labels[i])).total());
  return nn::nll_loss(lp);
}

GenEmotionModel train_generator(const corpus::Dataset& train, const ModelHyper& hyper) {
  return staged_finetune(corpus::Dataset{}, train, StagedHyper{hyper, hyper.train});
}

GenEmotionModel staged_finetune(const corpus::Dataset& aux, const corpus::Dataset& main, const StagedHyper& hyper) {
  hyper.validate();
  label_indices(aux);
  if (main.empty()) throw DataError("empty training set");
  const auto& mh = hyper.model;
  auto vocab = text::build_vocab(all_essays(aux, main), mh.vocab_min_freq, mh.vocab_max_size);
  GenEmotionModel model(text::Seq2SeqModel::create(std::move(vocab), mh.dims, mh.init_seed));
  const auto main_data = encode(model.model(), main);

  if (!aux.empty()) {
    const auto split = aux.size() < 2 ? corpus::SplitResult{}
                                      : corpus::split_dataset(aux, 1.0 - hyper.aux_valid_fraction, hyper.split_seed);
    if (split.train.empty() || split.valid.empty()) {
      throw DataError("aux corpus too small for a train/validation split (" + std::to_string(aux.size()) +
                      " records)");
    }
    const auto aux_train = encode(model.model(), split.train);
    const auto aux_valid = encode(model.model(), split.valid);
    model.add_stage(
        run_generator_stage(model.model(), aux_train, &aux_valid, hyper.aux_train, hyper.patience, aux.provenance));
  }
  model.add_stage(run_generator_stage(model.model(), main_data, nullptr, mh.train, 0, main.provenance));
  return model;
}

// ------------------------------------------------------------- classifier

std::string_view to_string(ClsLoss l) { return l == ClsLoss::softmax_ce ? "softmax_ce" : "per_label_bce"; }

ClsLoss parse_cls_loss(std::string_view s) {
  if (s == "softmax_ce") return ClsLoss::softmax_ce;
  if (s == "per_label_bce") return ClsLoss::per_label_bce;
  throw ConfigError("unknown classifier loss '" + std::string(s) + "' (expected softmax_ce or per_label_bce)");
}

ClsEmotionModel ClsEmotionModel::create(text::Vocab vocab, const text::TransformerDims& dims, std::uint64_t seed,
                                        ClsLoss mode) {
  auto enc = text::EncoderModel::create(
      std::move(vocab), dims, seed,
      {nn::LayerSpec::softmax_head(kHeadName, dims.model_dim, static_cast<int>(kNumEmotions))});
  return ClsEmotionModel(std::move(enc), mode);
}

ClsEmotionModel::ClsEmotionModel(text::EncoderModel encoder, ClsLoss mode, std::vector<double> train_log)
    : encoder_(std::move(encoder)), head_(encoder_.params(), kHeadName), mode_(mode), train_log_(std::move(train_log)) {
  if (head_.out_dim() != static_cast<int>(kNumEmotions) || head_.in_dim() != encoder_.dims().model_dim) {
    throw ConfigError("classifier head must map model_dim to 7");
  }
}

std::array<double, kNumEmotions> ClsEmotionModel::scores(const text::TokenSeq& seq) const {
  const nn::Matrix p = encoder_.pooled_forward(seq, nullptr);
  const nn::Matrix z = head_.forward(encoder_.params(), p);
  std::array<double, kNumEmotions> out{};
  for (std::size_t k = 0; k < kNumEmotions; ++k) out[k] = z(0, static_cast<Eigen::Index>(k));
  return out;
}

std::array<double, kNumEmotions> ClsEmotionModel::scores(std::string_view essay) const {
  return scores(encoder_.tokenize(essay));
}

double ClsEmotionModel::loss(const text::TokenSeq& seq, std::size_t label) const {
  const auto z = scores(seq);
  std::array<double, kNumEmotions> dz{};
  return cls_loss(mode_, z, label, dz);
}

double ClsEmotionModel::accumulate_loss(const text::TokenSeq& seq, std::size_t label, double scale) {
  text::EncoderStack::Cache cache;
  const nn::Matrix p = encoder_.pooled_forward(seq, &cache);
  const nn::Matrix z = head_.forward(encoder_.params(), p);
  std::array<double, kNumEmotions> dz{};
  const double l = cls_loss(mode_, std::span<const double>(z.data(), kNumEmotions), label, dz);
  nn::Matrix dy(1, static_cast<Eigen::Index>(kNumEmotions));
  for (std::size_t k = 0; k < kNumEmotions; ++k) dy(0, static_cast<Eigen::Index>(k)) = dz[k] * scale;
  const nn::Matrix dp = head_.backward(encoder_.params(), p, dy);
  encoder_.pooled_backward(cache, dp.row(0));
  return l;
}

void ClsEmotionModel::save(const std::filesystem::path& dir) const {
  encoder_.save(dir);
  std::ofstream mode(dir / "mode.cfg");
  mode << "loss = " << to_string(mode_) << '\n';
  std::ofstream log(dir / "train_log.tsv");
  for (std::size_t e = 0; e < train_log_.size(); ++e) log << e << '\t' << format_shortest(train_log_[e]) << '\n';
  if (!mode || !log) throw DataError("cannot write classifier metadata in " + dir.string());
}

ClsEmotionModel ClsEmotionModel::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "mode.cfg");
  if (!in) throw DataError("cannot read " + (dir / "mode.cfg").string());
  std::map<std::string, std::string> kv;
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  if (!kv.count("loss")) throw DataError((dir / "mode.cfg").string() + ": missing loss");
  std::vector<double> log;
  std::ifstream lf(dir / "train_log.tsv");
  for (std::string line; std::getline(lf, line);) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos) log.push_back(std::stod(line.substr(tab + 1)));
  }
  return ClsEmotionModel(text::EncoderModel::load(dir), parse_cls_loss(kv["loss"]), std::move(log));
}

ClsEmotionModel train_classifier(const corpus::Dataset& train, ClsLoss mode, const ModelHyper& hyper) {
  hyper.validate();
  if (train.empty()) throw DataError("empty training set");
  auto model = ClsEmotionModel::create(text::build_vocab(train.essays(), hyper.vocab_min_freq, hyper.vocab_max_size),
                                       hyper.dims, hyper.init_seed, mode);
  const auto data = encode(model.encoder(), train);

  double initial = 0.0;
  for (std::size_t i = 0; i < data.seqs.size(); ++i) initial += model.loss(data.seqs[i], data.labels[i]);
  model.train_log_.push_back(initial / static_cast<double>(data.seqs.size()));

  auto state = nn::AdamState::for_store(model.params(), hyper.train.lr);
  double epoch_loss = 0.0;
  std::size_t epoch_n = 0;
  nn::train_minibatch(
      model.params(), state, data.seqs.size(), hyper.train,
      [&](std::size_t i, double scale) {
        const double l = model.accumulate_loss(data.seqs[i], data.labels[i], scale);
        epoch_loss += l;
        ++epoch_n;
        return l;
      },
      [&](int) {
        model.train_log_.push_back(epoch_loss / static_cast<double>(epoch_n));
        epoch_loss = 0.0;
        epoch_n = 0;
        return true;
      });
  return model;
}

// ------------------------------------------------------------- prediction

std::string predict_emotion(const GenEmotionModel& model, std::string_view essay) {
  const auto& m = model.model();
  return m.decode_constrained(m.tokenize(essay)).label;
}

std::string predict_emotion(const ClsEmotionModel& model, std::string_view essay) {
  return std::string(kEmotionLabels[argmax(model.scores(essay))]);
}

std::vector<std::string> predict_all(const GenEmotionModel& model, const corpus::Dataset& d, int workers) {
  std::vector<std::string> out(d.size());
  parallel_for(d.size(), workers, [&](std::size_t i) { out[i] = predict_emotion(model, d.records[i].essay); });
  return out;
}

std::vector<std::string> predict_all(const ClsEmotionModel& model, const corpus::Dataset& d, int workers) {
  std::vector<std::string> out(d.size());
  parallel_for(d.size(), workers, [&](std::size_t i) { out[i] = predict_emotion(model, d.records[i].essay); });
  return out;
}

void write_submission(const std::filesystem::path& path, const std::vector<std::string>& labels) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& l : labels) out << l << '\n';
  if (!out) throw DataError("cannot write " + path.string());
}

}  // namespace affect::track2
