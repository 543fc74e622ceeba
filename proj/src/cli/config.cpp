#include "affect/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "affect/common.hpp"

namespace affect::cli {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"task", "track1", "track1 or track2"},
      {"train_data", "", "training TSV"},
      {"schema", "", "column mapping file; empty for the default column names"},
      {"out_dir", "run", "run directory written by train"},
      {"seed", "0", "master seed; every stage seed derives from it"},
      {"workers", "1", "threads for feature extraction and prediction"},

      {"layers", "2", "transformer layers (encoder, and decoder for the generator)"},
      {"model_dim", "64", "transformer width"},
      {"heads", "4", "attention heads"},
      {"ff_dim", "128", "feed-forward width"},
      {"max_len", "128", "tokens per essay including [cls]"},
      {"vocab_min_freq", "1", "minimum word count for the vocabulary"},
      {"vocab_max_size", "20000", "vocabulary cap including special and label tokens"},
      {"epochs", "10", "transformer training epochs"},
      {"batch_size", "8", "transformer minibatch size"},
      {"clip_norm", "1", "global gradient-norm clip; 0 disables"},

      {"encoder_lr", "2e-05", "track1 encoder fine-tuning learning rate"},
      {"regressor", "mlp", "mlp, linear_svr, adaboost_r2 or gbt"},
      {"features", "both", "both or empathy_only"},
      {"joint_mlp", "false", "one two-output MLP instead of one regressor per target"},
      {"mlp_hidden", "64,32", "hidden layer widths"},
      {"mlp_lr", "0.001", "MLP learning rate"},
      {"mlp_epochs", "200", "MLP epochs"},
      {"mlp_batch_size", "16", "MLP minibatch size"},
      {"svr_epsilon", "0.1", "insensitive-zone half width"},
      {"svr_c", "1", "LinearSVR loss weight"},
      {"svr_lr", "0.001", "LinearSVR base step"},
      {"svr_steps", "5000", "LinearSVR subgradient steps"},
      {"adaboost_rounds", "50", "AdaBoost.R2 rounds"},
      {"adaboost_resample", "true", "fit each stump on a weighted bootstrap"},
      {"gbt_trees", "100", "boosting rounds"},
      {"gbt_max_depth", "3", "tree depth"},
      {"gbt_shrinkage", "0.1", "learning rate per tree"},
      {"gbt_min_samples_leaf", "1", "minimum rows per leaf"},

      {"track2_model", "generator", "generator or classifier"},
      {"generator_lr", "2e-05", "generator learning rate (main stage)"},
      {"classifier_lr", "2e-05", "classifier learning rate"},
      {"classifier_loss", "softmax_ce", "softmax_ce or per_label_bce"},
      {"aux_data", "", "auxiliary TSV; when set the generator is trained in two stages"},
      {"aux_lr", "2e-05", "auxiliary-stage learning rate"},
      {"aux_epochs", "30", "auxiliary-stage epoch cap"},
      {"aux_patience", "3", "auxiliary-stage epochs without validation improvement before stopping"},
      {"aux_valid_fraction", "0.2", "share of the auxiliary corpus held out for early stopping"},
  };
  return keys;
}

namespace {

bool known(std::string_view key) {
  for (const auto& k : config_keys()) {
    if (k.name == key) return true;
  }
  return false;
}

[[noreturn]] void bad_value(std::string_view key, const std::string& value, std::string_view expected) {
  throw ConfigError("config key '" + std::string(key) + "': '" + value + "' is not " + std::string(expected));
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : config_keys()) values_.emplace(std::string(k.name), std::string(k.default_value));
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  RunConfig c;
  c.merge_file(path);
  return c;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::set<std::string> seen;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (!known(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": key '" + key + "' repeated");
    values_[key] = trim(t.substr(eq + 1));
  }
}

void RunConfig::set(std::string_view key, std::string value) {
  if (!known(key)) throw ConfigError("unknown config key '" + std::string(key) + "'");
  values_[std::string(key)] = trim(value);
}

void RunConfig::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("--set expects key=value, got '" + std::string(assignment) + "'");
  }
  set(trim(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
}

const std::string& RunConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

int RunConfig::get_int(std::string_view key) const {
  const auto& v = get(key);
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t RunConfig::get_u64(std::string_view key) const {
  const auto& v = get(key);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double RunConfig::get_double(std::string_view key) const {
  const auto& v = get(key);
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

bool RunConfig::get_bool(std::string_view key) const {
  const auto v = to_lower(get(key));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, get(key), "true or false");
}

std::vector<int> RunConfig::get_int_list(std::string_view key) const {
  std::vector<int> out;
  std::stringstream ss(get(key));
  for (std::string item; std::getline(ss, item, ',');) {
    const auto t = trim(item);
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size()) bad_value(key, get(key), "a comma-separated integer list");
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& k : config_keys()) {
    const auto& v = get(k.name);
    out += std::string(k.name) + (v.empty() ? " =\n" : " = " + v + "\n");
  }
  return out;
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  out << serialize();
  if (!out) throw DataError("cannot write " + path.string());
}

Track task_of(const RunConfig& c) {
  const auto& t = c.get("task");
  if (t == "track1") return Track::track1;
  if (t == "track2") return Track::track2;
  bad_value("task", t, "track1 or track2");
}

namespace {

text::TransformerDims dims_of(const RunConfig& c) {
  text::TransformerDims d;
  d.layers = c.get_int("layers");
  d.model_dim = c.get_int("model_dim");
  d.heads = c.get_int("heads");
  d.ff_dim = c.get_int("ff_dim");
  d.max_len = c.get_int("max_len");
  return d;
}

nn::TrainHyper train_of(const RunConfig& c, std::string_view lr_key) {
  nn::TrainHyper t;
  t.lr = c.get_double(lr_key);
  t.epochs = c.get_int("epochs");
  t.batch_size = c.get_int("batch_size");
  t.clip_norm = c.get_double("clip_norm");
  return t;
}

}  // namespace

track1::Track1Hyper track1_hyper(const RunConfig& c) {
  track1::Track1Hyper h;
  h.encoder.dims = dims_of(c);
  h.encoder.vocab_min_freq = c.get_int("vocab_min_freq");
  h.encoder.vocab_max_size = c.get_int("vocab_max_size");
  h.encoder.train = train_of(c, "encoder_lr");

  auto& r = h.regressor;
  r.kind = reg::parse_kind(c.get("regressor"));
  r.mlp.hidden = c.get_int_list("mlp_hidden");
  r.mlp.lr = c.get_double("mlp_lr");
  r.mlp.epochs = c.get_int("mlp_epochs");
  r.mlp.batch_size = c.get_int("mlp_batch_size");
  r.svr.epsilon = c.get_double("svr_epsilon");
  r.svr.c = c.get_double("svr_c");
  r.svr.lr = c.get_double("svr_lr");
  r.svr.steps = c.get_int("svr_steps");
  r.adaboost.rounds = c.get_int("adaboost_rounds");
  r.adaboost.resample = c.get_bool("adaboost_resample");
  r.gbt.trees = c.get_int("gbt_trees");
  r.gbt.max_depth = c.get_int("gbt_max_depth");
  r.gbt.shrinkage = c.get_double("gbt_shrinkage");
  r.gbt.min_samples_leaf = c.get_int("gbt_min_samples_leaf");

  h.features = track1::parse_feature_mode(c.get("features"));
  h.joint_mlp = c.get_bool("joint_mlp");
  h.workers = c.get_int("workers");
  h.seed = c.get_u64("seed");
  h.validate();
  return h;
}

track2::ModelHyper track2_hyper(const RunConfig& c, std::string_view lr_key) {
  track2::ModelHyper h;
  h.dims = dims_of(c);
  h.vocab_min_freq = c.get_int("vocab_min_freq");
  h.vocab_max_size = c.get_int("vocab_max_size");
  h.train = train_of(c, lr_key);
  const auto seed = c.get_u64("seed");
  h.init_seed = derive_seed(seed, 1);
  h.train.seed = derive_seed(seed, 2);
  h.validate();
  return h;
}

track2::StagedHyper staged_hyper(const RunConfig& c) {
  track2::StagedHyper h{track2_hyper(c, "generator_lr"), train_of(c, "aux_lr")};
  const auto seed = c.get_u64("seed");
  h.aux_train.epochs = c.get_int("aux_epochs");
  h.aux_train.seed = derive_seed(seed, 3);
  h.patience = c.get_int("aux_patience");
  h.aux_valid_fraction = c.get_double("aux_valid_fraction");
  h.split_seed = derive_seed(seed, 4);
  h.validate();
  return h;
}

}  // namespace affect::cli
