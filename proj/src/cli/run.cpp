#include "affect/cli/run.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "affect/cli/config.hpp"
#include "affect/common.hpp"
#include "affect/corpus/synth.hpp"
#include "affect/corpus/tsv.hpp"
#include "affect/metrics/metrics.hpp"
#include "affect/track1/pipeline.hpp"
#include "affect/track2/emotion.hpp"

namespace affect::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kConfigFile = "config.cfg";
constexpr const char* kModelDir = "model";

corpus::Schema schema_of(const RunConfig& c) {
  const auto& path = c.get("schema");
  return path.empty() ? corpus::Schema::defaults() : corpus::Schema::load(path);
}

void write_log(const fs::path& path, const std::vector<double>& values, int first_epoch) {
  std::ofstream out(path);
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << first_epoch + static_cast<int>(i) << '\t' << format_shortest(values[i]) << '\n';
  }
  if (!out) throw DataError("cannot write " + path.string());
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("cannot write " + path.string());
}

bool is_generator(const RunConfig& c) {
  const auto& m = c.get("track2_model");
  if (m == "generator") return true;
  if (m == "classifier") return false;
  throw ConfigError("config key 'track2_model': '" + m + "' is not generator or classifier");
}

/// Parses every setting up front so configuration mistakes surface before
/// any data is read.
void check_config(const RunConfig& c) {
  if (task_of(c) == Track::track1) {
    track1_hyper(c);
  } else if (is_generator(c)) {
    if (c.get("aux_data").empty()) {
      track2_hyper(c, "generator_lr");
    } else {
      staged_hyper(c);
    }
  } else {
    track2_hyper(c, "classifier_lr");
    track2::parse_cls_loss(c.get("classifier_loss"));
  }
  if (c.get_int("workers") < 1) throw ConfigError("config key 'workers' must be >= 1");
}

// ------------------------------------------------------------- subcommands

struct SynthArgs {
  std::string task;
  int n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int do_synth(const SynthArgs& a, std::ostream& out) {
  const auto d = corpus::synthesize_corpus(a.n, a.seed, corpus::parse_synth_task(a.task));
  corpus::write_tsv(a.out, d);
  out << "wrote " << d.size() << " records to " << a.out << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
  // Dedicated flags, applied last; empty means not given.
  std::vector<std::pair<std::string, std::string>> flags;
};

int do_train(const TrainArgs& a, std::ostream& out) {
  RunConfig cfg;
  if (!a.config.empty()) cfg.merge_file(a.config);
  for (const auto& s : a.sets) cfg.set_assignment(s);
  for (const auto& [key, value] : a.flags) cfg.set(key, value);
  check_config(cfg);
  if (cfg.get("train_data").empty()) throw ConfigError("train_data is not set (use --data or the config file)");

  const auto schema = schema_of(cfg);
  const auto train = corpus::load_tsv(cfg.get("train_data"), schema);
  const fs::path dir = cfg.get("out_dir");
  fs::create_directories(dir);
  cfg.save(dir / kConfigFile);

  if (task_of(cfg) == Track::track1) {
    auto h = track1_hyper(cfg);
    h.range = schema.score_range;
    const auto pipe = track1::train_pipeline(train, h);
    pipe.save(dir / kModelDir);
    write_log(dir / "train_log.encoder_empathy.tsv", pipe.encoders().empathy.train_log(), 1);
    write_log(dir / "train_log.encoder_distress.tsv", pipe.encoders().distress.train_log(), 1);
  } else if (is_generator(cfg)) {
    const auto& aux_path = cfg.get("aux_data");
    const auto model = aux_path.empty()
                           ? track2::train_generator(train, track2_hyper(cfg, "generator_lr"))
                           : track2::staged_finetune(corpus::load_tsv(aux_path, schema), train, staged_hyper(cfg));
    model.save(dir / kModelDir);
    const auto& stages = model.stages();
    for (std::size_t i = 0; i < stages.size(); ++i) {
      const std::string name = i + 1 == stages.size() ? "main" : "aux";
      write_log(dir / ("train_log." + name + ".tsv"), stages[i].train_loss, 0);
      if (!stages[i].valid_loss.empty()) write_log(dir / ("valid_log." + name + ".tsv"), stages[i].valid_loss, 0);
    }
  } else {
    const auto model = track2::train_classifier(train, track2::parse_cls_loss(cfg.get("classifier_loss")),
                                                track2_hyper(cfg, "classifier_lr"));
    model.save(dir / kModelDir);
    write_log(dir / "train_log.classifier.tsv", model.train_log(), 0);
  }
  out << "trained " << cfg.get("task") << " on " << train.size() << " records; run directory " << dir.string()
      << '\n';
  return kExitOk;
}

struct ApplyArgs {
  std::string run;
  std::string data;
  std::string out;
  int workers = 0;  // 0: take the run's setting
};

struct Loaded {
  RunConfig cfg;
  corpus::Dataset data;
  int workers = 1;
};

Loaded load_for_apply(const ApplyArgs& a) {
  const fs::path cfg_path = fs::path(a.run) / kConfigFile;
  if (!fs::exists(cfg_path)) throw ConfigError("no run configuration at " + cfg_path.string());
  Loaded l{RunConfig::load(cfg_path), {}, 1};
  check_config(l.cfg);
  l.workers = a.workers > 0 ? a.workers : l.cfg.get_int("workers");
  l.data = corpus::load_tsv(a.data, schema_of(l.cfg));
  return l;
}

std::vector<std::string> track2_predictions(const RunConfig& cfg, const fs::path& model_dir,
                                            const corpus::Dataset& d, int workers) {
  if (is_generator(cfg)) return track2::predict_all(track2::GenEmotionModel::load(model_dir), d, workers);
  return track2::predict_all(track2::ClsEmotionModel::load(model_dir), d, workers);
}

int do_evaluate(const ApplyArgs& a, std::ostream& out) {
  const auto l = load_for_apply(a);
  const fs::path model_dir = fs::path(a.run) / kModelDir;
  json result{{"task", l.cfg.get("task")}, {"records", l.data.size()}};

  if (task_of(l.cfg) == Track::track1) {
    const auto pipe = track1::Track1Pipeline::load(model_dir);
    const auto preds = pipe.predict_all(l.data, l.workers);
    std::vector<double> ge, pe, gd, pd;
    for (std::size_t i = 0; i < l.data.size(); ++i) {
      const auto& r = l.data.records[i];
      if (!r.empathy || !r.distress) continue;
      ge.push_back(*r.empathy);
      gd.push_back(*r.distress);
      pe.push_back(preds[i].first);
      pd.push_back(preds[i].second);
    }
    if (ge.size() < 2) throw DataError(a.data + ": fewer than 2 records carry both gold scores");
    metrics::RegressionReport report;
    try {
      report = metrics::regression_report(ge, pe, gd, pd);
    } catch (const metrics::UndefinedCorrelation& ex) {
      throw StateError(std::string("cannot score predictions: ") + ex.what());
    }
    out << metrics::render(report);
    result["scored"] = ge.size();
    result["report"] = metrics::to_json(report);
  } else {
    const auto preds = track2_predictions(l.cfg, model_dir, l.data, l.workers);
    std::vector<std::string> gold, pred;
    for (std::size_t i = 0; i < l.data.size(); ++i) {
      if (!l.data.records[i].emotion) continue;
      gold.push_back(*l.data.records[i].emotion);
      pred.push_back(preds[i]);
    }
    if (gold.empty()) throw DataError(a.data + ": no record carries a gold emotion label");
    const auto report = metrics::classification_report(gold, pred);
    out << metrics::render(report);
    result["scored"] = gold.size();
    result["report"] = metrics::to_json(report);
  }
  write_json_file(a.out.empty() ? fs::path(a.run) / "evaluation.json" : fs::path(a.out), result);
  return kExitOk;
}

int do_predict(const ApplyArgs& a, std::ostream& out) {
  const auto l = load_for_apply(a);
  const fs::path model_dir = fs::path(a.run) / kModelDir;
  if (task_of(l.cfg) == Track::track1) {
    track1::write_submission(a.out, track1::Track1Pipeline::load(model_dir).predict_all(l.data, l.workers));
  } else {
    track2::write_submission(a.out, track2_predictions(l.cfg, model_dir, l.data, l.workers));
  }
  out << "wrote " << l.data.size() << " predictions to " << a.out << '\n';
  return kExitOk;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string describe(const DataError& e) {
  std::string msg = e.what();
  if (!e.details().empty()) {
    msg += ": " + e.details().front();
    if (e.details().size() > 1) msg += " (and " + std::to_string(e.details().size() - 1) + " more)";
  }
  return msg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Empathy, distress and emotion models for essay text", "affect"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic corpus");
  s->add_option("--task", synth.task, "track1 or track2")->required();
  s->add_option("--n", synth.n, "number of records")->required();
  s->add_option("--seed", synth.seed, "generator seed");
  s->add_option("--out", synth.out, "output TSV")->required();

  TrainArgs train;
  std::map<std::string, std::string> flag_values;
  auto* t = app.add_subcommand("train", "Train a model and write a run directory");
  t->add_option("--config", train.config, "key = value configuration file");
  t->add_option("--set", train.sets, "override one config key (key=value); repeatable");
  const std::vector<std::pair<std::string, std::string>> flag_keys = {
      {"--task", "task"},         {"--data", "train_data"},    {"--schema", "schema"},
      {"--out", "out_dir"},       {"--regressor", "regressor"}, {"--model", "track2_model"},
      {"--aux-data", "aux_data"}, {"--seed", "seed"},           {"--workers", "workers"}};
  for (const auto& [flag, key] : flag_keys) {
    t->add_option(flag, flag_values[key], "sets config key " + key);
  }

  ApplyArgs eval;
  auto* e = app.add_subcommand("evaluate", "Print the metric report of a trained run on a labeled TSV");
  e->add_option("--run", eval.run, "run directory")->required();
  e->add_option("--data", eval.data, "labeled TSV")->required();
  e->add_option("--out", eval.out, "structured results (default <run>/evaluation.json)");
  e->add_option("--workers", eval.workers, "threads (default: the run's setting)");

  ApplyArgs pred;
  auto* p = app.add_subcommand("predict", "Write submission-format predictions");
  p->add_option("--run", pred.run, "run directory")->required();
  p->add_option("--data", pred.data, "input TSV")->required();
  p->add_option("--out", pred.out, "submission file")->required();
  p->add_option("--workers", pred.workers, "threads (default: the run's setting)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    out << sub->help();
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "affect: " << one_line(ex.what()) << '\n';
    return kExitUsage;
  }

  try {
    if (*s) return do_synth(synth, out);
    if (*t) {
      for (const auto& [flag, key] : flag_keys) {
        if (t->count(flag)) train.flags.emplace_back(key, flag_values[key]);
      }
      return do_train(train, out);
    }
    if (*e) return do_evaluate(eval, out);
    return do_predict(pred, out);
  } catch (const ConfigError& ex) {
    err << "affect: " << one_line(ex.what()) << '\n';
    return kExitUsage;
  } catch (const ArgumentError& ex) {
    err << "affect: " << one_line(ex.what()) << '\n';
    return kExitUsage;
  } catch (const DataError& ex) {
    err << "affect: " << one_line(describe(ex)) << '\n';
    return kExitData;
  } catch (const SchemaError& ex) {
    err << "affect: " << one_line(ex.what()) << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& ex) {
    err << "affect: " << one_line(ex.what()) << '\n';
    return kExitData;
  } catch (const std::exception& ex) {
    err << "affect: " << one_line(ex.what()) << '\n';
    return kExitRuntime;
  }
}

}  // namespace affect::cli
