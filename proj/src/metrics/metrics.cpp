#include "affect/metrics/metrics.hpp"

#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "affect/labels.hpp"

namespace affect::metrics {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b, std::size_t min_len,
                   const char* what) {
  if (a.size() != b.size()) {
    throw ArgumentError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() < min_len) {
    throw ArgumentError(std::string(what) + ": needs at least " + std::to_string(min_len) +
                        " values");
  }
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string row(std::string_view name, double value, std::size_t width) {
  std::string out(name);
  out.append(width - name.size(), ' ');
  return out + format_fixed(value, 3) + "\n";
}

}  // namespace

double pearson(std::span<const double> y_true, std::span<const double> y_pred) {
  check_lengths(y_true, y_pred, 2, "pearson");
  const double n = static_cast<double>(y_true.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    mx += y_true[i];
    my += y_pred[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double dx = y_true[i] - mx;
    const double dy = y_pred[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedCorrelation(std::string("pearson: ") + (sxx == 0.0 ? "y_true" : "y_pred") +
                               " is constant, correlation undefined");
  }
  const double r = sxy / (std::sqrt(sxx) * std::sqrt(syy));
  return std::clamp(r, -1.0, 1.0);
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
  check_lengths(y_true, y_pred, 1, "rmse");
  double sq = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double d = y_true[i] - y_pred[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(y_true.size()));
}

double r_avg(double r_empathy, double r_distress) {
  for (double r : {r_empathy, r_distress}) {
    if (!(r >= -1.0 && r <= 1.0)) {
      throw ArgumentError("r_avg: correlation " + format_shortest(r) + " outside [-1, 1]");
    }
  }
  return (r_empathy + r_distress) / 2.0;
}

RegressionReport regression_report(std::span<const double> gold_empathy,
                                   std::span<const double> pred_empathy,
                                   std::span<const double> gold_distress,
                                   std::span<const double> pred_distress) {
  if (gold_empathy.size() != gold_distress.size()) {
    throw ArgumentError("regression_report: empathy and distress lengths differ");
  }
  RegressionReport r;
  r.n = gold_empathy.size();
  r.rmse_empathy = rmse(gold_empathy, pred_empathy);
  r.rmse_distress = rmse(gold_distress, pred_distress);
  r.r_empathy = pearson(gold_empathy, pred_empathy);
  r.r_distress = pearson(gold_distress, pred_distress);
  r.r_avg = r_avg(r.r_empathy, r.r_distress);
  return r;
}

ClassificationReport classification_report(std::span<const std::string> gold,
                                           std::span<const std::string> pred,
                                           std::span<const std::string> labels) {
  if (gold.size() != pred.size()) {
    throw ArgumentError("classification_report: " + std::to_string(gold.size()) + " gold vs " +
                        std::to_string(pred.size()) + " predicted labels");
  }
  std::map<std::string, std::size_t> index;
  for (const auto& l : labels) {
    if (!index.emplace(l, index.size()).second) {
      throw ArgumentError("classification_report: duplicate label '" + l + "'");
    }
  }
  auto lookup = [&](const std::string& l, const char* side) {
    auto it = index.find(l);
    if (it == index.end()) {
      throw ArgumentError(std::string("classification_report: unknown ") + side + " label '" + l + "'");
    }
    return it->second;
  };

  const std::size_t k = labels.size();
  ClassificationReport rep;
  rep.n = gold.size();
  rep.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++rep.confusion[lookup(gold[i], "gold")][lookup(pred[i], "predicted")];
  }

  std::size_t tp_sum = 0;
  std::size_t fp_sum = 0;
  std::size_t fn_sum = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t tp = rep.confusion[c][c];
    std::size_t support = 0;
    std::size_t predicted = 0;
    for (std::size_t j = 0; j < k; ++j) {
      support += rep.confusion[c][j];
      predicted += rep.confusion[j][c];
    }
    const std::size_t fp = predicted - tp;
    const std::size_t fn = support - tp;
    LabelStats s;
    s.label = labels[c];
    s.support = support;
    s.precision = ratio(tp, predicted);
    s.recall = ratio(tp, support);
    // 2TP / (2TP + FP + FN) equals the harmonic mean of P and R, and is exact
    // on integer counts.
    s.f1 = ratio(2 * tp, 2 * tp + fp + fn);
    rep.macro_precision += s.precision;
    rep.macro_recall += s.recall;
    rep.macro_f1 += s.f1;
    rep.per_label.push_back(std::move(s));
    tp_sum += tp;
    fp_sum += fp;
    fn_sum += fn;
  }
  if (k > 0) {
    rep.macro_precision /= static_cast<double>(k);
    rep.macro_recall /= static_cast<double>(k);
    rep.macro_f1 /= static_cast<double>(k);
  }
  rep.micro_precision = ratio(tp_sum, tp_sum + fp_sum);
  rep.micro_recall = ratio(tp_sum, tp_sum + fn_sum);
  rep.micro_f1 = ratio(2 * tp_sum, 2 * tp_sum + fp_sum + fn_sum);
  rep.accuracy = ratio(tp_sum, rep.n);
  return rep;
}

ClassificationReport classification_report(std::span<const std::string> gold,
                                           std::span<const std::string> pred) {
  std::vector<std::string> labels(kEmotionLabels.begin(), kEmotionLabels.end());
  return classification_report(gold, pred, labels);
}

std::string render(const RegressionReport& r) {
  constexpr std::size_t w = 22;
  std::string out = "Metric                Result\n";
  out += row("Pearson r (Empathy)", r.r_empathy, w);
  out += row("Pearson r (Distress)", r.r_distress, w);
  out += row("Average r", r.r_avg, w);
  out += row("RMSE (Empathy)", r.rmse_empathy, w);
  out += row("RMSE (Distress)", r.rmse_distress, w);
  out += "n                     " + std::to_string(r.n) + "\n";
  return out;
}

std::string render(const ClassificationReport& r) {
  constexpr std::size_t w = 18;
  std::string out = "Metric            Result\n";
  out += row("Macro F1 Score", r.macro_f1, w);
  out += row("Micro F1 Score", r.micro_f1, w);
  out += row("Accuracy", r.accuracy, w);
  out += row("Macro Precision", r.macro_precision, w);
  out += row("Micro Precision", r.micro_precision, w);
  out += row("Macro Recall", r.macro_recall, w);
  out += row("Micro Recall", r.micro_recall, w);
  out += "n                 " + std::to_string(r.n) + "\n\n";

  std::ostringstream os;
  os << "Label       Precision  Recall  F1     Support\n";
  for (const auto& s : r.per_label) {
    std::string name = s.label;
    name.resize(std::max<std::size_t>(name.size(), 12), ' ');
    os << name << format_fixed(s.precision, 3) << "      " << format_fixed(s.recall, 3) << "   "
       << format_fixed(s.f1, 3) << "  " << s.support << "\n";
  }
  return out + os.str();
}

nlohmann::json to_json(const RegressionReport& r) {
  return {{"rmse_empathy", r.rmse_empathy}, {"rmse_distress", r.rmse_distress},
          {"r_empathy", r.r_empathy},       {"r_distress", r.r_distress},
          {"r_avg", r.r_avg},               {"n", r.n}};
}

nlohmann::json to_json(const ClassificationReport& r) {
  nlohmann::json j = {{"macro_f1", r.macro_f1},
                      {"micro_f1", r.micro_f1},
                      {"accuracy", r.accuracy},
                      {"macro_precision", r.macro_precision},
                      {"micro_precision", r.micro_precision},
                      {"macro_recall", r.macro_recall},
                      {"micro_recall", r.micro_recall},
                      {"n", r.n},
                      {"confusion", r.confusion}};
  j["per_label"] = nlohmann::json::array();
  for (const auto& s : r.per_label) {
    j["per_label"].push_back({{"label", s.label},
                              {"precision", s.precision},
                              {"recall", s.recall},
                              {"f1", s.f1},
                              {"support", s.support}});
  }
  return j;
}

}  // namespace affect::metrics
