#include "affect/corpus/scaler.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "affect/common.hpp"

namespace affect::corpus {

namespace {
constexpr const char* kUnseenSlot = "<unseen>";
}

ScalerConfig ScalerConfig::defaults_for(const Dataset& train) {
  ScalerConfig c;
  c.numeric = {"age", "income"};
  for (const auto& t : train.personality_traits()) c.numeric.push_back("personality_" + t);
  c.categorical = {"gender", "ethnicity", "education"};
  return c;
}

FeatureScaler fit_scaler(const Dataset& train, const ScalerConfig& config) {
  if (train.empty()) throw ArgumentError("fit_scaler: empty training set");
  FeatureScaler s;
  for (const auto& col : config.numeric) {
    if (!is_numeric_column(col)) throw ConfigError("'" + col + "' is not a numeric column");
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : train.records) {
      if (auto v = numeric_field(r, col)) {
        sum += *v;
        ++n;
      }
    }
    FeatureScaler::NumericStats st{col, 0.0, 0.0};
    if (n > 0) {
      st.mean = sum / static_cast<double>(n);
      double sq = 0.0;
      for (const auto& r : train.records) {
        if (auto v = numeric_field(r, col)) sq += (*v - st.mean) * (*v - st.mean);
      }
      st.std = std::sqrt(sq / static_cast<double>(n));
    }
    s.numeric_.push_back(st);
  }
  for (const auto& col : config.categorical) {
    if (!is_categorical_column(col)) throw ConfigError("'" + col + "' is not a categorical column");
    std::set<std::string> cats;
    for (const auto& r : train.records) {
      if (auto v = categorical_field(r, col)) cats.insert(*v);
    }
    s.categorical_.push_back({col, {cats.begin(), cats.end()}});
  }
  s.fitted_ = true;
  return s;
}

std::size_t FeatureScaler::output_dim() const {
  std::size_t n = numeric_.size();
  for (const auto& c : categorical_) n += c.categories.size() + 1;
  return n;
}

std::vector<std::string> FeatureScaler::feature_names() const {
  std::vector<std::string> names;
  for (const auto& st : numeric_) names.push_back(st.column);
  for (const auto& c : categorical_) {
    for (const auto& cat : c.categories) names.push_back(c.column + "=" + cat);
    names.push_back(c.column + "=" + kUnseenSlot);
  }
  return names;
}

std::vector<double> FeatureScaler::transform(const EssayRecord& rec) const {
  if (!fitted_) throw StateError("transform called on an unfitted FeatureScaler");
  std::vector<double> out;
  out.reserve(output_dim());
  for (const auto& st : numeric_) {
    auto v = numeric_field(rec, st.column);
    out.push_back(v && st.std > 0.0 ? (*v - st.mean) / st.std : 0.0);
  }
  for (const auto& c : categorical_) {
    const std::size_t base = out.size();
    out.resize(base + c.categories.size() + 1, 0.0);
    auto v = categorical_field(rec, c.column);
    if (!v) continue;
    auto it = std::lower_bound(c.categories.begin(), c.categories.end(), *v);
    const bool seen = it != c.categories.end() && *it == *v;
    const auto slot = seen ? static_cast<std::size_t>(it - c.categories.begin()) : c.categories.size();
    out[base + slot] = 1.0;
  }
  return out;
}

nlohmann::json FeatureScaler::to_json() const {
  if (!fitted_) throw StateError("cannot serialize an unfitted FeatureScaler");
  nlohmann::json j;
  j["numeric"] = nlohmann::json::array();
  for (const auto& st : numeric_) {
    j["numeric"].push_back({{"column", st.column}, {"mean", st.mean}, {"std", st.std}});
  }
  j["categorical"] = nlohmann::json::array();
  for (const auto& c : categorical_) {
    j["categorical"].push_back({{"column", c.column}, {"categories", c.categories}});
  }
  return j;
}

FeatureScaler FeatureScaler::from_json(const nlohmann::json& j) {
  FeatureScaler s;
  try {
    for (const auto& n : j.at("numeric")) {
      s.numeric_.push_back({n.at("column").get<std::string>(), n.at("mean").get<double>(),
                            n.at("std").get<double>()});
    }
    for (const auto& c : j.at("categorical")) {
      s.categorical_.push_back(
          {c.at("column").get<std::string>(), c.at("categories").get<std::vector<std::string>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed scaler: ") + e.what());
  }
  s.fitted_ = true;
  return s;
}

bool FeatureScaler::operator==(const FeatureScaler& o) const {
  if (fitted_ != o.fitted_ || numeric_.size() != o.numeric_.size() ||
      categorical_.size() != o.categorical_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < numeric_.size(); ++i) {
    const auto& a = numeric_[i];
    const auto& b = o.numeric_[i];
    if (a.column != b.column || a.mean != b.mean || a.std != b.std) return false;
  }
  for (std::size_t i = 0; i < categorical_.size(); ++i) {
    if (categorical_[i].column != o.categorical_[i].column ||
        categorical_[i].categories != o.categorical_[i].categories) {
      return false;
    }
  }
  return true;
}

}  // namespace affect::corpus
