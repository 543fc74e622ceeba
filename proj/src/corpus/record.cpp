#include "affect/corpus/record.hpp"

#include <set>

#include "affect/common.hpp"
#include "affect/labels.hpp"

namespace affect::corpus {

namespace {
constexpr std::string_view kPersonalityPrefix = "personality_";
}

std::string_view to_string(Target t) { return t == Target::empathy ? "empathy" : "distress"; }

Target parse_target(std::string_view s) {
  if (s == "empathy") return Target::empathy;
  if (s == "distress") return Target::distress;
  throw ConfigError("unknown target '" + std::string(s) + "' (expected empathy or distress)");
}

std::optional<double> target_value(const EssayRecord& rec, Target t) {
  return t == Target::empathy ? rec.empathy : rec.distress;
}

bool is_numeric_column(std::string_view column) {
  return column == "age" || column == "income" ||
         (column.size() > kPersonalityPrefix.size() && column.starts_with(kPersonalityPrefix));
}

bool is_categorical_column(std::string_view column) {
  return column == "gender" || column == "ethnicity" || column == "education";
}

std::optional<double> numeric_field(const EssayRecord& rec, std::string_view column) {
  if (column == "age") return rec.age;
  if (column == "income") return rec.income;
  if (is_numeric_column(column)) {
    auto it = rec.personality.find(std::string(column.substr(kPersonalityPrefix.size())));
    if (it == rec.personality.end()) return std::nullopt;
    return it->second;
  }
  throw ArgumentError("'" + std::string(column) + "' is not a numeric column");
}

std::optional<std::string> categorical_field(const EssayRecord& rec, std::string_view column) {
  if (column == "gender") return rec.gender;
  if (column == "ethnicity") return rec.ethnicity;
  if (column == "education") return rec.education;
  throw ArgumentError("'" + std::string(column) + "' is not a categorical column");
}

std::vector<std::string> Dataset::essays() const {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.essay);
  return out;
}

std::vector<std::string> Dataset::personality_traits() const {
  std::set<std::string> traits;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.personality) traits.insert(k);
  }
  return {traits.begin(), traits.end()};
}

void validate_records(const Dataset& d) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    const std::string where = "record " + std::to_string(i) + " (id '" + r.id + "')";
    if (trim(r.essay).empty()) problems.push_back(where + ": empty essay");
    if (r.emotion && !emotion_index(*r.emotion)) {
      problems.push_back(where + ": unknown emotion '" + *r.emotion + "'");
    }
    if (!r.id.empty() && !ids.insert(r.id).second) problems.push_back(where + ": duplicate id");
  }
  if (!problems.empty()) {
    throw DataError(std::to_string(problems.size()) + " invalid record(s) in " + d.provenance,
                    std::move(problems));
  }
}

}  // namespace affect::corpus
