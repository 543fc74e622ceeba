#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace affect::corpus {

struct ScoreRange {
  double lo = 1.0;
  double hi = 7.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
};

/// One essay with whatever annotations the source provides. Absent fields stay
/// absent; nothing is defaulted to zero.
struct EssayRecord {
  std::string id;
  std::string essay;
  std::optional<double> empathy;
  std::optional<double> distress;
  std::optional<std::string> emotion;

  std::optional<double> age;
  std::optional<double> income;
  std::optional<std::string> gender;
  std::optional<std::string> ethnicity;
  std::optional<std::string> education;
  /// Trait name (without the "personality_" prefix) -> score.
  std::map<std::string, double> personality;

  bool operator==(const EssayRecord&) const = default;
};

enum class Target { empathy, distress };

std::string_view to_string(Target t);
Target parse_target(std::string_view s);
std::optional<double> target_value(const EssayRecord& rec, Target t);

/// Numeric columns are "age", "income" and "personality_<trait>"; categorical
/// columns are "gender", "ethnicity" and "education". Unknown names throw
/// ArgumentError.
std::optional<double> numeric_field(const EssayRecord& rec, std::string_view column);
std::optional<std::string> categorical_field(const EssayRecord& rec, std::string_view column);
bool is_numeric_column(std::string_view column);
bool is_categorical_column(std::string_view column);

struct Dataset {
  std::vector<EssayRecord> records;
  /// Source path, or "synthetic(...)" for generated corpora.
  std::string provenance;
  /// Non-fatal findings from loading (e.g. scores outside the score range).
  std::vector<std::string> warnings;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  std::vector<std::string> essays() const;
  /// Sorted union of personality traits present in any record.
  std::vector<std::string> personality_traits() const;
};

/// Checks record invariants (non-empty essay, known label, unique ids) and
/// throws DataError listing every offending record.
void validate_records(const Dataset& d);

}  // namespace affect::corpus
