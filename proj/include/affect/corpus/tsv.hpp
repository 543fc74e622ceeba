#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "affect/corpus/record.hpp"

namespace affect::corpus {

/// Maps logical columns to header names. Logical columns: id, essay, empathy,
/// distress, emotion, age, gender, ethnicity, income, education and any
/// personality_<trait>.
///
/// Columns named in a schema file must exist in the TSV header. The built-in
/// default maps every logical column to the same header name and treats all
/// of them except essay as optional; with it, any header starting with
/// "personality_" is picked up as a trait.
struct Schema {
  std::map<std::string, std::string> columns;
  std::map<std::string, bool> required;
  bool auto_personality = false;
  ScoreRange score_range;

  static Schema defaults();
  /// Flat "key = value" file. Keys are logical column names plus score_min and
  /// score_max. Unknown keys throw ConfigError.
  static Schema load(const std::filesystem::path& path);
};

std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

/// Parses the whole file before returning. Missing mapped columns throw
/// SchemaError; bad cells are collected and reported together in one
/// DataError whose details name line and column.
Dataset load_tsv(const std::filesystem::path& path, const Schema& schema = Schema::defaults());

/// Writes every logical column under its logical name, numbers in shortest
/// round-trip form, absent values as empty cells.
void write_tsv(const std::filesystem::path& path, const Dataset& d);

}  // namespace affect::corpus
