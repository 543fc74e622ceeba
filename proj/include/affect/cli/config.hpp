#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "affect/track1/pipeline.hpp"
#include "affect/track2/emotion.hpp"

namespace affect::cli {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

/// Every accepted key, in snapshot order.
const std::vector<ConfigKey>& config_keys();

/// Flat key = value run configuration. Starts from the defaults of
/// config_keys(); unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  /// Lines are "key = value"; blank lines and lines starting with '#' are
  /// skipped. Unknown or repeated keys throw ConfigError naming file and line.
  static RunConfig load(const std::filesystem::path& path);
  /// Applies a file on top of the current values.
  void merge_file(const std::filesystem::path& path);

  void set(std::string_view key, std::string value);
  /// "key=value".
  void set_assignment(std::string_view assignment);

  const std::string& get(std::string_view key) const;
  int get_int(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<int> get_int_list(std::string_view key) const;

  /// All keys in config_keys() order.
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  bool operator==(const RunConfig&) const = default;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

enum class Track { track1, track2 };
Track task_of(const RunConfig& c);

track1::Track1Hyper track1_hyper(const RunConfig& c);

/// Generator or classifier settings for the main stage; `lr_key` picks the
/// per-stage learning rate.
track2::ModelHyper track2_hyper(const RunConfig& c, std::string_view lr_key);
track2::StagedHyper staged_hyper(const RunConfig& c);

}  // namespace affect::cli
