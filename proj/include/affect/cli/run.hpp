#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace affect::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
/// Training diverged or a model produced an unusable value.
inline constexpr int kExitRuntime = 3;

/// Runs one subcommand (synth, train, evaluate, predict). `args` excludes the
/// program name. Reports go to `out`; every failure prints one line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace affect::cli
