#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cokrig/config.hpp"

namespace cokrig {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumerical = 2;

struct RunOutcome {
    int status = kExitOk;
    std::filesystem::path out_dir;
    std::vector<std::string> files; // written, manifest last
    std::string error;              // one-line JSON when status != 0
};

// Runs a validated config. Outputs are buffered and written only on
// success, manifest last; a failed run writes error.log and nothing else.
RunOutcome run(const RunConfig& config);

struct CliArgs {
    Command command = Command::simulate;
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::string> noise_split;
};

// Reads and validates the config file, then runs it. The one-line error, if
// any, goes to `err`.
RunOutcome run_cli(const CliArgs& args, std::ostream& err);

} // namespace cokrig
